//! Relational objectives on the `v` table: graph distance regression, TransE
//! and a neural tensor network, plus the word graph they read from.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::admm::Penalty;
use crate::distributional::hinge_loss;
use crate::error::{Error, Result};
use crate::math::{self, RowGradients};
use crate::rng::Rng;
use crate::table::EmbeddingTable;

// ---------------------------------------------------------------------------
// Word graph

/// How a shortest-path length `L` becomes a similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityScale {
    /// `1 - L / 2D`
    #[default]
    Linear,
    /// `1 - ln(L + 1) / ln(2D + 1)`
    Log,
}

/// Undirected synset graph with word → synset membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordGraph {
    adjacency: Vec<Vec<usize>>,
    membership: Vec<Vec<usize>>,
    depth: usize,
}

impl WordGraph {
    /// `membership[word]` lists the synsets of relational word id `word`.
    /// Without an explicit `depth`, `D = max(1, ⌈diameter / 2⌉)` over the
    /// finite shortest paths, so every connected pair has `L ≤ 2D`.
    pub fn new(
        synsets: usize,
        edges: &[(usize, usize)],
        membership: Vec<Vec<usize>>,
        depth: Option<usize>,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); synsets];
        for &(a, b) in edges {
            if a >= synsets {
                return Err(Error::UnknownSynset(a));
            }
            if b >= synsets {
                return Err(Error::UnknownSynset(b));
            }
            if !adjacency[a].contains(&b) {
                adjacency[a].push(b);
            }
            if !adjacency[b].contains(&a) {
                adjacency[b].push(a);
            }
        }
        for syns in &membership {
            if let Some(&bad) = syns.iter().find(|&&s| s >= synsets) {
                return Err(Error::UnknownSynset(bad));
            }
        }
        let mut graph = WordGraph {
            adjacency,
            membership,
            depth: 1,
        };
        graph.depth = match depth {
            Some(0) => return Err(Error::Config("graph depth must be positive".into())),
            Some(d) => d,
            None => graph.diameter().div_ceil(2).max(1),
        };
        Ok(graph)
    }

    pub fn synsets(&self) -> usize {
        self.adjacency.len()
    }

    pub fn words(&self) -> usize {
        self.membership.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn neighbors(&self, s: usize) -> &[usize] {
        &self.adjacency[s]
    }

    pub fn synsets_of(&self, word: usize) -> &[usize] {
        self.membership.get(word).map_or(&[], Vec::as_slice)
    }

    /// Relational word ids that own at least one synset.
    pub fn words_with_synsets(&self) -> Vec<usize> {
        (0..self.membership.len())
            .filter(|&w| !self.membership[w].is_empty())
            .collect()
    }

    /// BFS hop counts from a set of sources; `None` marks unreachable nodes.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.synsets()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = dist[x].map(|d| d + 1);
            for &y in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = next;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    fn diameter(&self) -> usize {
        (0..self.synsets())
            .map(|s| self.distances_from(&[s]).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Hop count between two synsets, `None` when disconnected.
    pub fn shortest_path(&self, s: usize, t: usize) -> Result<Option<usize>> {
        if s >= self.synsets() {
            return Err(Error::UnknownSynset(s));
        }
        if t >= self.synsets() {
            return Err(Error::UnknownSynset(t));
        }
        Ok(self.distances_from(&[s])[t])
    }

    /// Distances from every synset of `word`, for repeated similarity queries.
    pub fn word_distances(&self, word: usize) -> Result<Vec<Option<usize>>> {
        let syns = self.synsets_of(word);
        if syns.is_empty() {
            return Err(Error::NoSynset(word));
        }
        Ok(self.distances_from(syns))
    }

    /// Similarity to `other` given `distances` from [`WordGraph::word_distances`].
    pub fn similarity_from(
        &self,
        distances: &[Option<usize>],
        other: usize,
        scale: SimilarityScale,
    ) -> Result<f64> {
        let syns = self.synsets_of(other);
        if syns.is_empty() {
            return Err(Error::NoSynset(other));
        }
        let shortest = syns.iter().filter_map(|&t| distances[t]).min();
        Ok(match shortest {
            None => 0.0,
            Some(l) => {
                let span = (2 * self.depth) as f64;
                let sim = match scale {
                    SimilarityScale::Linear => 1.0 - l as f64 / span,
                    SimilarityScale::Log => 1.0 - libm::log(l as f64 + 1.0) / libm::log(span + 1.0),
                };
                sim.clamp(0.0, 1.0)
            }
        })
    }

    /// Normalized shortest-path similarity between two words' synsets.
    pub fn word_sim(&self, i: usize, j: usize, scale: SimilarityScale) -> Result<f64> {
        if self.synsets_of(j).is_empty() {
            return Err(Error::NoSynset(j));
        }
        let dist = self.word_distances(i)?;
        self.similarity_from(&dist, j, scale)
    }
}

// ---------------------------------------------------------------------------
// Graph distance regression

/// Affine map from graph similarity to cosine range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdParams {
    pub a: f64,
    pub b: f64,
}

impl Default for GdParams {
    fn default() -> Self {
        GdParams { a: 1.0, b: 0.0 }
    }
}

/// A sampled word pair and its graph similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordPair {
    pub i: usize,
    pub j: usize,
    pub sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdGradients {
    pub loss: f64,
    pub vi: Vec<f64>,
    pub vj: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// `(cos(v_i, v_j) - (a·sim + b))²` and its gradients.
pub fn loss_gd(i: usize, j: usize, v: &EmbeddingTable, p: &GdParams, sim: f64) -> Result<GdGradients> {
    let (x, y) = (v.row(i), v.row(j));
    let nx = math::norm(x);
    let ny = math::norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm("graph distance loss"));
    }
    let cos = math::dot(x, y) / (nx * ny);
    let r = cos - (p.a * sim + p.b);
    // ∂cos/∂x = y/(|x||y|) - cos·x/|x|²
    let grad_of = |own: &[f64], other: &[f64], n_own: f64| -> Vec<f64> {
        own.iter()
            .zip(other)
            .map(|(o, t)| 2.0 * r * (t / (nx * ny) - cos * o / (n_own * n_own)))
            .collect()
    };
    Ok(GdGradients {
        loss: r * r,
        vi: grad_of(x, y, nx),
        vj: grad_of(y, x, ny),
        a: -2.0 * r * sim,
        b: -2.0 * r,
    })
}

// ---------------------------------------------------------------------------
// Triples

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RelationTriple {
    pub left: usize,
    pub relation: usize,
    pub right: usize,
    pub label: Label,
}

impl RelationTriple {
    pub fn new(left: usize, relation: usize, right: usize, label: Label) -> Self {
        RelationTriple {
            left,
            relation,
            right,
            label,
        }
    }
}

/// Replaces the left or right word (chosen uniformly) by a different uniform id.
pub fn corrupt_triple(t: &RelationTriple, vocab_len: usize, rng: &mut Rng) -> Result<RelationTriple> {
    if vocab_len < 2 {
        return Err(Error::CannotCorrupt(vocab_len));
    }
    let mut c = *t;
    if rng.coin() {
        c.left = rng.below_excluding(vocab_len, t.left);
    } else {
        c.right = rng.below_excluding(vocab_len, t.right);
    }
    Ok(c)
}

/// A relation model that scores triples against the `v` table.
///
/// Parameters are laid out as one contiguous block per relation plus an
/// optional block shared by all relations.
pub trait TripleScorer {
    fn num_relations(&self) -> usize;
    fn dim(&self) -> usize;
    fn relation_block_len(&self) -> usize;
    fn shared_len(&self) -> usize;

    fn score(&self, t: &RelationTriple, v: &EmbeddingTable) -> Result<f64>;

    /// Adds `sign · ∂score` into the accumulators; returns the score.
    fn accumulate_gradient(
        &self,
        t: &RelationTriple,
        v: &EmbeddingTable,
        sign: f64,
        rows: &mut RowGradients,
        relation_grad: &mut [f64],
        shared_grad: &mut [f64],
    ) -> Result<f64>;

    fn relation_block_mut(&mut self, relation: usize) -> &mut [f64];
    fn shared_mut(&mut self) -> &mut [f64];
    fn is_finite(&self) -> bool;

    fn check(&self, t: &RelationTriple, v: &EmbeddingTable) -> Result<()> {
        if t.relation >= self.num_relations() {
            return Err(Error::UnknownRelation(t.relation));
        }
        if v.dim() != self.dim() {
            return Err(Error::Dimension {
                what: "embedding dim vs relation model",
                expected: self.dim(),
                got: v.dim(),
            });
        }
        for id in [t.left, t.right] {
            if id >= v.rows() {
                return Err(Error::Input(alloc::format!("word id {id} outside table")));
            }
        }
        Ok(())
    }
}

/// One translation vector per relation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransEParams {
    dim: usize,
    vectors: Vec<f64>,
}

impl TransEParams {
    pub fn zeros(relations: usize, dim: usize) -> Self {
        TransEParams {
            dim,
            vectors: vec![0.0; relations * dim],
        }
    }

    pub fn init(relations: usize, dim: usize, scale: f64, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(relations, dim);
        for x in &mut p.vectors {
            *x = rng.uniform(-scale, scale);
        }
        p
    }

    pub fn from_vectors(dim: usize, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 || !vectors.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                what: "TransE relation vectors",
                expected: dim,
                got: vectors.len(),
            });
        }
        Ok(TransEParams { dim, vectors })
    }

    pub fn vector(&self, relation: usize) -> &[f64] {
        &self.vectors[relation * self.dim..(relation + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, relation: usize) -> &mut [f64] {
        &mut self.vectors[relation * self.dim..(relation + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vectors
    }

    fn residual(&self, t: &RelationTriple, v: &EmbeddingTable) -> Vec<f64> {
        let (l, r, rel) = (v.row(t.left), v.row(t.right), self.vector(t.relation));
        l.iter().zip(rel).zip(r).map(|((a, b), c)| a + b - c).collect()
    }
}

impl TripleScorer for TransEParams {
    fn num_relations(&self) -> usize {
        self.vectors.len() / self.dim.max(1)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn relation_block_len(&self) -> usize {
        self.dim
    }

    fn shared_len(&self) -> usize {
        0
    }

    /// `-‖v_l + R - v_r‖₂`
    fn score(&self, t: &RelationTriple, v: &EmbeddingTable) -> Result<f64> {
        self.check(t, v)?;
        Ok(-math::norm(&self.residual(t, v)))
    }

    fn accumulate_gradient(
        &self,
        t: &RelationTriple,
        v: &EmbeddingTable,
        sign: f64,
        rows: &mut RowGradients,
        relation_grad: &mut [f64],
        _shared_grad: &mut [f64],
    ) -> Result<f64> {
        self.check(t, v)?;
        let e = self.residual(t, v);
        let n = math::norm(&e);
        // The norm has no gradient at zero; use the zero subgradient there.
        if n > 0.0 {
            let k = -sign / n;
            math::axpy(k, &e, rows.entry(t.left));
            math::axpy(-k, &e, rows.entry(t.right));
            math::axpy(k, &e, relation_grad);
        }
        Ok(-n)
    }

    fn relation_block_mut(&mut self, relation: usize) -> &mut [f64] {
        self.vector_mut(relation)
    }

    fn shared_mut(&mut self) -> &mut [f64] {
        &mut []
    }

    fn is_finite(&self) -> bool {
        math::all_finite(&self.vectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Sigmoid,
    Tanh,
}

impl Nonlinearity {
    fn apply(self, z: f64) -> f64 {
        match self {
            Nonlinearity::Sigmoid => math::sigmoid(z),
            Nonlinearity::Tanh => math::tanh(z),
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative(self, act: f64) -> f64 {
        match self {
            Nonlinearity::Sigmoid => act * (1.0 - act),
            Nonlinearity::Tanh => 1.0 - act * act,
        }
    }
}

/// Neural tensor network parameters.
///
/// Per relation the block holds `W` (`hidden` slices of `dim × dim`), then
/// `V` (`hidden × 2·dim`), then `b` (`hidden`). `u` is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct NtnParams {
    dim: usize,
    hidden: usize,
    relations: usize,
    blocks: Vec<f64>,
    u: Vec<f64>,
    nonlinearity: Nonlinearity,
}

impl NtnParams {
    pub fn zeros(relations: usize, dim: usize, hidden: usize, nonlinearity: Nonlinearity) -> Self {
        let block = Self::block_len_for(dim, hidden);
        NtnParams {
            dim,
            hidden,
            relations,
            blocks: vec![0.0; relations * block],
            u: vec![0.0; hidden],
            nonlinearity,
        }
    }

    /// `W`, `V` uniform in `±1/√(2·dim)`, `u` in `±1/√hidden`, `b` zero.
    pub fn init(
        relations: usize,
        dim: usize,
        hidden: usize,
        nonlinearity: Nonlinearity,
        rng: &mut Rng,
    ) -> Result<Self> {
        if dim == 0 || hidden == 0 {
            return Err(Error::Config("NTN dim and hidden must be positive".into()));
        }
        let mut p = Self::zeros(relations, dim, hidden, nonlinearity);
        let sw = 1.0 / math::sqrt((2 * dim) as f64);
        let su = 1.0 / math::sqrt(hidden as f64);
        let wv_len = hidden * dim * dim + hidden * 2 * dim;
        for r in 0..relations {
            for x in &mut p.relation_block_mut(r)[..wv_len] {
                *x = rng.uniform(-sw, sw);
            }
        }
        for x in &mut p.u {
            *x = rng.uniform(-su, su);
        }
        Ok(p)
    }

    pub fn from_parts(
        dim: usize,
        hidden: usize,
        blocks: Vec<f64>,
        u: Vec<f64>,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        let block = Self::block_len_for(dim, hidden);
        if dim == 0 || hidden == 0 || !blocks.len().is_multiple_of(block) || u.len() != hidden {
            return Err(Error::Config("inconsistent NTN parameter shapes".into()));
        }
        Ok(NtnParams {
            dim,
            hidden,
            relations: blocks.len() / block,
            blocks,
            u,
            nonlinearity,
        })
    }

    fn block_len_for(dim: usize, hidden: usize) -> usize {
        hidden * dim * dim + hidden * 2 * dim + hidden
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn blocks(&self) -> &[f64] {
        &self.blocks
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    fn block(&self, r: usize) -> &[f64] {
        let len = self.relation_block_len();
        &self.blocks[r * len..(r + 1) * len]
    }

    /// Index of `W[k][i][j]` inside a relation block.
    pub fn w_index(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    /// Index of `V[k][c]` inside a relation block.
    pub fn v_index(&self, k: usize, c: usize) -> usize {
        self.hidden * self.dim * self.dim + k * 2 * self.dim + c
    }

    /// Index of `b[k]` inside a relation block.
    pub fn b_index(&self, k: usize) -> usize {
        self.hidden * self.dim * self.dim + self.hidden * 2 * self.dim + k
    }

    fn activations(&self, t: &RelationTriple, v: &EmbeddingTable) -> Vec<f64> {
        let (l, r) = (v.row(t.left), v.row(t.right));
        let d = self.dim;
        let block = self.block(t.relation);
        (0..self.hidden)
            .map(|k| {
                let mut z = block[self.b_index(k)];
                for i in 0..d {
                    let w_row = &block[self.w_index(k, i, 0)..self.w_index(k, i, 0) + d];
                    z += l[i] * math::dot(w_row, r);
                }
                let v_row = &block[self.v_index(k, 0)..self.v_index(k, 0) + 2 * d];
                z += math::dot(&v_row[..d], l) + math::dot(&v_row[d..], r);
                self.nonlinearity.apply(z)
            })
            .collect()
    }
}

impl TripleScorer for NtnParams {
    fn num_relations(&self) -> usize {
        self.relations
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn relation_block_len(&self) -> usize {
        Self::block_len_for(self.dim, self.hidden)
    }

    fn shared_len(&self) -> usize {
        self.hidden
    }

    /// `uᵀ f(v_lᵀ W v_r + V [v_l; v_r] + b)`
    fn score(&self, t: &RelationTriple, v: &EmbeddingTable) -> Result<f64> {
        self.check(t, v)?;
        Ok(math::dot(&self.u, &self.activations(t, v)))
    }

    fn accumulate_gradient(
        &self,
        t: &RelationTriple,
        v: &EmbeddingTable,
        sign: f64,
        rows: &mut RowGradients,
        relation_grad: &mut [f64],
        shared_grad: &mut [f64],
    ) -> Result<f64> {
        self.check(t, v)?;
        let d = self.dim;
        let act = self.activations(t, v);
        let (l, r) = (v.row(t.left), v.row(t.right));
        let block = self.block(t.relation);
        let mut dl = vec![0.0; d];
        let mut dr = vec![0.0; d];
        for k in 0..self.hidden {
            shared_grad[k] += sign * act[k];
            let delta = sign * self.u[k] * self.nonlinearity.derivative(act[k]);
            if delta == 0.0 {
                continue;
            }
            relation_grad[self.b_index(k)] += delta;
            for i in 0..d {
                let base = self.w_index(k, i, 0);
                let w_row = &block[base..base + d];
                // ∂/∂W[k][i][j] = δ l_i r_j
                math::axpy(delta * l[i], r, &mut relation_grad[base..base + d]);
                dl[i] += delta * math::dot(w_row, r);
                math::axpy(delta * l[i], w_row, &mut dr);
            }
            let vb = self.v_index(k, 0);
            math::axpy(delta, l, &mut relation_grad[vb..vb + d]);
            math::axpy(delta, r, &mut relation_grad[vb + d..vb + 2 * d]);
            math::axpy(delta, &block[vb..vb + d], &mut dl);
            math::axpy(delta, &block[vb + d..vb + 2 * d], &mut dr);
        }
        math::axpy(1.0, &dl, rows.entry(t.left));
        math::axpy(1.0, &dr, rows.entry(t.right));
        Ok(math::dot(&self.u, &act))
    }

    fn relation_block_mut(&mut self, relation: usize) -> &mut [f64] {
        let len = self.relation_block_len();
        &mut self.blocks[relation * len..(relation + 1) * len]
    }

    fn shared_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    fn is_finite(&self) -> bool {
        math::all_finite(&self.blocks) && math::all_finite(&self.u)
    }
}

/// Gradient of the hinge loss for a `(positive, corrupted)` triple pair.
/// Both triples share one relation.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleGradients {
    pub loss: f64,
    pub relation: usize,
    pub rows: RowGradients,
    pub relation_grad: Vec<f64>,
    pub shared_grad: Vec<f64>,
}

impl TripleGradients {
    pub fn is_zero(&self) -> bool {
        self.rows.is_zero()
            && self.relation_grad.iter().all(|&x| x == 0.0)
            && self.shared_grad.iter().all(|&x| x == 0.0)
    }
}

pub fn triple_hinge_gradients<M: TripleScorer + ?Sized>(
    pos: &RelationTriple,
    neg: &RelationTriple,
    v: &EmbeddingTable,
    model: &M,
) -> Result<TripleGradients> {
    if pos.relation != neg.relation {
        return Err(Error::Input("corrupted triple changed its relation".into()));
    }
    let s_pos = model.score(pos, v)?;
    let s_neg = model.score(neg, v)?;
    let mut grads = TripleGradients {
        loss: hinge_loss(s_pos, s_neg),
        relation: pos.relation,
        rows: RowGradients::new(v.dim()),
        relation_grad: vec![0.0; model.relation_block_len()],
        shared_grad: vec![0.0; model.shared_len()],
    };
    for id in [pos.left, pos.right, neg.left, neg.right] {
        grads.rows.entry(id);
    }
    if grads.loss > 0.0 {
        model.accumulate_gradient(pos, v, -1.0, &mut grads.rows, &mut grads.relation_grad, &mut grads.shared_grad)?;
        model.accumulate_gradient(neg, v, 1.0, &mut grads.rows, &mut grads.relation_grad, &mut grads.shared_grad)?;
    }
    Ok(grads)
}

// ---------------------------------------------------------------------------
// SGD

/// The relational objective together with its parameters `φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum RelationalObjective {
    GraphDistance(GdParams),
    TransE(TransEParams),
    Ntn(NtnParams),
}

impl RelationalObjective {
    pub fn name(&self) -> &'static str {
        match self {
            RelationalObjective::GraphDistance(_) => "gd",
            RelationalObjective::TransE(_) => "transe",
            RelationalObjective::Ntn(_) => "ntn",
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            RelationalObjective::GraphDistance(p) => p.a.is_finite() && p.b.is_finite(),
            RelationalObjective::TransE(p) => p.is_finite(),
            RelationalObjective::Ntn(p) => p.is_finite(),
        }
    }

    /// The triple scorer, if this objective scores triples.
    pub fn scorer(&self) -> Option<&dyn TripleScorer> {
        match self {
            RelationalObjective::GraphDistance(_) => None,
            RelationalObjective::TransE(p) => Some(p),
            RelationalObjective::Ntn(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelationalBatch {
    Pairs(Vec<WordPair>),
    Triples(Vec<RelationTriple>),
}

impl RelationalBatch {
    pub fn len(&self) -> usize {
        match self {
            RelationalBatch::Pairs(p) => p.len(),
            RelationalBatch::Triples(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn apply_rows(
    rows: &mut RowGradients,
    v: &mut EmbeddingTable,
    lr: f64,
    penalty: Option<&Penalty<'_>>,
) {
    if let Some(pen) = penalty {
        for (id, g) in rows.iter_mut() {
            pen.accumulate_row_gradient(id, v.row(id), g);
        }
    }
    for (id, g) in rows.iter() {
        math::axpy(-lr, g, v.row_mut(id));
    }
}

fn triple_step<M: TripleScorer>(
    triples: &[RelationTriple],
    v: &mut EmbeddingTable,
    model: &mut M,
    lr: f64,
    penalty: Option<&Penalty<'_>>,
    rng: &mut Rng,
) -> Result<f64> {
    let vocab_len = v.rows();
    let mut total = 0.0;
    for t in triples {
        let neg = corrupt_triple(t, vocab_len, rng)?;
        let mut grads = triple_hinge_gradients(t, &neg, v, model)?;
        total += grads.loss;
        math::axpy(-lr, &grads.relation_grad, model.relation_block_mut(grads.relation));
        math::axpy(-lr, &grads.shared_grad, model.shared_mut());
        apply_rows(&mut grads.rows, v, lr, penalty);
    }
    Ok(total / triples.len() as f64)
}

/// One SGD pass over `batch` for the relational side. Graph distance uses the
/// squared-error loss on each pair; TransE and NTN draw one corruption per
/// triple and use the hinge loss. Returns the mean loss.
pub fn relational_sgd_step(
    batch: &RelationalBatch,
    v: &mut EmbeddingTable,
    objective: &mut RelationalObjective,
    lr: f64,
    penalty: Option<&Penalty<'_>>,
    rng: &mut Rng,
) -> Result<f64> {
    if lr.is_nan() || lr < 0.0 {
        return Err(Error::Config("learning rate must be non-negative".into()));
    }
    if batch.is_empty() {
        return Ok(0.0);
    }
    match (batch, objective) {
        (RelationalBatch::Pairs(pairs), RelationalObjective::GraphDistance(p)) => {
            let mut total = 0.0;
            for pair in pairs {
                let g = loss_gd(pair.i, pair.j, v, p, pair.sim)?;
                total += g.loss;
                p.a -= lr * g.a;
                p.b -= lr * g.b;
                let mut rows = RowGradients::new(v.dim());
                math::axpy(1.0, &g.vi, rows.entry(pair.i));
                math::axpy(1.0, &g.vj, rows.entry(pair.j));
                apply_rows(&mut rows, v, lr, penalty);
            }
            Ok(total / pairs.len() as f64)
        }
        (RelationalBatch::Triples(ts), RelationalObjective::TransE(p)) => {
            triple_step(ts, v, p, lr, penalty, rng)
        }
        (RelationalBatch::Triples(ts), RelationalObjective::Ntn(p)) => {
            triple_step(ts, v, p, lr, penalty, rng)
        }
        (_, obj) => Err(Error::Config(alloc::format!(
            "batch kind does not match the {} objective",
            obj.name()
        ))),
    }
}
