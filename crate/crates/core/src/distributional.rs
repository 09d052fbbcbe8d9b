//! Two-layer n-gram scorer trained against corrupted n-grams.
//!
//! `score(x) = uᵀ σ(A x + b)` where `x` concatenates the `n` word vectors of
//! the n-gram. Training minimizes `max(0, 1 - score(g) + score(g'))` with `g'`
//! the n-gram with its center word replaced at random.

use alloc::vec;
use alloc::vec::Vec;

use crate::admm::Penalty;
use crate::error::{Error, Result};
use crate::math::{self, RowGradients};
use crate::rng::Rng;
use crate::table::EmbeddingTable;

/// Parameters `A` (`hidden × context·dim`, row-major), `b` and `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NlmParams {
    pub context: usize,
    pub dim: usize,
    pub hidden: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u: Vec<f64>,
}

impl NlmParams {
    pub fn zeros(context: usize, dim: usize, hidden: usize) -> Self {
        NlmParams {
            context,
            dim,
            hidden,
            a: vec![0.0; hidden * context * dim],
            b: vec![0.0; hidden],
            u: vec![0.0; hidden],
        }
    }

    /// `A` and `u` uniform in `±1/√fan_in`, `b` zero.
    pub fn init(context: usize, dim: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        if context == 0 || dim == 0 || hidden == 0 {
            return Err(Error::Config(
                "context, dim and hidden must all be positive".into(),
            ));
        }
        let mut p = Self::zeros(context, dim, hidden);
        let sa = 1.0 / math::sqrt((context * dim) as f64);
        let su = 1.0 / math::sqrt(hidden as f64);
        for x in &mut p.a {
            *x = rng.uniform(-sa, sa);
        }
        for x in &mut p.u {
            *x = rng.uniform(-su, su);
        }
        Ok(p)
    }

    pub fn input_len(&self) -> usize {
        self.context * self.dim
    }

    pub fn is_finite(&self) -> bool {
        math::all_finite(&self.a) && math::all_finite(&self.b) && math::all_finite(&self.u)
    }

    fn check(&self, g: &Ngram, w: &EmbeddingTable) -> Result<()> {
        if w.dim() != self.dim {
            return Err(Error::Dimension {
                what: "embedding dim vs NLM input",
                expected: self.dim,
                got: w.dim(),
            });
        }
        if g.len() != self.context {
            return Err(Error::Dimension {
                what: "n-gram length",
                expected: self.context,
                got: g.len(),
            });
        }
        if self.a.len() != self.hidden * self.input_len()
            || self.b.len() != self.hidden
            || self.u.len() != self.hidden
        {
            return Err(Error::Config("inconsistent NLM parameter shapes".into()));
        }
        if let Some(&bad) = g.ids().iter().find(|&&id| id >= w.rows()) {
            return Err(Error::Input(alloc::format!("word id {bad} outside table")));
        }
        Ok(())
    }
}

/// A window of `n` word ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ngram(Vec<usize>);

impl Ngram {
    pub fn new(ids: Vec<usize>) -> Self {
        Ngram(ids)
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn center(&self) -> usize {
        self.0.len() / 2
    }
}

/// N-grams of a fixed width, optionally weighted by counts.
#[derive(Debug, Clone, Default)]
pub struct NgramCorpus {
    n: usize,
    ngrams: Vec<Ngram>,
    cumulative: Option<Vec<u64>>,
}

impl NgramCorpus {
    /// Sliding windows of width `n` over each sentence; shorter sentences
    /// contribute nothing.
    pub fn from_sentences<S: AsRef<[usize]>>(sentences: &[S], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("n-gram width must be positive".into()));
        }
        let ngrams = sentences
            .iter()
            .flat_map(|s| s.as_ref().windows(n).map(|win| Ngram(win.to_vec())))
            .collect();
        Ok(NgramCorpus {
            n,
            ngrams,
            cumulative: None,
        })
    }

    /// N-gram types with counts; sampling is proportional to count.
    pub fn from_counts(n: usize, entries: Vec<(Ngram, u64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("n-gram width must be positive".into()));
        }
        let mut ngrams = Vec::with_capacity(entries.len());
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut total = 0u64;
        for (g, c) in entries {
            if g.len() != n {
                return Err(Error::Dimension {
                    what: "n-gram length",
                    expected: n,
                    got: g.len(),
                });
            }
            if c == 0 {
                continue;
            }
            total += c;
            ngrams.push(g);
            cumulative.push(total);
        }
        Ok(NgramCorpus {
            n,
            ngrams,
            cumulative: Some(cumulative),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ngrams(&self) -> &[Ngram] {
        &self.ngrams
    }

    pub fn len(&self) -> usize {
        self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ngrams.is_empty()
    }

    /// Every id is below `vocab_len`.
    pub fn validate(&self, vocab_len: usize) -> Result<()> {
        match self.ngrams.iter().flat_map(|g| g.ids()).find(|&&id| id >= vocab_len) {
            Some(&id) => Err(Error::Input(alloc::format!(
                "n-gram id {id} outside vocabulary of size {vocab_len}"
            ))),
            None => Ok(()),
        }
    }

    /// `count` draws with replacement.
    pub fn sample(&self, count: usize, rng: &mut Rng) -> Vec<Ngram> {
        if self.ngrams.is_empty() {
            return Vec::new();
        }
        (0..count)
            .map(|_| {
                let idx = match &self.cumulative {
                    None => rng.below(self.ngrams.len()),
                    Some(cum) => {
                        let total = *cum.last().unwrap_or(&1);
                        let r = rng.below(total as usize) as u64;
                        cum.partition_point(|&c| c <= r)
                    }
                };
                self.ngrams[idx].clone()
            })
            .collect()
    }
}

struct Forward {
    input: Vec<f64>,
    activation: Vec<f64>,
    score: f64,
}

fn forward(g: &Ngram, w: &EmbeddingTable, p: &NlmParams) -> Forward {
    let mut input = Vec::with_capacity(p.input_len());
    for &id in g.ids() {
        input.extend_from_slice(w.row(id));
    }
    let nd = p.input_len();
    let activation: Vec<f64> = (0..p.hidden)
        .map(|k| math::sigmoid(math::dot(&p.a[k * nd..(k + 1) * nd], &input) + p.b[k]))
        .collect();
    let score = math::dot(&p.u, &activation);
    Forward {
        input,
        activation,
        score,
    }
}

pub fn score_nlm(g: &Ngram, w: &EmbeddingTable, p: &NlmParams) -> Result<f64> {
    p.check(g, w)?;
    Ok(forward(g, w, p).score)
}

pub fn hinge_loss(s_pos: f64, s_neg: f64) -> f64 {
    (1.0 - s_pos + s_neg).max(0.0)
}

/// Copy of `g` with the center word replaced by a different uniform id.
pub fn corrupt_ngram(g: &Ngram, vocab_len: usize, rng: &mut Rng) -> Result<Ngram> {
    if vocab_len < 2 {
        return Err(Error::CannotCorrupt(vocab_len));
    }
    if g.is_empty() {
        return Err(Error::Input("cannot corrupt an empty n-gram".into()));
    }
    let mut ids = g.0.clone();
    let c = g.center();
    ids[c] = rng.below_excluding(vocab_len, ids[c]);
    Ok(Ngram(ids))
}

/// Gradient of the hinge loss for one `(positive, corrupted)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NlmGradients {
    pub loss: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u: Vec<f64>,
    /// Per touched word id.
    pub rows: RowGradients,
}

impl NlmGradients {
    fn zeros(p: &NlmParams) -> Self {
        NlmGradients {
            loss: 0.0,
            a: vec![0.0; p.a.len()],
            b: vec![0.0; p.hidden],
            u: vec![0.0; p.hidden],
            rows: RowGradients::new(p.dim),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).chain(&self.u).all(|&x| x == 0.0) && self.rows.is_zero()
    }
}

fn accumulate_score_gradient(
    g: &Ngram,
    fwd: &Forward,
    p: &NlmParams,
    sign: f64,
    grads: &mut NlmGradients,
) {
    let nd = p.input_len();
    let mut d_input = vec![0.0; nd];
    for k in 0..p.hidden {
        let act = fwd.activation[k];
        grads.u[k] += sign * act;
        let delta = sign * p.u[k] * act * (1.0 - act);
        grads.b[k] += delta;
        let row = &p.a[k * nd..(k + 1) * nd];
        math::axpy(delta, &fwd.input, &mut grads.a[k * nd..(k + 1) * nd]);
        math::axpy(delta, row, &mut d_input);
    }
    for (pos, &id) in g.ids().iter().enumerate() {
        math::axpy(1.0, &d_input[pos * p.dim..(pos + 1) * p.dim], grads.rows.entry(id));
    }
}

/// Exact gradient of `max(0, 1 - s(g) + s(gc))`. Every touched row is listed
/// in `rows` even when the hinge is flat, in which case all entries are zero.
pub fn nlm_gradients(
    g: &Ngram,
    gc: &Ngram,
    w: &EmbeddingTable,
    p: &NlmParams,
) -> Result<NlmGradients> {
    p.check(g, w)?;
    p.check(gc, w)?;
    let pos = forward(g, w, p);
    let neg = forward(gc, w, p);
    let mut grads = NlmGradients::zeros(p);
    for &id in g.ids().iter().chain(gc.ids()) {
        grads.rows.entry(id);
    }
    let margin = 1.0 - pos.score + neg.score;
    if margin > 0.0 {
        grads.loss = margin;
        accumulate_score_gradient(g, &pos, p, -1.0, &mut grads);
        accumulate_score_gradient(gc, &neg, p, 1.0, &mut grads);
    }
    Ok(grads)
}

/// One SGD pass over `batch`: a fresh corruption per n-gram, then a plain
/// gradient step on `w` and `p`. With a penalty, each touched shared row also
/// moves along `-(y + ρ(w - v))`. Returns the mean hinge loss.
pub fn nlm_sgd_step(
    batch: &[Ngram],
    w: &mut EmbeddingTable,
    p: &mut NlmParams,
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
    let vocab_len = w.rows();
    let mut total = 0.0;
    for g in batch {
        let gc = corrupt_ngram(g, vocab_len, rng)?;
        let mut grads = nlm_gradients(g, &gc, w, p)?;
        total += grads.loss;
        if let Some(pen) = penalty {
            for (id, row_grad) in grads.rows.iter_mut() {
                pen.accumulate_row_gradient(id, w.row(id), row_grad);
            }
        }
        math::axpy(-lr, &grads.a, &mut p.a);
        math::axpy(-lr, &grads.b, &mut p.b);
        math::axpy(-lr, &grads.u, &mut p.u);
        for (id, row_grad) in grads.rows.iter() {
            math::axpy(-lr, row_grad, w.row_mut(id));
        }
    }
    Ok(total / batch.len() as f64)
}
