//! ADMM coupling of the distributional table `w` and the relational table `v`.
//!
//! For every word `i` known to both sides the penalty
//! `yᵢᵀ(wᵢ - vᵢ) + ρ/2 ‖wᵢ - vᵢ‖²` is added to both objectives. One iteration
//! runs an SGD pass on the language model (with `v`, `y` fixed), an SGD pass
//! on the relational objective (with `w`, `y` fixed), then the dual ascent
//! step `yᵢ += ρ(wᵢ - vᵢ)`.

use alloc::vec::Vec;

use crate::distributional::{nlm_sgd_step, NgramCorpus, NlmParams};
use crate::error::{Error, Result};
use crate::math;
use crate::relational::{
    relational_sgd_step, GdParams, Nonlinearity, NtnParams, RelationTriple, RelationalBatch,
    RelationalObjective, SimilarityScale, TransEParams, WordGraph, WordPair, Label,
};
use crate::rng::{stream, Rng};
use crate::table::{EmbeddingTable, Role};
use crate::vocab::{JointVocabulary, Vocabulary};

const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Distributional,
    Relational,
}

/// The coupling as seen by one side's SGD step: the opposing table and the
/// duals are read-only, the own table is passed row by row.
#[derive(Debug, Clone, Copy)]
pub struct Penalty<'a> {
    joint: &'a JointVocabulary,
    side: Side,
    other: &'a EmbeddingTable,
    duals: &'a EmbeddingTable,
    rho: f64,
}

impl<'a> Penalty<'a> {
    /// Coupling for the `w` update; `v` and `y` are held fixed.
    pub fn for_distributional(
        joint: &'a JointVocabulary,
        v: &'a EmbeddingTable,
        y: &'a EmbeddingTable,
        rho: f64,
    ) -> Self {
        Penalty {
            joint,
            side: Side::Distributional,
            other: v,
            duals: y,
            rho,
        }
    }

    /// Coupling for the `v` update; `w` and `y` are held fixed.
    pub fn for_relational(
        joint: &'a JointVocabulary,
        w: &'a EmbeddingTable,
        y: &'a EmbeddingTable,
        rho: f64,
    ) -> Self {
        Penalty {
            joint,
            side: Side::Relational,
            other: w,
            duals: y,
            rho,
        }
    }

    /// Adds `∂L_P/∂row` for row `id` of the own table; non-shared rows get
    /// nothing.
    pub fn accumulate_row_gradient(&self, id: usize, own: &[f64], grad: &mut [f64]) {
        match self.side {
            Side::Distributional => {
                if let Some(k) = self.joint.shared_of_corpus(id) {
                    let v = self.other.row(self.joint.pairs()[k].1);
                    let y = self.duals.row(k);
                    for (((g, &yi), &wi), &vi) in grad.iter_mut().zip(y).zip(own).zip(v) {
                        *g += yi + self.rho * (wi - vi);
                    }
                }
            }
            Side::Relational => {
                if let Some(k) = self.joint.shared_of_relational(id) {
                    let w = self.other.row(self.joint.pairs()[k].0);
                    let y = self.duals.row(k);
                    for (((g, &yi), &vi), &wi) in grad.iter_mut().zip(y).zip(own).zip(w) {
                        *g -= yi + self.rho * (wi - vi);
                    }
                }
            }
        }
    }
}

/// All three tables plus `ρ`, for evaluating the penalty and its diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyContext<'a> {
    pub joint: &'a JointVocabulary,
    pub w: &'a EmbeddingTable,
    pub v: &'a EmbeddingTable,
    pub y: &'a EmbeddingTable,
    pub rho: f64,
}

impl<'a> PenaltyContext<'a> {
    pub fn new(
        joint: &'a JointVocabulary,
        w: &'a EmbeddingTable,
        v: &'a EmbeddingTable,
        y: &'a EmbeddingTable,
        rho: f64,
    ) -> Result<Self> {
        check_coupling(joint, w, v, y)?;
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Config("rho must be finite and non-negative".into()));
        }
        Ok(PenaltyContext { joint, w, v, y, rho })
    }

    fn residuals(&self) -> impl Iterator<Item = (usize, &'a [f64], &'a [f64])> + '_ {
        self.joint
            .pairs()
            .iter()
            .enumerate()
            .map(|(k, &(c, r))| (k, self.w.row(c), self.v.row(r)))
    }
}

fn check_coupling(
    joint: &JointVocabulary,
    w: &EmbeddingTable,
    v: &EmbeddingTable,
    y: &EmbeddingTable,
) -> Result<()> {
    let dim = w.dim();
    for (what, got) in [("relational dim", v.dim()), ("dual dim", y.dim())] {
        if got != dim {
            return Err(Error::Dimension {
                what,
                expected: dim,
                got,
            });
        }
    }
    let shapes = [
        ("dual rows", joint.len(), y.rows()),
        ("distributional rows", joint.corpus_len(), w.rows()),
        ("relational rows", joint.relational_len(), v.rows()),
    ];
    for (what, expected, got) in shapes {
        if expected != got {
            return Err(Error::Dimension { what, expected, got });
        }
    }
    Ok(())
}

/// `Σᵢ yᵢᵀ(wᵢ - vᵢ) + ρ/2 Σᵢ ‖wᵢ - vᵢ‖²` over shared words.
pub fn penalty_loss(ctx: &PenaltyContext<'_>) -> f64 {
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for (k, w, v) in ctx.residuals() {
        for ((&yi, &wi), &vi) in ctx.y.row(k).iter().zip(w).zip(v) {
            let r = wi - vi;
            linear += yi * r;
            quadratic += r * r;
        }
    }
    linear + 0.5 * ctx.rho * quadratic
}

/// Full gradients of the penalty, shaped like `w` and `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGradients {
    pub w: EmbeddingTable,
    pub v: EmbeddingTable,
}

/// `∂/∂wᵢ = yᵢ + ρ(wᵢ - vᵢ)`, `∂/∂vᵢ = -∂/∂wᵢ`; zero off the shared set.
pub fn penalty_gradients(ctx: &PenaltyContext<'_>) -> PenaltyGradients {
    let dim = ctx.w.dim();
    let mut gw = EmbeddingTable::zeros(Role::Distributional, ctx.w.rows(), dim);
    let mut gv = EmbeddingTable::zeros(Role::Relational, ctx.v.rows(), dim);
    for (k, &(c, r)) in ctx.joint.pairs().iter().enumerate() {
        let (w, v, y) = (ctx.w.row(c), ctx.v.row(r), ctx.y.row(k));
        for i in 0..dim {
            let g = y[i] + ctx.rho * (w[i] - v[i]);
            gw.row_mut(c)[i] = g;
            gv.row_mut(r)[i] = -g;
        }
    }
    PenaltyGradients { w: gw, v: gv }
}

/// Dual ascent: `yᵢ += ρ(wᵢ - vᵢ)` for every shared word.
pub fn dual_update(
    joint: &JointVocabulary,
    w: &EmbeddingTable,
    v: &EmbeddingTable,
    y: &mut EmbeddingTable,
    rho: f64,
) -> Result<()> {
    check_coupling(joint, w, v, y)?;
    for (k, &(c, r)) in joint.pairs().iter().enumerate() {
        let (wr, vr) = (w.row(c), v.row(r));
        for ((yi, &wi), &vi) in y.row_mut(k).iter_mut().zip(wr).zip(vr) {
            *yi += rho * (wi - vi);
        }
    }
    Ok(())
}

/// How the per-word residual is scaled before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualScale {
    /// `‖wᵢ - vᵢ‖ / max(‖wᵢ‖, ‖vᵢ‖, ε)`
    #[default]
    Relative,
    /// `‖wᵢ - vᵢ‖`
    Absolute,
}

/// Mean of the scaled residual norms; 0 when nothing is shared.
pub fn mean_residual(ctx: &PenaltyContext<'_>, scale: ResidualScale) -> f64 {
    if ctx.joint.is_empty() {
        return 0.0;
    }
    let total: f64 = ctx
        .residuals()
        .map(|(_, w, v)| {
            let diff: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
            let n = math::norm(&diff);
            match scale {
                ResidualScale::Relative => n / math::norm(w).max(math::norm(v)).max(RESIDUAL_EPS),
                ResidualScale::Absolute => n,
            }
        })
        .sum();
    total / ctx.joint.len() as f64
}

// ---------------------------------------------------------------------------
// Training state

/// The language-model side: corpus, `w`, `θ` and its own random stream.
#[derive(Debug, Clone)]
pub struct DistributionalSide {
    pub vocab: Vocabulary,
    pub corpus: NgramCorpus,
    pub w: EmbeddingTable,
    pub params: NlmParams,
    rng: Rng,
}

impl DistributionalSide {
    pub fn new(
        vocab: Vocabulary,
        corpus: NgramCorpus,
        dim: usize,
        hidden: usize,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        corpus.validate(vocab.len())?;
        if vocab.len() < 2 {
            return Err(Error::CannotCorrupt(vocab.len()));
        }
        let w = EmbeddingTable::init(Role::Distributional, &vocab, dim, seed, init_scale)?;
        let mut prng = Rng::with_stream(seed, stream::NLM_PARAMETERS);
        let params = NlmParams::init(corpus.n(), dim, hidden, &mut prng)?;
        Ok(DistributionalSide {
            vocab,
            corpus,
            w,
            params,
            rng: Rng::with_stream(seed, stream::DISTRIBUTIONAL),
        })
    }
}

/// Training data for the relational side.
#[derive(Debug, Clone)]
pub enum RelationalData {
    Graph {
        graph: WordGraph,
        /// Word ids that own at least one synset.
        words: Vec<usize>,
        scale: SimilarityScale,
    },
    /// Positive training triples.
    Triples(Vec<RelationTriple>),
}

/// The relational side: data, `v`, `φ` and its own random stream.
#[derive(Debug, Clone)]
pub struct RelationalSide {
    pub vocab: Vocabulary,
    pub data: RelationalData,
    pub v: EmbeddingTable,
    pub objective: RelationalObjective,
    rng: Rng,
}

impl RelationalSide {
    pub fn graph_distance(
        vocab: Vocabulary,
        graph: WordGraph,
        scale: SimilarityScale,
        dim: usize,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        if graph.words() > vocab.len() {
            return Err(Error::Input("graph membership exceeds the vocabulary".into()));
        }
        let words = graph.words_with_synsets();
        if words.len() < 2 {
            return Err(Error::Input("graph distance needs at least two words with synsets".into()));
        }
        let v = EmbeddingTable::init(Role::Relational, &vocab, dim, seed, init_scale)?;
        Ok(RelationalSide {
            vocab,
            data: RelationalData::Graph { graph, words, scale },
            v,
            objective: RelationalObjective::GraphDistance(GdParams::default()),
            rng: Rng::with_stream(seed, stream::RELATIONAL),
        })
    }

    pub fn transe(
        vocab: Vocabulary,
        triples: Vec<RelationTriple>,
        relations: usize,
        dim: usize,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        let v = EmbeddingTable::init(Role::Relational, &vocab, dim, seed, init_scale)?;
        let mut prng = Rng::with_stream(seed, stream::RELATIONAL_PARAMETERS);
        let objective = RelationalObjective::TransE(TransEParams::init(relations, dim, init_scale, &mut prng));
        Self::with_triples(vocab, triples, v, objective, seed)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn ntn(
        vocab: Vocabulary,
        triples: Vec<RelationTriple>,
        relations: usize,
        dim: usize,
        hidden: usize,
        nonlinearity: Nonlinearity,
        seed: u64,
        init_scale: f64,
    ) -> Result<Self> {
        let v = EmbeddingTable::init(Role::Relational, &vocab, dim, seed, init_scale)?;
        let mut prng = Rng::with_stream(seed, stream::RELATIONAL_PARAMETERS);
        let objective =
            RelationalObjective::Ntn(NtnParams::init(relations, dim, hidden, nonlinearity, &mut prng)?);
        Self::with_triples(vocab, triples, v, objective, seed)
    }

    fn with_triples(
        vocab: Vocabulary,
        triples: Vec<RelationTriple>,
        v: EmbeddingTable,
        objective: RelationalObjective,
        seed: u64,
    ) -> Result<Self> {
        if vocab.len() < 2 {
            return Err(Error::CannotCorrupt(vocab.len()));
        }
        let relations = objective.scorer().map_or(0, |s| s.num_relations());
        let positives: Vec<RelationTriple> =
            triples.into_iter().filter(|t| t.label != Label::Negative).collect();
        for t in &positives {
            if t.relation >= relations {
                return Err(Error::UnknownRelation(t.relation));
            }
            if t.left >= vocab.len() || t.right >= vocab.len() {
                return Err(Error::Input("triple word id outside the vocabulary".into()));
            }
        }
        Ok(RelationalSide {
            vocab,
            data: RelationalData::Triples(positives),
            v,
            objective,
            rng: Rng::with_stream(seed, stream::RELATIONAL),
        })
    }

    fn sample(&mut self, items: usize, partners: usize) -> Result<RelationalBatch> {
        match &self.data {
            RelationalData::Graph { graph, words, scale } => {
                let mut pairs = Vec::with_capacity(items * partners);
                for _ in 0..items {
                    let pick = self.rng.below(words.len());
                    let i = words[pick];
                    let dist = graph.word_distances(i)?;
                    for _ in 0..partners {
                        let j = words[self.rng.below_excluding(words.len(), pick)];
                        let sim = graph.similarity_from(&dist, j, *scale)?;
                        pairs.push(WordPair { i, j, sim });
                    }
                }
                Ok(RelationalBatch::Pairs(pairs))
            }
            RelationalData::Triples(triples) => {
                let mut order = triples.clone();
                self.rng.shuffle(&mut order);
                if items > 0 {
                    order.truncate(items);
                }
                Ok(RelationalBatch::Triples(order))
            }
        }
    }
}

/// Step sizes and sample sizes of one ADMM iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub lr_distributional: f64,
    pub lr_relational: f64,
    /// N-grams drawn with replacement per iteration.
    pub ngrams_per_iteration: usize,
    /// Graph distance: sampled words. Triples: training triples presented,
    /// 0 meaning the whole shuffled training set.
    pub relational_items_per_iteration: usize,
    /// Partners paired with each sampled word under graph distance.
    pub gd_partners: usize,
    pub residual_scale: ResidualScale,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 0.05,
            lr_distributional: 0.01,
            lr_relational: 0.01,
            ngrams_per_iteration: 100_000,
            relational_items_per_iteration: 100_000,
            gd_partners: 5,
            residual_scale: ResidualScale::Relative,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Config("rho must be finite and non-negative".into()));
        }
        for (name, lr) in [
            ("lr_distributional", self.lr_distributional),
            ("lr_relational", self.lr_relational),
        ] {
            if !(lr >= 0.0 && lr.is_finite()) {
                return Err(Error::Config(alloc::format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// One row of training diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub iteration: usize,
    pub loss_nlm: f64,
    pub loss_rel: f64,
    pub loss_penalty: f64,
    pub mean_residual: f64,
}

impl MetricRow {
    /// `L_NLM + L_REL`, the quantity tracked as the joint training loss.
    pub fn joint_loss(&self) -> f64 {
        self.loss_nlm + self.loss_rel
    }
}

/// Everything a run carries between iterations.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub distributional: Option<DistributionalSide>,
    pub relational: Option<RelationalSide>,
    pub joint: JointVocabulary,
    /// Present only when both sides are.
    pub duals: Option<EmbeddingTable>,
    iteration: usize,
    history: Vec<MetricRow>,
}

impl AdmmState {
    /// Couples whichever sides are present. With both, the shared words are
    /// the intersection of the two vocabularies.
    pub fn new(
        distributional: Option<DistributionalSide>,
        relational: Option<RelationalSide>,
    ) -> Result<Self> {
        if distributional.is_none() && relational.is_none() {
            return Err(Error::Config("at least one objective is required".into()));
        }
        let (joint, duals) = match (&distributional, &relational) {
            (Some(d), Some(r)) => {
                if d.w.dim() != r.v.dim() {
                    return Err(Error::Dimension {
                        what: "relational dim",
                        expected: d.w.dim(),
                        got: r.v.dim(),
                    });
                }
                let joint = JointVocabulary::build(&d.vocab, &r.vocab);
                let y = EmbeddingTable::zeros(Role::Dual, joint.len(), d.w.dim());
                (joint, Some(y))
            }
            (Some(d), None) => (JointVocabulary::empty(d.vocab.len(), 0), None),
            (None, Some(r)) => (JointVocabulary::empty(0, r.vocab.len()), None),
            (None, None) => unreachable!(),
        };
        Ok(AdmmState {
            distributional,
            relational,
            joint,
            duals,
            iteration: 0,
            history: Vec::new(),
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn history(&self) -> &[MetricRow] {
        &self.history
    }

    pub fn is_joint(&self) -> bool {
        self.duals.is_some()
    }

    pub fn penalty_context(&self, rho: f64) -> Option<PenaltyContext<'_>> {
        match (&self.distributional, &self.relational, &self.duals) {
            (Some(d), Some(r), Some(y)) => PenaltyContext::new(&self.joint, &d.w, &r.v, y, rho).ok(),
            _ => None,
        }
    }

    /// Shared-word rows of `w` and `v`, for reporting the joint vocabulary.
    pub fn shared_words(&self) -> Vec<&str> {
        match &self.distributional {
            Some(d) => self
                .joint
                .pairs()
                .iter()
                .filter_map(|&(c, _)| d.vocab.word(c))
                .collect(),
            None => Vec::new(),
        }
    }

    fn non_finite(&self, step: &'static str) -> Option<Error> {
        let iteration = self.iteration + 1;
        let bad = |table| Some(Error::NonFinite { step, table, iteration });
        if let Some(d) = &self.distributional {
            if !d.w.is_finite() {
                return bad("w");
            }
            if !d.params.is_finite() {
                return bad("theta");
            }
        }
        if let Some(r) = &self.relational {
            if !r.v.is_finite() {
                return bad("v");
            }
            if !r.objective.is_finite() {
                return bad("phi");
            }
        }
        if let Some(y) = &self.duals {
            if !y.is_finite() {
                return bad("y");
            }
        }
        None
    }
}

/// Runs the three ADMM steps once and appends a metric row.
pub fn admm_iteration(state: &mut AdmmState, config: &AdmmConfig) -> Result<MetricRow> {
    config.validate()?;
    let rho = config.rho;

    // (1) w, θ with v, y fixed
    let mut loss_nlm = 0.0;
    if let Some(d) = state.distributional.as_mut() {
        let batch = d.corpus.sample(config.ngrams_per_iteration, &mut d.rng);
        let penalty = match (&state.relational, &state.duals) {
            (Some(r), Some(y)) => Some(Penalty::for_distributional(&state.joint, &r.v, y, rho)),
            _ => None,
        };
        loss_nlm = nlm_sgd_step(
            &batch,
            &mut d.w,
            &mut d.params,
            config.lr_distributional,
            penalty.as_ref(),
            &mut d.rng,
        )?;
    }
    if let Some(e) = state.non_finite("step 1 (distributional SGD)") {
        return Err(e);
    }

    // (2) v, φ with w, y fixed
    let mut loss_rel = 0.0;
    if let Some(r) = state.relational.as_mut() {
        let batch = r.sample(config.relational_items_per_iteration, config.gd_partners)?;
        let penalty = match (&state.distributional, &state.duals) {
            (Some(d), Some(y)) => Some(Penalty::for_relational(&state.joint, &d.w, y, rho)),
            _ => None,
        };
        loss_rel = relational_sgd_step(
            &batch,
            &mut r.v,
            &mut r.objective,
            config.lr_relational,
            penalty.as_ref(),
            &mut r.rng,
        )?;
    }
    if let Some(e) = state.non_finite("step 2 (relational SGD)") {
        return Err(e);
    }

    // (3) y += ρ(w - v)
    if let (Some(d), Some(r), Some(y)) = (&state.distributional, &state.relational, state.duals.as_mut()) {
        dual_update(&state.joint, &d.w, &r.v, y, rho)?;
    }
    if let Some(e) = state.non_finite("step 3 (dual update)") {
        return Err(e);
    }

    let (loss_penalty, residual) = match state.penalty_context(rho) {
        Some(ctx) => (penalty_loss(&ctx), mean_residual(&ctx, config.residual_scale)),
        None => (0.0, 0.0),
    };
    state.iteration += 1;
    let row = MetricRow {
        iteration: state.iteration,
        loss_nlm,
        loss_rel,
        loss_penalty,
        mean_residual: residual,
    };
    state.history.push(row);
    Ok(row)
}

/// Stop once the mean residual stays below `threshold` for `patience`
/// consecutive iterations. Only applies to joint runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStop {
    pub threshold: f64,
    pub patience: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop {
            threshold: 1e-3,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub iterations: usize,
    pub stopped_early: bool,
}

/// Iterates up to `iterations` times, reporting each metric row to `observe`.
pub fn run<F>(
    state: &mut AdmmState,
    config: &AdmmConfig,
    iterations: usize,
    early_stop: Option<EarlyStop>,
    mut observe: F,
) -> Result<RunSummary>
where
    F: FnMut(&MetricRow),
{
    config.validate()?;
    let mut below = 0usize;
    for done in 0..iterations {
        let row = admm_iteration(state, config)?;
        observe(&row);
        if let (Some(stop), true) = (early_stop, state.is_joint() && !state.joint.is_empty()) {
            below = if row.mean_residual < stop.threshold { below + 1 } else { 0 };
            if stop.patience > 0 && below >= stop.patience {
                return Ok(RunSummary {
                    iterations: done + 1,
                    stopped_early: true,
                });
            }
        }
    }
    Ok(RunSummary {
        iterations,
        stopped_early: false,
    })
}
