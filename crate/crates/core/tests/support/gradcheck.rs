//! Finite-difference gradient oracle.
//!
//! Every loss is re-derived here from its formula on plain nested vectors,
//! without touching the crate's forward code, and differentiated by central
//! differences. The analytic gradients from the crate are packed into the
//! same flat layout and compared coordinate by coordinate.

#![allow(dead_code)]

use admm_embed_core::admm::{penalty_gradients, Penalty, PenaltyContext};
use admm_embed_core::distributional::{corrupt_ngram, nlm_gradients, Ngram, NlmParams};
use admm_embed_core::relational::{
    corrupt_triple, loss_gd, triple_hinge_gradients, GdParams, Label, Nonlinearity, NtnParams,
    RelationTriple, TransEParams, TripleScorer,
};
use admm_embed_core::{EmbeddingTable, JointVocabulary, Rng, Role, Vocabulary};

pub const EPS: f64 = 1e-6;
/// Denominator floor for the relative error of near-zero gradients.
const FLOOR: f64 = 1e-5;
/// Instances whose hinge margin or TransE residual sits this close to a kink
/// are resampled; central differences straddling a kink are meaningless.
const KINK: f64 = 1e-4;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

pub fn central_diff(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + EPS;
            let up = f(&probe);
            probe[i] = orig - EPS;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * EPS)
        })
        .collect()
}

fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| rel_err(a, n))
        .fold(0.0, f64::max)
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn uniform_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn words(prefix: &str, n: usize) -> Vocabulary {
    Vocabulary::from_words((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

/// A coupling where some words are shared; returns (joint, other table, duals, rho).
fn random_coupling(
    rng: &mut Rng,
    own: &Vocabulary,
    dim: usize,
    own_is_corpus: bool,
) -> (JointVocabulary, EmbeddingTable, EmbeddingTable, f64) {
    // other side: own words with even index, plus two extras
    let mut other_words: Vec<String> = own
        .words()
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 2 == 0)
        .map(|(_, w)| w.clone())
        .collect();
    other_words.push("extra0".into());
    other_words.push("extra1".into());
    let other = Vocabulary::from_words(other_words).unwrap();
    let joint = if own_is_corpus {
        JointVocabulary::build(own, &other)
    } else {
        JointVocabulary::build(&other, own)
    };
    let role = if own_is_corpus { Role::Relational } else { Role::Distributional };
    let other_table = EmbeddingTable::from_rows(role, dim, uniform_vec(rng, other.len() * dim)).unwrap();
    let y = EmbeddingTable::from_rows(Role::Dual, dim, uniform_vec(rng, joint.len() * dim)).unwrap();
    let rho = rng.uniform(0.0, 2.0);
    (joint, other_table, y, rho)
}

/// `Σ yᵀ(w - v) + ρ/2 Σ ‖w - v‖²` restricted to the given `(w row, v row, y row)` triples.
fn naive_penalty(terms: &[(Vec<f64>, Vec<f64>, Vec<f64>)], rho: f64) -> f64 {
    terms
        .iter()
        .map(|(w, v, y)| {
            (0..w.len())
                .map(|i| y[i] * (w[i] - v[i]) + 0.5 * rho * (w[i] - v[i]).powi(2))
                .sum::<f64>()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Language model

fn naive_nlm_score(rows: &[Vec<f64>], ids: &[usize], a: &[Vec<f64>], b: &[f64], u: &[f64]) -> f64 {
    let x: Vec<f64> = ids.iter().flat_map(|&i| rows[i].clone()).collect();
    (0..u.len())
        .map(|k| {
            let z: f64 = a[k].iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + b[k];
            u[k] * sigmoid(z)
        })
        .sum()
}

/// Max relative error of `∂(L_NLM + L_P)` for one random instance, or `None`
/// when the instance sits on the hinge kink.
pub fn check_nlm(seed: u64) -> Option<f64> {
    let mut rng = Rng::new(seed);
    let dim = 1 + rng.below(4);
    let n = 1 + rng.below(3);
    let h = 1 + rng.below(3);
    let vocab = words("c", 6);
    let w = EmbeddingTable::from_rows(Role::Distributional, dim, uniform_vec(&mut rng, 6 * dim)).unwrap();
    let mut p = NlmParams::zeros(n, dim, h);
    p.a = uniform_vec(&mut rng, h * n * dim);
    p.b = uniform_vec(&mut rng, h);
    p.u = (0..h).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let g = Ngram::new((0..n).map(|_| rng.below(6)).collect());
    let gc = corrupt_ngram(&g, 6, &mut rng).unwrap();
    let coupled = rng.coin();
    let (joint, v, y, rho) = random_coupling(&mut rng, &vocab, dim, true);

    let mut grads = nlm_gradients(&g, &gc, &w, &p).unwrap();
    if coupled {
        let pen = Penalty::for_distributional(&joint, &v, &y, rho);
        for (id, row_grad) in grads.rows.iter_mut() {
            pen.accumulate_row_gradient(id, w.row(id), row_grad);
        }
    }
    let touched: Vec<usize> = grads.rows.ids().to_vec();

    // flat layout: touched rows, A, b, u
    let mut x: Vec<f64> = touched.iter().flat_map(|&i| w.row(i).to_vec()).collect();
    x.extend(&p.a);
    x.extend(&p.b);
    x.extend(&p.u);
    let mut analytic: Vec<f64> = touched.iter().flat_map(|&i| grads.rows.get(i).unwrap().to_vec()).collect();
    analytic.extend(&grads.a);
    analytic.extend(&grads.b);
    analytic.extend(&grads.u);

    let base_rows: Vec<Vec<f64>> = (0..6).map(|i| w.row(i).to_vec()).collect();
    let nd = n * dim;
    let loss = |x: &[f64]| -> f64 {
        let mut rows = base_rows.clone();
        for (k, &id) in touched.iter().enumerate() {
            rows[id] = x[k * dim..(k + 1) * dim].to_vec();
        }
        let off = touched.len() * dim;
        let a: Vec<Vec<f64>> = (0..h).map(|k| x[off + k * nd..off + (k + 1) * nd].to_vec()).collect();
        let b = &x[off + h * nd..off + h * nd + h];
        let u = &x[off + h * nd + h..off + h * nd + 2 * h];
        let s_pos = naive_nlm_score(&rows, g.ids(), &a, b, u);
        let s_neg = naive_nlm_score(&rows, gc.ids(), &a, b, u);
        let mut total = (1.0 - s_pos + s_neg).max(0.0);
        if coupled {
            let terms: Vec<_> = joint
                .pairs()
                .iter()
                .enumerate()
                .map(|(k, &(c, r))| (rows[c].clone(), v.row(r).to_vec(), y.row(k).to_vec()))
                .collect();
            total += naive_penalty(&terms, rho);
        }
        total
    };
    let s_pos = naive_nlm_score(&base_rows, g.ids(), &to_rows(&p.a, nd), &p.b, &p.u);
    let s_neg = naive_nlm_score(&base_rows, gc.ids(), &to_rows(&p.a, nd), &p.b, &p.u);
    if (1.0 - s_pos + s_neg).abs() < KINK {
        return None;
    }
    Some(max_rel_err(&analytic, &central_diff(&loss, &x)))
}

fn to_rows(flat: &[f64], width: usize) -> Vec<Vec<f64>> {
    flat.chunks(width).map(<[f64]>::to_vec).collect()
}

// ---------------------------------------------------------------------------
// Graph distance

pub fn check_gd(seed: u64) -> Option<f64> {
    let mut rng = Rng::new(seed);
    let dim = 1 + rng.below(4);
    let vocab = words("r", 5);
    let v = EmbeddingTable::from_rows(Role::Relational, dim, uniform_vec(&mut rng, 5 * dim)).unwrap();
    let i = rng.below(5);
    let j = rng.below_excluding(5, i);
    let params = GdParams {
        a: rng.uniform(-2.0, 2.0),
        b: rng.uniform(-1.0, 1.0),
    };
    let sim = rng.uniform(0.0, 1.0);
    let coupled = rng.coin();
    let (joint, w, y, rho) = random_coupling(&mut rng, &vocab, dim, false);
    if v.row(i).iter().map(|x| x * x).sum::<f64>() < 1e-4 || v.row(j).iter().map(|x| x * x).sum::<f64>() < 1e-4 {
        return None;
    }

    let g = loss_gd(i, j, &v, &params, sim).unwrap();
    let mut gi = g.vi.clone();
    let mut gj = g.vj.clone();
    if coupled {
        let pen = Penalty::for_relational(&joint, &w, &y, rho);
        pen.accumulate_row_gradient(i, v.row(i), &mut gi);
        pen.accumulate_row_gradient(j, v.row(j), &mut gj);
    }
    let mut x = v.row(i).to_vec();
    x.extend(v.row(j));
    x.extend([params.a, params.b]);
    let mut analytic = gi;
    analytic.extend(gj);
    analytic.extend([g.a, g.b]);

    let base: Vec<Vec<f64>> = (0..5).map(|r| v.row(r).to_vec()).collect();
    let loss = |x: &[f64]| -> f64 {
        let mut rows = base.clone();
        rows[i] = x[..dim].to_vec();
        rows[j] = x[dim..2 * dim].to_vec();
        let (a, b) = (x[2 * dim], x[2 * dim + 1]);
        let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(p, q)| p * q).sum();
        let ni = rows[i].iter().map(|p| p * p).sum::<f64>().sqrt();
        let nj = rows[j].iter().map(|p| p * p).sum::<f64>().sqrt();
        let mut total = (dot / (ni * nj) - (a * sim + b)).powi(2);
        if coupled {
            let terms: Vec<_> = joint
                .pairs()
                .iter()
                .enumerate()
                .map(|(k, &(c, r))| (w.row(c).to_vec(), rows[r].clone(), y.row(k).to_vec()))
                .collect();
            total += naive_penalty(&terms, rho);
        }
        total
    };
    Some(max_rel_err(&analytic, &central_diff(&loss, &x)))
}

// ---------------------------------------------------------------------------
// Triple models

struct TripleInstance {
    rows: usize,
    v: EmbeddingTable,
    pos: RelationTriple,
    neg: RelationTriple,
}

fn triple_instance(rng: &mut Rng, dim: usize, relations: usize) -> TripleInstance {
    let rows = 6;
    let v = EmbeddingTable::from_rows(Role::Relational, dim, uniform_vec(rng, rows * dim)).unwrap();
    let pos = RelationTriple::new(rng.below(rows), rng.below(relations), rng.below(rows), Label::Positive);
    let neg = corrupt_triple(&pos, rows, rng).unwrap();
    TripleInstance { rows, v, pos, neg }
}

/// Scores a triple from rows, relation block and shared block.
type NaiveScore<'a> = &'a dyn Fn(&[Vec<f64>], &[f64], &[f64], &RelationTriple) -> f64;

/// Shared driver: `flat` packs touched rows then relation block then shared
/// block; `naive` evaluates the hinge from such a vector.
fn compare_triple<M: TripleScorer>(
    inst: &TripleInstance,
    model: &M,
    relation_block: &[f64],
    shared_block: &[f64],
    naive_score: NaiveScore<'_>,
) -> Option<f64> {
    let dim = inst.v.dim();
    let grads = triple_hinge_gradients(&inst.pos, &inst.neg, &inst.v, model).unwrap();
    let touched: Vec<usize> = grads.rows.ids().to_vec();
    let base: Vec<Vec<f64>> = (0..inst.rows).map(|r| inst.v.row(r).to_vec()).collect();
    let margin = 1.0 - naive_score(&base, relation_block, shared_block, &inst.pos)
        + naive_score(&base, relation_block, shared_block, &inst.neg);
    if margin.abs() < KINK {
        return None;
    }
    let mut x: Vec<f64> = touched.iter().flat_map(|&i| inst.v.row(i).to_vec()).collect();
    x.extend(relation_block);
    x.extend(shared_block);
    let mut analytic: Vec<f64> = touched.iter().flat_map(|&i| grads.rows.get(i).unwrap().to_vec()).collect();
    analytic.extend(&grads.relation_grad);
    analytic.extend(&grads.shared_grad);
    let (rl, sl) = (relation_block.len(), shared_block.len());
    let loss = |x: &[f64]| -> f64 {
        let mut rows = base.clone();
        for (k, &id) in touched.iter().enumerate() {
            rows[id] = x[k * dim..(k + 1) * dim].to_vec();
        }
        let off = touched.len() * dim;
        let rel = &x[off..off + rl];
        let shared = &x[off + rl..off + rl + sl];
        (1.0 - naive_score(&rows, rel, shared, &inst.pos) + naive_score(&rows, rel, shared, &inst.neg)).max(0.0)
    };
    Some(max_rel_err(&analytic, &central_diff(&loss, &x)))
}

pub fn check_transe(seed: u64) -> Option<f64> {
    let mut rng = Rng::new(seed);
    let dim = 1 + rng.below(4);
    let relations = 2;
    let inst = triple_instance(&mut rng, dim, relations);
    let p = TransEParams::from_vectors(dim, uniform_vec(&mut rng, relations * dim)).unwrap();
    let naive = |rows: &[Vec<f64>], rel: &[f64], _: &[f64], t: &RelationTriple| -> f64 {
        -(0..dim)
            .map(|i| (rows[t.left][i] + rel[i] - rows[t.right][i]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let base: Vec<Vec<f64>> = (0..inst.rows).map(|r| inst.v.row(r).to_vec()).collect();
    let r = p.vector(inst.pos.relation).to_vec();
    for t in [&inst.pos, &inst.neg] {
        if naive(&base, &r, &[], t).abs() < KINK {
            return None;
        }
    }
    compare_triple(&inst, &p, &r, &[], &naive)
}

pub fn check_ntn(seed: u64) -> Option<f64> {
    let mut rng = Rng::new(seed);
    let dim = 1 + rng.below(4);
    let h = 1 + rng.below(3);
    let relations = 2;
    let nonlinearity = if rng.coin() { Nonlinearity::Sigmoid } else { Nonlinearity::Tanh };
    let inst = triple_instance(&mut rng, dim, relations);
    let block = h * dim * dim + h * 2 * dim + h;
    let blocks = (0..relations * block).map(|_| rng.uniform(-1.5, 1.5)).collect();
    let u = (0..h).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let p = NtnParams::from_parts(dim, h, blocks, u, nonlinearity).unwrap();
    let r = inst.pos.relation;
    let rel = p.blocks()[r * block..(r + 1) * block].to_vec();
    // W[k][i][j], V[k][c], b[k] in the documented block layout
    let naive = move |rows: &[Vec<f64>], rel: &[f64], shared: &[f64], t: &RelationTriple| -> f64 {
        let (l, rr) = (&rows[t.left], &rows[t.right]);
        let wv = h * dim * dim;
        (0..h)
            .map(|k| {
                let mut z = rel[wv + h * 2 * dim + k];
                for i in 0..dim {
                    for j in 0..dim {
                        z += l[i] * rel[(k * dim + i) * dim + j] * rr[j];
                    }
                }
                for c in 0..dim {
                    z += rel[wv + k * 2 * dim + c] * l[c];
                    z += rel[wv + k * 2 * dim + dim + c] * rr[c];
                }
                let f = match nonlinearity {
                    Nonlinearity::Sigmoid => sigmoid(z),
                    Nonlinearity::Tanh => z.tanh(),
                };
                shared[k] * f
            })
            .sum()
    };
    compare_triple(&inst, &p, &rel, p.u(), &naive)
}

// ---------------------------------------------------------------------------
// Penalty

pub fn check_penalty(seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let dim = 1 + rng.below(4);
    let corpus = words("s", 5);
    let w = EmbeddingTable::from_rows(Role::Distributional, dim, uniform_vec(&mut rng, 5 * dim)).unwrap();
    let (joint, v, y, rho) = random_coupling(&mut rng, &corpus, dim, true);
    let ctx = PenaltyContext::new(&joint, &w, &v, &y, rho).unwrap();
    let g = penalty_gradients(&ctx);

    let mut x = w.as_slice().to_vec();
    x.extend(v.as_slice());
    let mut analytic = g.w.as_slice().to_vec();
    analytic.extend(g.v.as_slice());
    let wl = w.as_slice().len();
    let loss = |x: &[f64]| -> f64 {
        let terms: Vec<_> = joint
            .pairs()
            .iter()
            .enumerate()
            .map(|(k, &(c, r))| {
                (
                    x[c * dim..(c + 1) * dim].to_vec(),
                    x[wl + r * dim..wl + (r + 1) * dim].to_vec(),
                    y.row(k).to_vec(),
                )
            })
            .collect();
        naive_penalty(&terms, rho)
    };
    max_rel_err(&analytic, &central_diff(&loss, &x))
}

/// Runs `check` over seeds until `instances` non-kink instances were seen;
/// returns the worst error.
pub fn worst_over(instances: usize, first_seed: u64, check: fn(u64) -> Option<f64>) -> f64 {
    let mut seen = 0;
    let mut worst = 0.0f64;
    let mut seed = first_seed;
    while seen < instances {
        if let Some(e) = check(seed) {
            worst = worst.max(e);
            seen += 1;
        }
        seed += 1;
        assert!(seed - first_seed < 10 * instances as u64, "too many kink instances");
    }
    worst
}
