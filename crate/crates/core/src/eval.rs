//! Evaluators: triple classification with per-relation thresholds, MaxDiff
//! analogy questions, and nearest neighbours.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::relational::{Label, RelationTriple, TripleScorer};
use crate::table::{EmbeddingTable, Role};
use crate::vocab::{JointVocabulary, Vocabulary};

/// Per-relation decision thresholds: a triple is predicted correct when its
/// score is strictly above the threshold of its relation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThresholdModel {
    pub thresholds: BTreeMap<usize, f64>,
    /// Relations whose dev data held a single class; they get `-∞`.
    pub degenerate: Vec<usize>,
}

impl ThresholdModel {
    pub fn get(&self, relation: usize) -> Option<f64> {
        self.thresholds.get(&relation).copied()
    }
}

fn labeled_scores(
    triples: &[RelationTriple],
    scorer: &dyn TripleScorer,
    v: &EmbeddingTable,
) -> Result<BTreeMap<usize, Vec<(f64, bool)>>> {
    let mut by_relation: BTreeMap<usize, Vec<(f64, bool)>> = BTreeMap::new();
    for t in triples {
        let positive = match t.label {
            Label::Positive => true,
            Label::Negative => false,
            Label::Unlabeled => continue,
        };
        by_relation
            .entry(t.relation)
            .or_default()
            .push((scorer.score(t, v)?, positive));
    }
    Ok(by_relation)
}

/// Best threshold for one relation's `(score, is_positive)` items.
///
/// Candidates are `-∞`, the midpoints between consecutive distinct scores and
/// `+∞`; the first (smallest) candidate with the highest accuracy wins.
/// Returns `(threshold, correct count)`.
pub fn best_threshold(items: &[(f64, bool)]) -> (f64, usize) {
    let mut sorted: Vec<(f64, bool)> = items.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Threshold -∞: everything predicted positive.
    let mut correct = sorted.iter().filter(|x| x.1).count() as i64;
    let mut best = (f64::NEG_INFINITY, correct);
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i].0;
        // Moving the threshold past `value` flips every item with that score.
        while i < sorted.len() && sorted[i].0 == value {
            correct += if sorted[i].1 { -1 } else { 1 };
            i += 1;
        }
        let threshold = match sorted.get(i) {
            Some(next) => {
                // Adjacent floats have no representable midpoint; `value`
                // itself separates them under the strict comparison.
                let mid = value + (next.0 - value) / 2.0;
                if mid > value && mid < next.0 {
                    mid
                } else {
                    value
                }
            }
            None => f64::INFINITY,
        };
        if correct > best.1 {
            best = (threshold, correct);
        }
    }
    (best.0, best.1 as usize)
}

/// Fits one threshold per relation on labeled dev triples.
pub fn fit_thresholds(
    dev: &[RelationTriple],
    scorer: &dyn TripleScorer,
    v: &EmbeddingTable,
) -> Result<ThresholdModel> {
    let mut model = ThresholdModel::default();
    for (relation, items) in labeled_scores(dev, scorer, v)? {
        let positives = items.iter().filter(|x| x.1).count();
        if positives == 0 || positives == items.len() {
            model.thresholds.insert(relation, f64::NEG_INFINITY);
            model.degenerate.push(relation);
            continue;
        }
        model.thresholds.insert(relation, best_threshold(&items).0);
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KbReport {
    pub overall: Tally,
    pub per_relation: BTreeMap<usize, Tally>,
    /// Test triples whose relation has no threshold; each counts as an error.
    pub unseen: usize,
}

impl KbReport {
    pub fn accuracy(&self) -> f64 {
        self.overall.accuracy()
    }
}

/// Fraction of labeled test triples whose thresholded prediction matches the
/// label.
pub fn kb_completion_accuracy(
    test: &[RelationTriple],
    scorer: &dyn TripleScorer,
    v: &EmbeddingTable,
    thresholds: &ThresholdModel,
) -> Result<KbReport> {
    let mut report = KbReport::default();
    for t in test {
        let positive = match t.label {
            Label::Positive => true,
            Label::Negative => false,
            Label::Unlabeled => {
                return Err(Error::Input("test triples must be labeled".into()));
            }
        };
        let tally = report.per_relation.entry(t.relation).or_default();
        tally.total += 1;
        report.overall.total += 1;
        let threshold = match thresholds.get(t.relation) {
            Some(th) if t.relation < scorer.num_relations() => th,
            _ => {
                report.unseen += 1;
                continue;
            }
        };
        let predicted = scorer.score(t, v)? > threshold;
        if predicted == positive {
            tally.correct += 1;
            report.overall.correct += 1;
        }
    }
    Ok(report)
}

/// A MaxDiff question: prototype pairs define a relation, candidates are
/// ranked by how well they express it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub prototypes: Vec<(usize, usize)>,
    pub candidates: Vec<(usize, usize)>,
    pub gold_most: Option<usize>,
    pub gold_least: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaxDiffPrediction {
    pub most: usize,
    pub least: usize,
    /// Candidates whose difference vector had zero norm.
    pub flagged: Vec<usize>,
}

fn difference(table: &EmbeddingTable, (a, b): (usize, usize)) -> Vec<f64> {
    table.row(b).iter().zip(table.row(a)).map(|(x, y)| x - y).collect()
}

/// Picks the candidates most and least similar (by cosine of pair offsets) to
/// the mean prototype offset. Ties go to the lowest index.
pub fn analogy_maxdiff(q: &AnalogyQuestion, table: &EmbeddingTable) -> Result<MaxDiffPrediction> {
    if q.candidates.is_empty() {
        return Err(Error::Input("analogy question without candidates".into()));
    }
    if q.prototypes.is_empty() {
        return Err(Error::Input("analogy question without prototype pairs".into()));
    }
    let rows = table.rows();
    let pairs = q.prototypes.iter().chain(&q.candidates);
    if pairs.flat_map(|&(a, b)| [a, b]).any(|id| id >= rows) {
        return Err(Error::Input("analogy word id outside table".into()));
    }
    let mut proto = alloc::vec![0.0; table.dim()];
    for &pair in &q.prototypes {
        math::axpy(1.0 / q.prototypes.len() as f64, &difference(table, pair), &mut proto);
    }
    if math::norm(&proto) == 0.0 {
        return Err(Error::ZeroNorm("analogy prototype"));
    }
    let mut pred = MaxDiffPrediction::default();
    let mut best = (f64::NEG_INFINITY, None);
    let mut worst = (f64::INFINITY, None);
    for (idx, &pair) in q.candidates.iter().enumerate() {
        let (for_most, for_least) = match math::cosine_similarity(&proto, &difference(table, pair)) {
            Ok(c) => (c, c),
            Err(Error::ZeroNorm(_)) => {
                pred.flagged.push(idx);
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Err(e) => return Err(e),
        };
        if best.1.is_none() || for_most > best.0 {
            best = (for_most, Some(idx));
        }
        if worst.1.is_none() || for_least < worst.0 {
            worst = (for_least, Some(idx));
        }
    }
    pred.most = best.1.unwrap_or(0);
    pred.least = worst.1.unwrap_or(0);
    Ok(pred)
}

/// Mean over questions of the fraction of `{most, least}` picks matching gold.
pub fn maxdiff_accuracy(questions: &[AnalogyQuestion], table: &EmbeddingTable) -> Result<f64> {
    if questions.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for q in questions {
        let (Some(most), Some(least)) = (q.gold_most, q.gold_least) else {
            return Err(Error::Input("analogy question lacks gold most/least labels".into()));
        };
        let p = analogy_maxdiff(q, table)?;
        total += (usize::from(p.most == most) + usize::from(p.least == least)) as f64 / 2.0;
    }
    Ok(total / questions.len() as f64)
}

/// Top-`k` words by cosine to `word`, excluding the word itself. Zero rows
/// are skipped. Ties keep vocabulary order.
pub fn nearest_neighbors(
    word: &str,
    vocab: &Vocabulary,
    table: &EmbeddingTable,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    let query = vocab
        .id(word)
        .ok_or_else(|| Error::Input(alloc::format!("`{word}` is not in the vocabulary")))?;
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let q = table.row(query);
    if math::norm(q) == 0.0 {
        return Err(Error::ZeroNorm("nearest-neighbour query"));
    }
    let mut scored: Vec<(usize, f64)> = (0..table.rows())
        .filter(|&i| i != query)
        .filter_map(|i| math::cosine_similarity(q, table.row(i)).ok().map(|c| (i, c)))
        .collect();
    // Stable sort keeps index order among equal cosines.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, c)| (String::from(vocab.word(i).unwrap_or_default()), c))
        .collect())
}

/// `w` with each shared word's row replaced by the mean of its `w` and `v`
/// rows.
pub fn averaged_table(
    joint: &JointVocabulary,
    w: &EmbeddingTable,
    v: &EmbeddingTable,
) -> Result<EmbeddingTable> {
    if w.dim() != v.dim() {
        return Err(Error::Dimension {
            what: "averaged table",
            expected: w.dim(),
            got: v.dim(),
        });
    }
    let mut out = EmbeddingTable::from_rows(Role::Distributional, w.dim(), w.as_slice().to_vec())?;
    for &(c, r) in joint.pairs() {
        for (o, x) in out.row_mut(c).iter_mut().zip(v.row(r)) {
            *o = 0.5 * (*o + x);
        }
    }
    Ok(out)
}
