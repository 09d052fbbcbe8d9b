//! The `eval` command: knowledge-base completion, MaxDiff analogies and
//! nearest neighbours over a saved checkpoint.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use admm_embed_core::eval::{self, KbReport};
use admm_embed_core::relational::{Label, TripleScorer};
use admm_embed_core::{EmbeddingTable, JointVocabulary, Vocabulary};

use crate::checkpoint::{self, Checkpoint};
use crate::error::{Error, Result};
use crate::formats::{analogy, triples};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Kb,
    Analogy,
    Neighbors,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kb" => Ok(Task::Kb),
            "analogy" => Ok(Task::Analogy),
            "neighbors" => Ok(Task::Neighbors),
            _ => Err(format!("unknown task `{s}` (expected kb, analogy or neighbors)")),
        }
    }
}

/// Which embedding table feeds the analogy and neighbour tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableChoice {
    #[default]
    W,
    V,
    /// `w` with shared words replaced by the mean of their `w` and `v` rows.
    Mean,
}

impl FromStr for TableChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "w" => Ok(TableChoice::W),
            "v" => Ok(TableChoice::V),
            "mean" => Ok(TableChoice::Mean),
            _ => Err(format!("unknown table `{s}` (expected w, v or mean)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub checkpoint: PathBuf,
    pub task: Task,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub analogy: Option<PathBuf>,
    pub table: TableChoice,
    pub word: Option<String>,
    pub k: usize,
    /// Directory for report files; nothing is written when absent.
    pub output: Option<PathBuf>,
}

impl EvalConfig {
    pub fn new(checkpoint: PathBuf, task: Task) -> Self {
        EvalConfig {
            checkpoint,
            task,
            dev: None,
            test: None,
            analogy: None,
            table: TableChoice::W,
            word: None,
            k: 10,
            output: None,
        }
    }
}

/// What an evaluation produced: a printable summary and report files.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub summary: String,
    /// Headline number: accuracy for kb and analogy, neighbour count otherwise.
    pub score: f64,
    pub text: String,
    pub csv: String,
}

fn required<'a>(field: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::validation(field, "required by this task"))
}

fn mismatch(what: &str, missing: usize, examples: &[String]) -> Error {
    let shown: Vec<&str> = examples.iter().take(5).map(String::as_str).collect();
    Error::Mismatch(format!(
        "{missing} {what} tokens are not in the checkpoint vocabulary (e.g. {})",
        shown.join(", ")
    ))
}

pub fn run_eval(config: &EvalConfig) -> Result<EvalOutcome> {
    let ckpt = checkpoint::load(&config.checkpoint)?;
    let outcome = match config.task {
        Task::Kb => kb(config, &ckpt)?,
        Task::Analogy => analogies(config, &ckpt)?,
        Task::Neighbors => neighbors(config, &ckpt)?,
    };
    if let Some(dir) = &config.output {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = match config.task {
            Task::Kb => "kb",
            Task::Analogy => "analogy",
            Task::Neighbors => "neighbors",
        };
        for (ext, body) in [("txt", &outcome.text), ("csv", &outcome.csv)] {
            let path = dir.join(format!("{stem}_report.{ext}"));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(outcome)
}

fn load_labeled(
    field: &str,
    path: &Path,
    words: &Vocabulary,
    relations: &Vocabulary,
) -> Result<Vec<admm_embed_core::relational::RelationTriple>> {
    let records = triples::read_triples(path)?;
    if let Some(t) = records.iter().find(|t| t.label == Label::Unlabeled) {
        return Err(Error::validation(
            field,
            format!("every triple needs a 0/1 label ({} {} {})", t.left, t.relation, t.right),
        ));
    }
    let (encoded, missing) = triples::encode(&records, words, relations);
    if !missing.is_empty() {
        let mut tokens: Vec<String> = Vec::new();
        for t in &missing {
            for (tok, reg) in [(&t.left, words), (&t.relation, relations), (&t.right, words)] {
                if reg.id(tok).is_none() && !tokens.contains(tok) {
                    tokens.push(tok.clone());
                }
            }
        }
        return Err(mismatch(field, tokens.len(), &tokens));
    }
    Ok(encoded)
}

fn kb(config: &EvalConfig, ckpt: &Checkpoint) -> Result<EvalOutcome> {
    let dev_path = required("dev", &config.dev)?;
    let test_path = required("test", &config.test)?;
    let (Some((words, v)), Some(objective), Some(relations)) = (&ckpt.v, &ckpt.objective, &ckpt.relations)
    else {
        return Err(Error::validation("checkpoint", "kb needs a checkpoint trained with transe or ntn"));
    };
    let scorer: &dyn TripleScorer = objective
        .scorer()
        .ok_or_else(|| Error::validation("checkpoint", "kb needs a triple objective, not graph distance"))?;

    let dev = load_labeled("dev", dev_path, words, relations)?;
    let test = load_labeled("test", test_path, words, relations)?;
    let thresholds = eval::fit_thresholds(&dev, scorer, v)?;
    for r in &thresholds.degenerate {
        log::warn!(
            "relation {} has single-class dev data; threshold set to -inf",
            relations.word(*r).unwrap_or("?")
        );
    }
    let report = eval::kb_completion_accuracy(&test, scorer, v, &thresholds)?;
    let (text, csv) = kb_report(&report, relations, &thresholds);
    Ok(EvalOutcome {
        summary: format!(
            "kb accuracy {:.4} ({}/{})",
            report.accuracy(),
            report.overall.correct,
            report.overall.total
        ),
        score: report.accuracy(),
        text,
        csv,
    })
}

fn kb_report(report: &KbReport, relations: &Vocabulary, thresholds: &eval::ThresholdModel) -> (String, String) {
    let mut text = String::new();
    let mut csv = String::from("relation,threshold,correct,total,accuracy\n");
    let _ = writeln!(
        text,
        "overall accuracy {:.4} ({}/{})",
        report.accuracy(),
        report.overall.correct,
        report.overall.total
    );
    if report.unseen > 0 {
        let _ = writeln!(text, "{} test triples had no threshold and count as errors", report.unseen);
    }
    for (r, tally) in &report.per_relation {
        let name = relations.word(*r).unwrap_or("?");
        let th = thresholds.get(*r).map_or_else(|| "none".to_string(), |t| t.to_string());
        let _ = writeln!(
            text,
            "{name}\tthreshold {th}\taccuracy {:.4} ({}/{})",
            tally.accuracy(),
            tally.correct,
            tally.total
        );
        let _ = writeln!(csv, "{name},{th},{},{},{}", tally.correct, tally.total, tally.accuracy());
    }
    let _ = writeln!(
        csv,
        "all,,{},{},{}",
        report.overall.correct,
        report.overall.total,
        report.accuracy()
    );
    (text, csv)
}

fn table(choice: TableChoice, ckpt: &Checkpoint) -> Result<(Vocabulary, EmbeddingTable)> {
    let missing = |name: &str| Error::validation("table", format!("checkpoint has no `{name}` table"));
    match choice {
        TableChoice::W => ckpt.w.clone().ok_or_else(|| missing("w")),
        TableChoice::V => ckpt.v.clone().ok_or_else(|| missing("v")),
        TableChoice::Mean => {
            let ((wv, w), (vv, v)) = (
                ckpt.w.as_ref().ok_or_else(|| missing("w"))?,
                ckpt.v.as_ref().ok_or_else(|| missing("v"))?,
            );
            let joint = JointVocabulary::build(wv, vv);
            Ok((wv.clone(), eval::averaged_table(&joint, w, v)?))
        }
    }
}

fn analogies(config: &EvalConfig, ckpt: &Checkpoint) -> Result<EvalOutcome> {
    let path = required("analogy", &config.analogy)?;
    let records = analogy::read_analogies(path)?;
    let (vocab, table) = table(config.table, ckpt)?;
    let questions = analogy::encode(&records, &vocab).map_err(|m| mismatch("analogy", m.len(), &m))?;
    let accuracy = eval::maxdiff_accuracy(&questions, &table)?;

    let mut csv = String::from("question,most,least,gold_most,gold_least,flagged\n");
    for (i, q) in questions.iter().enumerate() {
        let p = eval::analogy_maxdiff(q, &table)?;
        let opt = |x: Option<usize>| x.map_or_else(String::new, |x| x.to_string());
        let flagged: Vec<String> = p.flagged.iter().map(usize::to_string).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            i + 1,
            p.most,
            p.least,
            opt(q.gold_most),
            opt(q.gold_least),
            flagged.join(" ")
        );
    }
    let summary = format!("maxdiff accuracy {accuracy:.4} over {} questions", questions.len());
    Ok(EvalOutcome {
        text: format!("{summary}\n"),
        summary,
        score: accuracy,
        csv,
    })
}

fn neighbors(config: &EvalConfig, ckpt: &Checkpoint) -> Result<EvalOutcome> {
    let word = config
        .word
        .as_deref()
        .ok_or_else(|| Error::validation("word", "required by the neighbors task"))?;
    if config.k == 0 {
        return Err(Error::validation("k", "must be at least 1"));
    }
    let (vocab, table) = table(config.table, ckpt)?;
    if vocab.id(word).is_none() {
        return Err(mismatch("query", 1, &[word.to_string()]));
    }
    let found = eval::nearest_neighbors(word, &vocab, &table, config.k)?;
    let mut text = String::new();
    let mut csv = String::from("rank,word,cosine\n");
    for (rank, (w, c)) in found.iter().enumerate() {
        let _ = writeln!(text, "{}\t{w}\t{c:.6}", rank + 1);
        let _ = writeln!(csv, "{},{w},{c}", rank + 1);
    }
    Ok(EvalOutcome {
        summary: format!("{} neighbours of {word}", found.len()),
        score: found.len() as f64,
        text,
        csv,
    })
}
