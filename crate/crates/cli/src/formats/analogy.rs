use std::io::BufRead;
use std::path::Path;

use admm_embed_core::eval::AnalogyQuestion;
use admm_embed_core::Vocabulary;

use super::{lines, open};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gold {
    Most,
    Least,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalogyRecord {
    pub prototypes: Vec<(String, String)>,
    pub candidates: Vec<(String, String, Option<Gold>)>,
}

/// `Q` opens a question; `P<TAB>w1<TAB>w2` adds a prototype pair and
/// `C<TAB>w1<TAB>w2[<TAB>most|least]` a candidate to the open question.
pub fn parse_analogies<R: BufRead>(reader: R, path: &Path) -> Result<Vec<AnalogyRecord>> {
    let mut out: Vec<AnalogyRecord> = Vec::new();
    for line in lines(reader, path) {
        let (no, line) = line?;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields == ["Q"] {
            out.push(AnalogyRecord::default());
            continue;
        }
        let Some(q) = out.last_mut() else {
            return Err(Error::parse(path, no, "record before the first `Q`"));
        };
        match fields.as_slice() {
            ["P", a, b] => q.prototypes.push((a.to_string(), b.to_string())),
            ["C", a, b] => q.candidates.push((a.to_string(), b.to_string(), None)),
            ["C", a, b, tag] => {
                let gold = match *tag {
                    "most" => Gold::Most,
                    "least" => Gold::Least,
                    other => return Err(Error::parse(path, no, format!("unknown gold tag `{other}`"))),
                };
                q.candidates.push((a.to_string(), b.to_string(), Some(gold)));
            }
            _ => return Err(Error::parse(path, no, format!("unrecognized record `{line}`"))),
        }
    }
    for (i, q) in out.iter().enumerate() {
        if q.candidates.is_empty() || q.prototypes.is_empty() {
            return Err(Error::format(
                path,
                format!("question {} needs at least one prototype and one candidate", i + 1),
            ));
        }
    }
    Ok(out)
}

pub fn read_analogies(path: &Path) -> Result<Vec<AnalogyRecord>> {
    parse_analogies(open(path)?, path)
}

pub fn write_analogies<W: std::io::Write>(out: &mut W, records: &[AnalogyRecord]) -> std::io::Result<()> {
    for q in records {
        writeln!(out, "Q")?;
        for (a, b) in &q.prototypes {
            writeln!(out, "P\t{a}\t{b}")?;
        }
        for (a, b, gold) in &q.candidates {
            match gold {
                Some(Gold::Most) => writeln!(out, "C\t{a}\t{b}\tmost")?,
                Some(Gold::Least) => writeln!(out, "C\t{a}\t{b}\tleast")?,
                None => writeln!(out, "C\t{a}\t{b}")?,
            }
        }
    }
    Ok(())
}

/// Encodes questions against `vocab`; returns the distinct tokens that could
/// not be resolved when any are missing.
pub fn encode(records: &[AnalogyRecord], vocab: &Vocabulary) -> std::result::Result<Vec<AnalogyQuestion>, Vec<String>> {
    let mut missing: Vec<String> = Vec::new();
    let mut id = |w: &str| match vocab.id(w) {
        Some(i) => i,
        None => {
            if !missing.iter().any(|m| m == w) {
                missing.push(w.to_string());
            }
            0
        }
    };
    let mut questions = Vec::with_capacity(records.len());
    for r in records {
        let mut q = AnalogyQuestion::default();
        for (a, b) in &r.prototypes {
            q.prototypes.push((id(a), id(b)));
        }
        for (k, (a, b, gold)) in r.candidates.iter().enumerate() {
            q.candidates.push((id(a), id(b)));
            match gold {
                Some(Gold::Most) => q.gold_most = Some(k),
                Some(Gold::Least) => q.gold_least = Some(k),
                None => {}
            }
        }
        questions.push(q);
    }
    if missing.is_empty() {
        Ok(questions)
    } else {
        Err(missing)
    }
}
