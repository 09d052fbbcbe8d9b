use std::io::BufRead;
use std::path::Path;

use admm_embed_core::relational::{Label, RelationTriple};
use admm_embed_core::Vocabulary;

use super::{lines, open};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TripleRecord {
    pub left: String,
    pub relation: String,
    pub right: String,
    pub label: Label,
}

/// `left<TAB>relation<TAB>right<TAB>label` with label `1` or `0`; a missing
/// label column leaves the triple unlabeled.
pub fn parse_triples<R: BufRead>(reader: R, path: &Path) -> Result<Vec<TripleRecord>> {
    let mut out = Vec::new();
    for line in lines(reader, path) {
        let (no, line) = line?;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let (l, r, rr, label) = match fields.as_slice() {
            [l, r, rr] => (l, r, rr, Label::Unlabeled),
            [l, r, rr, "1"] => (l, r, rr, Label::Positive),
            [l, r, rr, "0"] => (l, r, rr, Label::Negative),
            [_, _, _, other] => {
                return Err(Error::parse(path, no, format!("label must be 1 or 0, got `{other}`")));
            }
            _ => return Err(Error::parse(path, no, "expected 3 or 4 tab-separated fields")),
        };
        out.push(TripleRecord {
            left: l.to_string(),
            relation: r.to_string(),
            right: rr.to_string(),
            label,
        });
    }
    Ok(out)
}

pub fn read_triples(path: &Path) -> Result<Vec<TripleRecord>> {
    parse_triples(open(path)?, path)
}

pub fn write_triples<W: std::io::Write>(out: &mut W, records: &[TripleRecord]) -> std::io::Result<()> {
    for t in records {
        let label = match t.label {
            Label::Positive => "\t1",
            Label::Negative => "\t0",
            Label::Unlabeled => "",
        };
        writeln!(out, "{}\t{}\t{}{}", t.left, t.relation, t.right, label)?;
    }
    Ok(())
}

/// Word and relation registries grown from training records, in order of
/// first appearance.
pub fn registries(records: &[TripleRecord]) -> (Vocabulary, Vocabulary) {
    let mut words = Vocabulary::new();
    let mut relations = Vocabulary::new();
    for t in records {
        words.insert(&t.left);
        relations.insert(&t.relation);
        words.insert(&t.right);
    }
    (words, relations)
}

/// Encodes records against fixed registries. Records naming unknown words
/// or relations are returned separately.
pub fn encode(
    records: &[TripleRecord],
    words: &Vocabulary,
    relations: &Vocabulary,
) -> (Vec<RelationTriple>, Vec<TripleRecord>) {
    let mut encoded = Vec::with_capacity(records.len());
    let mut missing = Vec::new();
    for t in records {
        match (words.id(&t.left), relations.id(&t.relation), words.id(&t.right)) {
            (Some(l), Some(r), Some(rr)) => encoded.push(RelationTriple::new(l, r, rr, t.label)),
            _ => missing.push(t.clone()),
        }
    }
    (encoded, missing)
}
