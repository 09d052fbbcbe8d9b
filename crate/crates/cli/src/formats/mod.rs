//! Line-oriented text inputs: corpora, n-gram counts, word graphs, triples
//! and analogy questions.

pub mod analogy;
pub mod corpus;
pub mod graph;
pub mod triples;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers; `#` starts a comment line.
pub(crate) fn lines<'a, R: BufRead + 'a>(
    reader: R,
    path: &'a Path,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| match line {
            Err(e) => Some(Err(Error::io(path, e))),
            Ok(l) if l.trim().is_empty() || l.starts_with('#') => None,
            Ok(l) => Some(Ok((i + 1, l.trim_end_matches(['\r', '\n']).to_string()))),
        })
}
