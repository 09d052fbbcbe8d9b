use std::io::BufRead;
use std::path::Path;

use admm_embed_core::relational::WordGraph;
use admm_embed_core::Vocabulary;

use super::{lines, open};
use crate::error::{Error, Result};

/// A parsed graph file: the relational vocabulary (member words in order of
/// first appearance), synset names and the graph itself.
#[derive(Debug, Clone)]
pub struct GraphData {
    pub vocab: Vocabulary,
    pub synsets: Vocabulary,
    pub graph: WordGraph,
}

/// Records: `S<TAB>synset`, `E<TAB>synset<TAB>synset`, `M<TAB>word<TAB>synset`,
/// `D<TAB>depth`. Synsets must be declared before use.
pub fn parse_graph<R: BufRead>(reader: R, path: &Path) -> Result<GraphData> {
    let mut synsets = Vocabulary::new();
    let mut vocab = Vocabulary::new();
    let mut edges = Vec::new();
    let mut membership: Vec<Vec<usize>> = Vec::new();
    let mut depth = None;
    for line in lines(reader, path) {
        let (no, line) = line?;
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let synset = |name: &str| {
            synsets
                .id(name)
                .ok_or_else(|| Error::parse(path, no, format!("undeclared synset `{name}`")))
        };
        match fields.as_slice() {
            ["S", name] => {
                synsets.insert(name);
            }
            ["E", a, b] => edges.push((synset(a)?, synset(b)?)),
            ["M", word, s] => {
                let s = synset(s)?;
                let w = vocab.insert(word);
                if membership.len() <= w {
                    membership.resize(w + 1, Vec::new());
                }
                if !membership[w].contains(&s) {
                    membership[w].push(s);
                }
            }
            ["D", d] => {
                let d: usize = d
                    .parse()
                    .ok()
                    .filter(|&d| d > 0)
                    .ok_or_else(|| Error::parse(path, no, format!("depth must be a positive integer, got `{d}`")))?;
                depth = Some(d);
            }
            _ => return Err(Error::parse(path, no, format!("unrecognized record `{line}`"))),
        }
    }
    let graph = WordGraph::new(synsets.len(), &edges, membership, depth)?;
    Ok(GraphData { vocab, synsets, graph })
}

pub fn read_graph(path: &Path) -> Result<GraphData> {
    parse_graph(open(path)?, path)
}
