//! Small in-memory training problems built without any file IO.

#![allow(dead_code)]

use admm_embed_core::admm::{AdmmConfig, AdmmState, DistributionalSide, RelationalSide, ResidualScale};
use admm_embed_core::distributional::NgramCorpus;
use admm_embed_core::relational::{Label, RelationTriple, SimilarityScale, WordGraph};
use admm_embed_core::{Rng, Vocabulary, UNK};

pub const DIM: usize = 4;

pub fn word(i: usize) -> String {
    format!("x{i}")
}

/// Corpus vocabulary `<unk>, x0..x{words-1}` with random 3-gram sentences.
pub fn distributional(words: usize, seed: u64) -> DistributionalSide {
    let vocab = Vocabulary::from_words(std::iter::once(UNK.to_string()).chain((0..words).map(word))).unwrap();
    let mut rng = Rng::new(seed ^ 0xd15);
    let sentences: Vec<Vec<usize>> = (0..20)
        .map(|_| (0..8).map(|_| 1 + rng.below(words)).collect())
        .collect();
    let corpus = NgramCorpus::from_sentences(&sentences, 3).unwrap();
    DistributionalSide::new(vocab, corpus, DIM, 3, seed, 0.1).unwrap()
}

/// Relational vocabulary `x{offset}..` over a path of synsets with one
/// shortcut; word `i` sits on synset `i % synsets`.
pub fn graph_side(words: usize, offset: usize, seed: u64) -> RelationalSide {
    let vocab = Vocabulary::from_words((offset..offset + words).map(word)).unwrap();
    let synsets = 6;
    let mut edges: Vec<(usize, usize)> = (1..synsets).map(|s| (s - 1, s)).collect();
    edges.push((0, 4));
    let membership = (0..words).map(|i| vec![i % synsets]).collect();
    let graph = WordGraph::new(synsets, &edges, membership, None).unwrap();
    RelationalSide::graph_distance(vocab, graph, SimilarityScale::Linear, DIM, seed, 0.1).unwrap()
}

pub fn transe_side(words: usize, seed: u64) -> RelationalSide {
    let vocab = Vocabulary::from_words((0..words).map(word)).unwrap();
    let triples = (0..words)
        .map(|i| RelationTriple::new(i, i % 2, (i + 1) % words, Label::Positive))
        .collect();
    RelationalSide::transe(vocab, triples, 2, DIM, seed, 0.1).unwrap()
}

pub fn config(rho: f64) -> AdmmConfig {
    AdmmConfig {
        rho,
        lr_distributional: 0.05,
        lr_relational: 0.05,
        ngrams_per_iteration: 40,
        relational_items_per_iteration: 10,
        gd_partners: 3,
        residual_scale: ResidualScale::Relative,
    }
}

pub fn joint_gd(seed: u64) -> AdmmState {
    AdmmState::new(Some(distributional(10, seed)), Some(graph_side(8, 2, seed))).unwrap()
}
