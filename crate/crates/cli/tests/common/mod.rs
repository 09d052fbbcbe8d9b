#![allow(dead_code)]

use std::path::{Path, PathBuf};

use admm_embed::config::{Mode, RunConfig};
use admm_embed::synth::{self, SynthConfig, SynthFiles};

/// A synthetic data set small enough for debug-build tests.
pub fn small_synth(dir: &Path) -> SynthFiles {
    let config = SynthConfig {
        vocab: 30,
        classes: 5,
        ngrams: 300,
        graph_nodes: 10,
        shortcuts: 3,
        entities: 40,
        relations: 2,
        clusters: 8,
        train: 100,
        dev: 40,
        test: 40,
        analogies: 6,
        ..SynthConfig::default()
    };
    synth::generate(&config, dir).unwrap()
}

pub fn run_config(mode: Mode, files: &SynthFiles, output: PathBuf) -> RunConfig {
    let mut config = RunConfig {
        mode,
        dim: 4,
        hidden: 3,
        context: 3,
        iterations: 3,
        ngrams_per_iter: 50,
        rel_items_per_iter: 20,
        output: Some(output),
        ..RunConfig::default()
    };
    if mode.uses_nlm() {
        config.corpus = Some(files.corpus.clone());
    }
    match mode.relational() {
        Some(admm_embed::config::RelationalKind::Gd) => config.graph = Some(files.graph.clone()),
        Some(_) => config.triples = Some(files.triples_train.clone()),
        None => {}
    }
    config
}
