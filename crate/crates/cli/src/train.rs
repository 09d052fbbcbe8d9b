//! The `train` command: load inputs, run ADMM, write the run directory.
//!
//! A finished run directory holds `config.txt`, `metrics.csv`, `checkpoint/`
//! and `train.log`. While training, `.lock` marks the directory as taken.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use admm_embed_core::admm::{
    self, AdmmState, DistributionalSide, MetricRow, RelationalSide, RunSummary,
};
use admm_embed_core::relational::Label;
use admm_embed_core::Vocabulary;

use crate::checkpoint;
use crate::config::{RelationalKind, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{corpus, graph, triples};
use crate::metrics::{self, MetricsWriter};

pub const LOCK_FILE: &str = ".lock";
pub const CONFIG_FILE: &str = "config.txt";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const LOG_FILE: &str = "train.log";

/// Training state built from the configured inputs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub state: AdmmState,
    /// Relation names by id, for triple objectives.
    pub relations: Option<Vocabulary>,
}

fn path_of<'a>(field: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::validation(field, "required by the mode"))
}

/// Reads inputs and initializes both sides. Does not touch the output directory.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let distributional = if config.mode.uses_nlm() {
        let data = match &config.ngram_counts {
            Some(p) => corpus::read_ngram_counts(p, config.context, config.vocab_cap)?,
            None => corpus::read_corpus(path_of("corpus", &config.corpus)?, config.context, config.vocab_cap)?,
        };
        log::info!(
            "corpus: {} words, {} distinct {}-grams",
            data.vocab.len(),
            data.corpus.len(),
            config.context
        );
        Some(DistributionalSide::new(
            data.vocab,
            data.corpus,
            config.dim,
            config.hidden,
            config.seed,
            config.init_scale,
        )?)
    } else {
        None
    };

    let mut relations = None;
    let relational = match config.mode.relational() {
        None => None,
        Some(RelationalKind::Gd) => {
            let path = path_of("graph", &config.graph)?;
            let data = graph::read_graph(path)?;
            log::info!(
                "graph: {} words, {} synsets",
                data.vocab.len(),
                data.synsets.len()
            );
            Some(RelationalSide::graph_distance(
                data.vocab,
                data.graph,
                config.wordsim,
                config.dim,
                config.seed,
                config.init_scale,
            )?)
        }
        Some(kind) => {
            let path = path_of("triples", &config.triples)?;
            let records: Vec<_> = triples::read_triples(path)?
                .into_iter()
                .filter(|t| t.label != Label::Negative)
                .collect();
            if records.is_empty() {
                return Err(Error::format(path, "no positive training triples"));
            }
            let (words, rels) = triples::registries(&records);
            let (encoded, _) = triples::encode(&records, &words, &rels);
            log::info!(
                "triples: {} positives, {} words, {} relations",
                encoded.len(),
                words.len(),
                rels.len()
            );
            let side = if kind == RelationalKind::TransE {
                RelationalSide::transe(words, encoded, rels.len(), config.dim, config.seed, config.init_scale)?
            } else {
                RelationalSide::ntn(
                    words,
                    encoded,
                    rels.len(),
                    config.dim,
                    config.hidden,
                    config.nonlinearity,
                    config.seed,
                    config.init_scale,
                )?
            };
            relations = Some(rels);
            Some(side)
        }
    };
    let state = AdmmState::new(distributional, relational)?;
    if state.is_joint() {
        log::info!("{} shared words couple w and v", state.joint.len());
    }
    Ok(Prepared { state, relations })
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(RunLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked { path }),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

struct RunLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl RunLog {
    fn create(path: PathBuf) -> Result<Self> {
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(RunLog {
            path,
            out: BufWriter::new(file),
        })
    }

    fn line(&mut self, message: &str) -> Result<()> {
        log::info!("{message}");
        writeln!(self.out, "{message}").map_err(|e| Error::io(&self.path, e))
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub summary: RunSummary,
    pub last: Option<MetricRow>,
    pub output: PathBuf,
}

/// Validates, trains and writes the run directory.
pub fn run_train(config: &RunConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let admm_config = config.admm();
    admm_config.validate()?;
    let prepared = prepare(config)?;

    let output = path_of("output", &config.output)?.to_path_buf();
    fs::create_dir_all(&output).map_err(|e| Error::io(&output, e))?;
    let _lock = RunLock::acquire(&output)?;
    train_into(config, prepared, &output)
}

fn train_into(config: &RunConfig, prepared: Prepared, output: &Path) -> Result<TrainOutcome> {
    let Prepared { mut state, relations } = prepared;
    let config_path = output.join(CONFIG_FILE);
    fs::write(&config_path, config.to_text()).map_err(|e| Error::io(&config_path, e))?;

    let mut log = RunLog::create(output.join(LOG_FILE))?;
    log.line(&format!(
        "mode {} dim {} seed {} iterations {}",
        config.mode, config.dim, config.seed, config.iterations
    ))?;
    let mut metrics_out = MetricsWriter::create(&output.join(METRICS_FILE))?;

    let mut failure = None;
    let mut last = None;
    let result = admm::run(
        &mut state,
        &config.admm(),
        config.iterations,
        config.early_stop(),
        |row| {
            last = Some(*row);
            if failure.is_some() {
                return;
            }
            let line = format!("iteration {}", metrics::format_row(row));
            if let Err(e) = metrics_out.write(row).and_then(|_| log.line(&line)) {
                failure = Some(e);
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let summary = match result {
        Ok(s) => s,
        Err(e) => {
            let _ = log.line(&format!("error: {e}"));
            let _ = log.finish();
            let _ = metrics_out.finish();
            return Err(e.into());
        }
    };
    metrics_out.finish()?;
    if summary.stopped_early {
        log.line(&format!(
            "stopped early after {} iterations: residual below {}",
            summary.iterations, config.early_stop_residual
        ))?;
    }
    checkpoint::save(
        &output.join(CHECKPOINT_DIR),
        &state,
        config.mode.as_str(),
        relations.as_ref(),
    )?;
    log.line("checkpoint written")?;
    log.finish()?;
    Ok(TrainOutcome {
        summary,
        last,
        output: output.to_path_buf(),
    })
}
