//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! Keys are the long flag names of `admm-embed train`. Later assignments win,
//! so a config file followed by flags behaves like one longer file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use admm_embed_core::admm::{AdmmConfig, EarlyStop, ResidualScale};
use admm_embed_core::relational::{Nonlinearity, SimilarityScale};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nlm,
    Gd,
    TransE,
    Ntn,
    NlmGd,
    NlmTransE,
    NlmNtn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationalKind {
    Gd,
    TransE,
    Ntn,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Nlm,
        Mode::Gd,
        Mode::TransE,
        Mode::Ntn,
        Mode::NlmGd,
        Mode::NlmTransE,
        Mode::NlmNtn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Nlm => "nlm",
            Mode::Gd => "gd",
            Mode::TransE => "transe",
            Mode::Ntn => "ntn",
            Mode::NlmGd => "nlm+gd",
            Mode::NlmTransE => "nlm+transe",
            Mode::NlmNtn => "nlm+ntn",
        }
    }

    pub fn uses_nlm(self) -> bool {
        matches!(self, Mode::Nlm | Mode::NlmGd | Mode::NlmTransE | Mode::NlmNtn)
    }

    pub fn relational(self) -> Option<RelationalKind> {
        match self {
            Mode::Nlm => None,
            Mode::Gd | Mode::NlmGd => Some(RelationalKind::Gd),
            Mode::TransE | Mode::NlmTransE => Some(RelationalKind::TransE),
            Mode::Ntn | Mode::NlmNtn => Some(RelationalKind::Ntn),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected one of nlm, gd, transe, ntn, nlm+gd, nlm+transe, nlm+ntn)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub dim: usize,
    pub hidden: usize,
    pub context: usize,
    pub rho: f64,
    pub lr_nlm: f64,
    pub lr_rel: f64,
    pub iterations: usize,
    pub ngrams_per_iter: usize,
    /// 0 picks the default: 100k sampled words for graph distance, the whole
    /// training set for triple objectives.
    pub rel_items_per_iter: usize,
    pub gd_partners: usize,
    pub seed: u64,
    /// 0 keeps the whole corpus vocabulary.
    pub vocab_cap: usize,
    pub init_scale: f64,
    pub nonlinearity: Nonlinearity,
    pub wordsim: SimilarityScale,
    pub residual: ResidualScale,
    pub early_stop_residual: f64,
    /// 0 disables early stopping.
    pub early_stop_patience: usize,
    pub corpus: Option<PathBuf>,
    pub ngram_counts: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub triples: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::NlmGd,
            dim: 50,
            hidden: 50,
            context: 5,
            rho: 0.05,
            lr_nlm: 0.01,
            lr_rel: 0.01,
            iterations: 300,
            ngrams_per_iter: 100_000,
            rel_items_per_iter: 0,
            gd_partners: 5,
            seed: 1,
            vocab_cap: 50_000,
            init_scale: 0.01,
            nonlinearity: Nonlinearity::Sigmoid,
            wordsim: SimilarityScale::Linear,
            residual: ResidualScale::Relative,
            early_stop_residual: 1e-3,
            early_stop_patience: 10,
            corpus: None,
            ngram_counts: None,
            graph: None,
            triples: None,
            output: None,
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: &[&str] = &[
    "mode",
    "dim",
    "hidden",
    "context",
    "rho",
    "lr-nlm",
    "lr-rel",
    "iterations",
    "ngrams-per-iter",
    "rel-items-per-iter",
    "gd-partners",
    "seed",
    "vocab-cap",
    "init-scale",
    "nonlinearity",
    "wordsim",
    "residual",
    "early-stop-residual",
    "early-stop-patience",
    "corpus",
    "ngram-counts",
    "graph",
    "triples",
    "output",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::validation(key, format!("cannot parse `{value}`")))
}

fn path_value(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Assigns one key; unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "mode" => self.mode = value.parse().map_err(|m| Error::validation(key, m))?,
            "dim" => self.dim = parse_num(key, value)?,
            "hidden" => self.hidden = parse_num(key, value)?,
            "context" => self.context = parse_num(key, value)?,
            "rho" => self.rho = parse_num(key, value)?,
            "lr-nlm" => self.lr_nlm = parse_num(key, value)?,
            "lr-rel" => self.lr_rel = parse_num(key, value)?,
            "iterations" => self.iterations = parse_num(key, value)?,
            "ngrams-per-iter" => self.ngrams_per_iter = parse_num(key, value)?,
            "rel-items-per-iter" => self.rel_items_per_iter = parse_num(key, value)?,
            "gd-partners" => self.gd_partners = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "vocab-cap" => self.vocab_cap = parse_num(key, value)?,
            "init-scale" => self.init_scale = parse_num(key, value)?,
            "nonlinearity" => {
                self.nonlinearity = match value {
                    "sigmoid" => Nonlinearity::Sigmoid,
                    "tanh" => Nonlinearity::Tanh,
                    _ => return Err(Error::validation(key, "expected sigmoid or tanh")),
                }
            }
            "wordsim" => {
                self.wordsim = match value {
                    "linear" => SimilarityScale::Linear,
                    "log" => SimilarityScale::Log,
                    _ => return Err(Error::validation(key, "expected linear or log")),
                }
            }
            "residual" => {
                self.residual = match value {
                    "relative" => ResidualScale::Relative,
                    "absolute" => ResidualScale::Absolute,
                    _ => return Err(Error::validation(key, "expected relative or absolute")),
                }
            }
            "early-stop-residual" => self.early_stop_residual = parse_num(key, value)?,
            "early-stop-patience" => self.early_stop_patience = parse_num(key, value)?,
            "corpus" => self.corpus = path_value(value),
            "ngram-counts" => self.ngram_counts = path_value(value),
            "graph" => self.graph = path_value(value),
            "triples" => self.triples = path_value(value),
            "output" => self.output = path_value(value),
            _ => return Err(Error::validation(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "mode" => self.mode.to_string(),
            "dim" => self.dim.to_string(),
            "hidden" => self.hidden.to_string(),
            "context" => self.context.to_string(),
            "rho" => self.rho.to_string(),
            "lr-nlm" => self.lr_nlm.to_string(),
            "lr-rel" => self.lr_rel.to_string(),
            "iterations" => self.iterations.to_string(),
            "ngrams-per-iter" => self.ngrams_per_iter.to_string(),
            "rel-items-per-iter" => self.rel_items_per_iter.to_string(),
            "gd-partners" => self.gd_partners.to_string(),
            "seed" => self.seed.to_string(),
            "vocab-cap" => self.vocab_cap.to_string(),
            "init-scale" => self.init_scale.to_string(),
            "nonlinearity" => match self.nonlinearity {
                Nonlinearity::Sigmoid => "sigmoid".into(),
                Nonlinearity::Tanh => "tanh".into(),
            },
            "wordsim" => match self.wordsim {
                SimilarityScale::Linear => "linear".into(),
                SimilarityScale::Log => "log".into(),
            },
            "residual" => match self.residual {
                ResidualScale::Relative => "relative".into(),
                ResidualScale::Absolute => "absolute".into(),
            },
            "early-stop-residual" => self.early_stop_residual.to_string(),
            "early-stop-patience" => self.early_stop_patience.to_string(),
            "corpus" => show_path(&self.corpus),
            "ngram-counts" => show_path(&self.ngram_counts),
            "graph" => show_path(&self.graph),
            "triples" => show_path(&self.triples),
            "output" => show_path(&self.output),
            _ => return None,
        })
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::default();
        config.apply_text(&text, path)?;
        Ok(config)
    }

    /// Canonical text form: every key once, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap_or_default()))
            .collect()
    }

    /// Checks values and the inputs the mode needs. Paths must exist.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("hidden", self.hidden),
            ("context", self.context),
        ];
        for (key, value) in positive {
            if value == 0 {
                return Err(Error::validation(key, "must be positive"));
            }
        }
        if self.mode.uses_nlm() && self.ngrams_per_iter == 0 {
            return Err(Error::validation("ngrams-per-iter", "must be positive"));
        }
        if self.mode.relational() == Some(RelationalKind::Gd) && self.gd_partners == 0 {
            return Err(Error::validation("gd-partners", "must be positive"));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::validation("rho", "must be finite and non-negative"));
        }
        for (key, lr) in [("lr-nlm", self.lr_nlm), ("lr-rel", self.lr_rel)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::validation(key, "must be positive"));
            }
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::validation("init-scale", "must be positive"));
        }
        if self.early_stop_residual.is_nan() || self.early_stop_residual < 0.0 {
            return Err(Error::validation("early-stop-residual", "must be non-negative"));
        }
        let require = |key: &str, path: &Option<PathBuf>| -> Result<()> {
            match path {
                None => Err(Error::validation(key, format!("required in mode {}", self.mode))),
                Some(p) if !p.is_file() => Err(Error::validation(key, format!("no such file: {}", p.display()))),
                Some(_) => Ok(()),
            }
        };
        if self.mode.uses_nlm() {
            match (&self.corpus, &self.ngram_counts) {
                (Some(_), Some(_)) => {
                    return Err(Error::validation("corpus", "give either corpus or ngram-counts, not both"));
                }
                (None, Some(_)) => require("ngram-counts", &self.ngram_counts)?,
                _ => require("corpus", &self.corpus)?,
            }
        }
        match self.mode.relational() {
            Some(RelationalKind::Gd) => require("graph", &self.graph)?,
            Some(_) => require("triples", &self.triples)?,
            None => {}
        }
        if self.output.is_none() {
            return Err(Error::validation("output", "an output directory is required"));
        }
        Ok(())
    }

    pub fn admm(&self) -> AdmmConfig {
        let rel_items = match (self.rel_items_per_iter, self.mode.relational()) {
            (0, Some(RelationalKind::Gd)) => 100_000,
            (n, _) => n,
        };
        AdmmConfig {
            rho: self.rho,
            lr_distributional: self.lr_nlm,
            lr_relational: self.lr_rel,
            ngrams_per_iteration: self.ngrams_per_iter,
            relational_items_per_iteration: rel_items,
            gd_partners: self.gd_partners,
            residual_scale: self.residual,
        }
    }

    pub fn early_stop(&self) -> Option<EarlyStop> {
        (self.early_stop_patience > 0).then_some(EarlyStop {
            threshold: self.early_stop_residual,
            patience: self.early_stop_patience,
        })
    }
}
