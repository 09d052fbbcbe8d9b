use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use admm_embed::checkpoint;
use admm_embed::config::RunConfig;
use admm_embed::evaluate::{self, EvalConfig, TableChoice, Task};
use admm_embed::synth::{self, SynthConfig};
use admm_embed::train;
use admm_embed::Result;

#[derive(Parser)]
#[command(name = "admm-embed", version, about = "Jointly train word embeddings from text and relations with ADMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train embeddings and write a run directory.
    Train(Box<TrainArgs>),
    /// Evaluate a checkpoint on kb, analogy or neighbors.
    Eval(EvalArgs),
    /// Generate a synthetic corpus, graph, triples and analogy questions.
    Synth(SynthArgs),
    /// Print checkpoint metadata and table shapes.
    Inspect {
        /// Checkpoint directory (the `checkpoint/` folder of a run).
        checkpoint: PathBuf,
    },
}

/// Every flag is also a config-file key. Flags override the file.
#[derive(Args)]
struct TrainArgs {
    /// Flat `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// nlm, gd, transe, ntn, nlm+gd, nlm+transe or nlm+ntn.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    /// N-gram width.
    #[arg(long)]
    context: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long = "lr-nlm")]
    lr_nlm: Option<String>,
    #[arg(long = "lr-rel")]
    lr_rel: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long = "ngrams-per-iter")]
    ngrams_per_iter: Option<String>,
    /// 0: 100000 words for gd, the full training set for triples.
    #[arg(long = "rel-items-per-iter")]
    rel_items_per_iter: Option<String>,
    #[arg(long = "gd-partners")]
    gd_partners: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Corpus vocabulary size, 0 for no cap.
    #[arg(long = "vocab-cap")]
    vocab_cap: Option<String>,
    #[arg(long = "init-scale")]
    init_scale: Option<String>,
    /// sigmoid or tanh (ntn).
    #[arg(long)]
    nonlinearity: Option<String>,
    /// linear or log path-length similarity (gd).
    #[arg(long)]
    wordsim: Option<String>,
    /// relative or absolute residual.
    #[arg(long)]
    residual: Option<String>,
    #[arg(long = "early-stop-residual")]
    early_stop_residual: Option<String>,
    /// 0 disables early stopping.
    #[arg(long = "early-stop-patience")]
    early_stop_patience: Option<String>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long = "ngram-counts")]
    ngram_counts: Option<String>,
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    triples: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

impl TrainArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 24] {
        [
            ("mode", &self.mode),
            ("dim", &self.dim),
            ("hidden", &self.hidden),
            ("context", &self.context),
            ("rho", &self.rho),
            ("lr-nlm", &self.lr_nlm),
            ("lr-rel", &self.lr_rel),
            ("iterations", &self.iterations),
            ("ngrams-per-iter", &self.ngrams_per_iter),
            ("rel-items-per-iter", &self.rel_items_per_iter),
            ("gd-partners", &self.gd_partners),
            ("seed", &self.seed),
            ("vocab-cap", &self.vocab_cap),
            ("init-scale", &self.init_scale),
            ("nonlinearity", &self.nonlinearity),
            ("wordsim", &self.wordsim),
            ("residual", &self.residual),
            ("early-stop-residual", &self.early_stop_residual),
            ("early-stop-patience", &self.early_stop_patience),
            ("corpus", &self.corpus),
            ("ngram-counts", &self.ngram_counts),
            ("graph", &self.graph),
            ("triples", &self.triples),
            ("output", &self.output),
        ]
    }

    fn to_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        Ok(config)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    task: Task,
    /// Labeled dev triples for threshold fitting (kb).
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Labeled test triples (kb).
    #[arg(long)]
    test: Option<PathBuf>,
    /// Analogy question file.
    #[arg(long)]
    analogy: Option<PathBuf>,
    /// w, v or mean.
    #[arg(long, default_value = "w")]
    table: TableChoice,
    /// Query word (neighbors).
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Directory for the text and CSV reports.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    vocab: usize,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 5000)]
    ngrams: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long = "graph-nodes", default_value_t = 50)]
    graph_nodes: usize,
    #[arg(long, default_value_t = 10)]
    shortcuts: usize,
    #[arg(long, default_value_t = 200)]
    entities: usize,
    #[arg(long, default_value_t = 4)]
    relations: usize,
    #[arg(long, default_value_t = 20)]
    clusters: usize,
    #[arg(long, default_value_t = 2000)]
    train: usize,
    #[arg(long, default_value_t = 400)]
    dev: usize,
    #[arg(long, default_value_t = 400)]
    test: usize,
    #[arg(long, default_value_t = 20)]
    analogies: usize,
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => {
            let config = args.to_config()?;
            let outcome = train::run_train(&config)?;
            let last = outcome
                .last
                .map(|r| format!(", joint loss {:.6}, residual {:.6}", r.joint_loss(), r.mean_residual))
                .unwrap_or_default();
            println!(
                "trained {} iterations{}{last}; run directory {}",
                outcome.summary.iterations,
                if outcome.summary.stopped_early { " (stopped early)" } else { "" },
                outcome.output.display()
            );
        }
        Command::Eval(args) => {
            let config = EvalConfig {
                checkpoint: args.checkpoint,
                task: args.task,
                dev: args.dev,
                test: args.test,
                analogy: args.analogy,
                table: args.table,
                word: args.word,
                k: args.k,
                output: args.output,
            };
            let outcome = evaluate::run_eval(&config)?;
            print!("{}", outcome.text);
            if config.output.is_none() && config.task != Task::Neighbors {
                println!("{}", outcome.summary);
            }
        }
        Command::Synth(a) => {
            let config = SynthConfig {
                seed: a.seed,
                vocab: a.vocab,
                classes: a.classes,
                ngrams: a.ngrams,
                n: a.n,
                graph_nodes: a.graph_nodes,
                shortcuts: a.shortcuts,
                entities: a.entities,
                relations: a.relations,
                clusters: a.clusters,
                train: a.train,
                dev: a.dev,
                test: a.test,
                analogies: a.analogies,
            };
            let files = synth::generate(&config, &a.output)?;
            for path in [
                &files.corpus,
                &files.graph,
                &files.triples_train,
                &files.triples_dev,
                &files.triples_test,
                &files.analogy,
            ] {
                println!("{}", path.display());
            }
        }
        Command::Inspect { checkpoint: dir } => {
            print!("{}", checkpoint::describe(&dir)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

