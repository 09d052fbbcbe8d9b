//! Desk-scale synthetic data: a corpus, a word graph, labeled triples and
//! MaxDiff questions with known structure.

use std::collections::HashSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use admm_embed_core::relational::Label;
use admm_embed_core::rng::stream;
use admm_embed_core::Rng;

use crate::error::{Error, Result};
use crate::formats::analogy::{write_analogies, AnalogyRecord, Gold};
use crate::formats::triples::{write_triples, TripleRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Corpus words `w0..w{vocab-1}`.
    pub vocab: usize,
    /// Latent classes of the bigram process; word `i` belongs to class `i % classes`.
    pub classes: usize,
    /// Minimum number of sliding-window n-grams the corpus must yield.
    pub ngrams: usize,
    pub n: usize,
    pub graph_nodes: usize,
    pub shortcuts: usize,
    pub entities: usize,
    pub relations: usize,
    pub clusters: usize,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub analogies: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            vocab: 100,
            classes: 10,
            ngrams: 5000,
            n: 5,
            graph_nodes: 50,
            shortcuts: 10,
            entities: 200,
            relations: 4,
            clusters: 20,
            train: 2000,
            dev: 400,
            test: 400,
            analogies: 20,
        }
    }
}

/// Files written by [`generate`].
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub corpus: PathBuf,
    pub graph: PathBuf,
    pub triples_train: PathBuf,
    pub triples_dev: PathBuf,
    pub triples_test: PathBuf,
    pub analogy: PathBuf,
}

impl SynthFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SynthFiles {
            corpus: dir.join("corpus.txt"),
            graph: dir.join("graph.tsv"),
            triples_train: dir.join("triples_train.tsv"),
            triples_dev: dir.join("triples_dev.tsv"),
            triples_test: dir.join("triples_test.tsv"),
            analogy: dir.join("analogy.txt"),
        }
    }
}

pub fn word(i: usize) -> String {
    format!("w{i}")
}

pub fn relation(r: usize) -> String {
    format!("r{r}")
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vocab", self.vocab),
            ("classes", self.classes),
            ("ngrams", self.ngrams),
            ("n", self.n),
            ("graph-nodes", self.graph_nodes),
            ("entities", self.entities),
            ("relations", self.relations),
            ("clusters", self.clusters),
        ];
        for (field, value) in positive {
            if value == 0 {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        if self.vocab < self.classes {
            return Err(Error::validation("classes", "cannot exceed vocab"));
        }
        if self.relations >= self.clusters {
            return Err(Error::validation("relations", "must be smaller than clusters"));
        }
        if !self.dev.is_multiple_of(2) || !self.test.is_multiple_of(2) {
            return Err(Error::validation("dev", "dev and test sizes must be even (half positive)"));
        }
        Ok(())
    }

    /// Cluster shift of relation `r`.
    pub fn shift(&self, r: usize) -> usize {
        r + 1
    }

    pub fn cluster(&self, entity: usize) -> usize {
        entity % self.clusters
    }

    /// Planted rule: relation `r` holds iff the right entity's cluster lies
    /// exactly `shift(r)` clusters after the left one's.
    pub fn holds(&self, left: usize, r: usize, right: usize) -> bool {
        self.cluster(right) == self.cluster(left) + self.shift(r)
    }
}

/// Sentences from a latent-class bigram process. Each class prefers two
/// successor classes; words are drawn uniformly within the class.
pub fn corpus(config: &SynthConfig, rng: &mut Rng) -> Vec<Vec<String>> {
    let k = config.classes;
    let members: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..config.vocab).filter(|i| i % k == c).collect())
        .collect();
    let favored: Vec<[usize; 2]> = (0..k).map(|_| [rng.below(k), rng.below(k)]).collect();
    let mut sentences = Vec::new();
    let mut windows = 0;
    while windows < config.ngrams {
        let len = config.n + 8 + rng.below(12);
        let mut class = rng.below(k);
        let mut sentence = Vec::with_capacity(len);
        for _ in 0..len {
            let pool = &members[class];
            sentence.push(word(pool[rng.below(pool.len())]));
            class = if rng.chance(0.8) {
                favored[class][usize::from(rng.coin())]
            } else {
                rng.below(k)
            };
        }
        windows += len + 1 - config.n;
        sentences.push(sentence);
    }
    sentences
}

/// A random tree over synsets plus shortcut edges. Word `i` belongs to
/// synset `i % nodes`, and to a second random synset one time in five.
pub fn graph_records(config: &SynthConfig, rng: &mut Rng) -> Vec<String> {
    let nodes = config.graph_nodes;
    let mut out: Vec<String> = (0..nodes).map(|s| format!("S\ts{s}")).collect();
    let mut edges = HashSet::new();
    for s in 1..nodes {
        let parent = rng.below(s);
        edges.insert((parent, s));
        out.push(format!("E\ts{parent}\ts{s}"));
    }
    if nodes > 2 {
        let mut added = 0;
        let mut attempts = 0;
        while added < config.shortcuts && attempts < 100 * (config.shortcuts + 1) {
            attempts += 1;
            let a = rng.below(nodes);
            let b = rng.below_excluding(nodes, a);
            let key = (a.min(b), a.max(b));
            if edges.insert(key) {
                out.push(format!("E\ts{}\ts{}", key.0, key.1));
                added += 1;
            }
        }
    }
    for i in 0..config.vocab {
        out.push(format!("M\t{}\ts{}", word(i), i % nodes));
        if nodes > 1 && rng.chance(0.2) {
            let extra = rng.below_excluding(nodes, i % nodes);
            out.push(format!("M\t{}\ts{extra}", word(i)));
        }
    }
    out
}

/// Planted triples split into train (positives only), dev and test (half
/// positive, half negative). The three sets share no triple.
pub fn triples(config: &SynthConfig, rng: &mut Rng) -> Result<[Vec<TripleRecord>; 3]> {
    let e = config.entities;
    let mut positives = Vec::new();
    for r in 0..config.relations {
        for left in 0..e {
            for right in 0..e {
                if config.holds(left, r, right) {
                    positives.push((left, r, right));
                }
            }
        }
    }
    let (dev_pos, test_pos) = (config.dev / 2, config.test / 2);
    let needed = config.train + dev_pos + test_pos;
    if positives.len() < needed {
        return Err(Error::validation(
            "train",
            format!("only {} planted positives for {needed} requested", positives.len()),
        ));
    }
    rng.shuffle(&mut positives);
    let mut used: HashSet<(usize, usize, usize)> = positives[..needed].iter().copied().collect();

    let mut negatives = Vec::with_capacity(config.dev / 2 + config.test / 2);
    let mut attempts = 0usize;
    while negatives.len() < dev_pos + test_pos {
        attempts += 1;
        if attempts > 1000 * (dev_pos + test_pos + 1) {
            return Err(Error::validation("entities", "too few entities to draw distinct negatives"));
        }
        let t = (rng.below(e), rng.below(config.relations), rng.below(e));
        if !config.holds(t.0, t.1, t.2) && used.insert(t) {
            negatives.push(t);
        }
    }

    let record = |(l, r, rr): (usize, usize, usize), label| TripleRecord {
        left: word(l),
        relation: relation(r),
        right: word(rr),
        label,
    };
    let train = positives[..config.train]
        .iter()
        .map(|&t| record(t, Label::Unlabeled))
        .collect();
    let mut labeled = |pos: &[(usize, usize, usize)], neg: &[(usize, usize, usize)]| {
        let mut set: Vec<TripleRecord> = pos
            .iter()
            .map(|&t| record(t, Label::Positive))
            .chain(neg.iter().map(|&t| record(t, Label::Negative)))
            .collect();
        rng.shuffle(&mut set);
        set
    };
    let dev = labeled(
        &positives[config.train..config.train + dev_pos],
        &negatives[..dev_pos],
    );
    let test = labeled(&positives[config.train + dev_pos..needed], &negatives[dev_pos..]);
    Ok([train, dev, test])
}

/// MaxDiff questions over corpus classes. Prototype pairs link class `c` to
/// class `c + s`; the gold "most" candidate follows the same shift and the
/// gold "least" candidate reverses it.
pub fn analogies(config: &SynthConfig, rng: &mut Rng) -> Vec<AnalogyRecord> {
    let k = config.classes;
    if k < 3 {
        return Vec::new();
    }
    let pick = |class: usize, rng: &mut Rng| {
        let per = (config.vocab - class).div_ceil(k);
        class + k * rng.below(per)
    };
    let mut out = Vec::with_capacity(config.analogies);
    for _ in 0..config.analogies {
        let s = 1 + rng.below(k - 1);
        let pair = |rng: &mut Rng, shift: usize| {
            let c = rng.below(k);
            (word(pick(c, rng)), word(pick((c + shift) % k, rng)))
        };
        let prototypes = (0..3).map(|_| pair(rng, s)).collect();
        let mut candidates = vec![];
        let (a, b) = pair(rng, s);
        candidates.push((a, b, Some(Gold::Most)));
        let (a, b) = pair(rng, s);
        candidates.push((b, a, Some(Gold::Least)));
        for _ in 0..2 {
            let other = 1 + rng.below_excluding(k - 1, s - 1);
            let (a, b) = pair(rng, other);
            candidates.push((a, b, None));
        }
        rng.shuffle(&mut candidates);
        out.push(AnalogyRecord { prototypes, candidates });
    }
    out
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes all synthetic files into `dir`.
pub fn generate(config: &SynthConfig, dir: &Path) -> Result<SynthFiles> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = SynthFiles::in_dir(dir);
    let mut rng = Rng::with_stream(config.seed, stream::SYNTHETIC);

    let mut out = create(&files.corpus)?;
    for sentence in corpus(config, &mut rng) {
        writeln!(out, "{}", sentence.join(" ")).map_err(|e| Error::io(&files.corpus, e))?;
    }
    out.flush().map_err(|e| Error::io(&files.corpus, e))?;

    let mut out = create(&files.graph)?;
    for line in graph_records(config, &mut rng) {
        writeln!(out, "{line}").map_err(|e| Error::io(&files.graph, e))?;
    }
    out.flush().map_err(|e| Error::io(&files.graph, e))?;

    let sets = triples(config, &mut rng)?;
    for (set, path) in sets
        .iter()
        .zip([&files.triples_train, &files.triples_dev, &files.triples_test])
    {
        let mut out = create(path)?;
        write_triples(&mut out, set)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))?;
    }

    let mut out = create(&files.analogy)?;
    write_analogies(&mut out, &analogies(config, &mut rng))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&files.analogy, e))?;
    Ok(files)
}
