use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use admm_embed_core::distributional::{Ngram, NgramCorpus};
use admm_embed_core::Vocabulary;

use super::{lines, open};
use crate::error::{Error, Result};

/// A corpus-side vocabulary (with `<unk>` at id 0) and its n-grams.
#[derive(Debug, Clone)]
pub struct CorpusData {
    pub vocab: Vocabulary,
    pub corpus: NgramCorpus,
}

pub fn count_tokens<R: BufRead>(reader: R, path: &Path) -> Result<HashMap<String, u64>> {
    let mut counts = HashMap::new();
    for line in lines(reader, path) {
        let (_, line) = line?;
        for tok in line.split_whitespace() {
            *counts.entry(tok.to_string()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Maps each sentence to ids, unknown tokens to `<unk>`.
pub fn encode_sentences<R: BufRead>(reader: R, path: &Path, vocab: &Vocabulary) -> Result<Vec<Vec<usize>>> {
    let mut sentences = Vec::new();
    for line in lines(reader, path) {
        let (no, line) = line?;
        let ids = line
            .split_whitespace()
            .map(|tok| {
                vocab
                    .id_or_unk(tok)
                    .ok_or_else(|| Error::parse(path, no, format!("token `{tok}` not in vocabulary")))
            })
            .collect::<Result<Vec<_>>>()?;
        sentences.push(ids);
    }
    Ok(sentences)
}

fn vocab_from_counts(counts: &HashMap<String, u64>, cap: usize) -> Vocabulary {
    Vocabulary::from_counts(counts.iter().map(|(w, &c)| (w.as_str(), c)), cap)
}

/// One pre-tokenized sentence per line; n-grams by a sliding window of
/// width `n`. The vocabulary keeps the `cap` most frequent tokens.
pub fn read_corpus(path: &Path, n: usize, cap: usize) -> Result<CorpusData> {
    let counts = count_tokens(open(path)?, path)?;
    let vocab = vocab_from_counts(&counts, cap);
    let sentences = encode_sentences(open(path)?, path, &vocab)?;
    let corpus = NgramCorpus::from_sentences(&sentences, n)?;
    if corpus.is_empty() {
        return Err(Error::format(path, format!("no {n}-grams in corpus")));
    }
    Ok(CorpusData { vocab, corpus })
}

/// `token<TAB>…<TAB>token<TAB>count` per line. Token frequencies for the
/// vocabulary cap are weighted by the n-gram counts.
pub fn parse_ngram_counts<R: BufRead>(reader: R, path: &Path, n: usize, cap: usize) -> Result<CorpusData> {
    let mut entries: Vec<(Vec<String>, u64)> = Vec::new();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for line in lines(reader, path) {
        let (no, line) = line?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != n + 1 {
            return Err(Error::parse(
                path,
                no,
                format!("expected {n} tokens and a count, found {} fields", fields.len()),
            ));
        }
        let count: u64 = fields[n]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, no, format!("bad count `{}`", fields[n])))?;
        let toks: Vec<String> = fields[..n].iter().map(|t| t.trim().to_string()).collect();
        for t in &toks {
            *counts.entry(t.clone()).or_insert(0) += count;
        }
        entries.push((toks, count));
    }
    let vocab = vocab_from_counts(&counts, cap);
    let encoded = entries
        .into_iter()
        .map(|(toks, c)| {
            let ids = toks.iter().map(|t| vocab.id_or_unk(t).unwrap_or(0)).collect();
            (Ngram::new(ids), c)
        })
        .collect();
    let corpus = NgramCorpus::from_counts(n, encoded)?;
    if corpus.is_empty() {
        return Err(Error::format(path, "no n-grams with positive count"));
    }
    Ok(CorpusData { vocab, corpus })
}

pub fn read_ngram_counts(path: &Path, n: usize, cap: usize) -> Result<CorpusData> {
    parse_ngram_counts(open(path)?, path, n, cap)
}
