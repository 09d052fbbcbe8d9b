//! Token ↔ id maps for the corpus side, the relational side, and their overlap.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Reserved token for out-of-vocabulary words on the corpus side.
pub const UNK: &str = "<unk>";

/// An ordered list of unique tokens. Ids are dense in `[0, len)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from an ordered token list; duplicates are an error.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for w in words {
            let w = w.into();
            if vocab.index.contains_key(&w) {
                return Err(Error::Input(alloc::format!("duplicate token `{w}`")));
            }
            vocab.insert(&w);
        }
        Ok(vocab)
    }

    /// Corpus vocabulary: `<unk>` at id 0, then the `cap` most frequent tokens
    /// (count descending, ties by token). `cap = 0` keeps everything.
    pub fn from_counts<'a, I>(counts: I, cap: usize) -> Self
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut sorted: Vec<(&str, u64)> = counts.into_iter().filter(|(w, _)| *w != UNK).collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if cap > 0 {
            sorted.truncate(cap);
        }
        let mut vocab = Self::new();
        vocab.insert(UNK);
        for (w, _) in sorted {
            vocab.insert(w);
        }
        vocab
    }

    /// Returns the id of `word`, adding it if absent.
    pub fn insert(&mut self, word: &str) -> usize {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Id of `word`, or of `<unk>` when the vocabulary carries one.
    pub fn id_or_unk(&self, word: &str) -> Option<usize> {
        self.id(word).or_else(|| self.id(UNK))
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Words present in both vocabularies, with their ids on each side.
///
/// Entry `k` of the joint vocabulary is row `k` of the dual table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JointVocabulary {
    pairs: Vec<(usize, usize)>,
    by_corpus: Vec<Option<usize>>,
    by_relational: Vec<Option<usize>>,
}

impl JointVocabulary {
    /// Intersection of `corpus` and `relational`, in corpus id order. The
    /// reserved `<unk>` token is never shared.
    pub fn build(corpus: &Vocabulary, relational: &Vocabulary) -> Self {
        let mut joint = JointVocabulary {
            pairs: Vec::new(),
            by_corpus: alloc::vec![None; corpus.len()],
            by_relational: alloc::vec![None; relational.len()],
        };
        for (cid, word) in corpus.words().iter().enumerate() {
            if word == UNK {
                continue;
            }
            if let Some(rid) = relational.id(word) {
                let k = joint.pairs.len();
                joint.pairs.push((cid, rid));
                joint.by_corpus[cid] = Some(k);
                joint.by_relational[rid] = Some(k);
            }
        }
        joint
    }

    /// A joint vocabulary with no shared words; ADMM then trains both sides
    /// independently.
    pub fn empty(corpus_len: usize, relational_len: usize) -> Self {
        JointVocabulary {
            pairs: Vec::new(),
            by_corpus: alloc::vec![None; corpus_len],
            by_relational: alloc::vec![None; relational_len],
        }
    }

    /// `(corpus id, relational id)` per shared word.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn shared_of_corpus(&self, corpus_id: usize) -> Option<usize> {
        self.by_corpus.get(corpus_id).copied().flatten()
    }

    pub fn shared_of_relational(&self, relational_id: usize) -> Option<usize> {
        self.by_relational.get(relational_id).copied().flatten()
    }

    pub fn corpus_len(&self) -> usize {
        self.by_corpus.len()
    }

    pub fn relational_len(&self) -> usize {
        self.by_relational.len()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> Vocabulary {
        Vocabulary::from_words(words.iter().copied()).unwrap()
    }

    #[test]
    fn index_is_a_bijection() {
        let v = vocab(&["a", "b", "c"]);
        for (i, w) in v.words().iter().enumerate() {
            assert_eq!(v.id(w), Some(i));
            assert_eq!(v.word(i), Some(w.as_str()));
        }
    }

    #[test]
    fn duplicates_rejected() {
        assert!(Vocabulary::from_words(["a", "b", "a"]).is_err());
    }

    #[test]
    fn frequency_cap_keeps_top_tokens_after_unk() {
        let v = Vocabulary::from_counts([("rare", 1), ("the", 10), ("cat", 5), ("dog", 5)], 2);
        assert_eq!(v.words(), &["<unk>", "the", "cat"]);
        assert_eq!(v.id_or_unk("rare"), Some(0));
    }

    #[test]
    fn joint_intersection() {
        let j = JointVocabulary::build(&vocab(&["cat", "dog"]), &vocab(&["dog", "fish"]));
        assert_eq!(j.len(), 1);
        assert_eq!(j.pairs(), &[(1, 0)]);
        assert_eq!(j.shared_of_corpus(1), Some(0));
        assert_eq!(j.shared_of_relational(0), Some(0));
        assert_eq!(j.shared_of_corpus(0), None);
    }

    #[test]
    fn joint_disjoint_and_identical() {
        let a = vocab(&["a", "b", "c"]);
        assert_eq!(JointVocabulary::build(&a, &vocab(&["x", "y"])).len(), 0);
        let j = JointVocabulary::build(&a, &a);
        assert_eq!(j.len(), a.len());
        assert!(j.len() <= a.len().min(a.len()));
    }
}
