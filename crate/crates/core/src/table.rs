use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::vocab::Vocabulary;

/// Which of the three ADMM tables a matrix plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// `w`, trained by the language model.
    Distributional,
    /// `v`, trained by the relational objective.
    Relational,
    /// `y`, one multiplier row per shared word.
    Dual,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Distributional => "w",
            Role::Relational => "v",
            Role::Dual => "y",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "w" => Some(Role::Distributional),
            "v" => Some(Role::Relational),
            "y" => Some(Role::Dual),
            _ => None,
        }
    }
}

/// Dense row-major `rows × dim` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    role: Role,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(role: Role, rows: usize, dim: usize) -> Self {
        EmbeddingTable {
            role,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(role: Role, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                what: "embedding table data",
                expected: dim,
                got: data.len(),
            });
        }
        Ok(EmbeddingTable { role, dim, data })
    }

    /// Uniform `[-scale, scale]` initialization, one row per vocabulary entry.
    ///
    /// Each row is drawn from a generator keyed by `(seed, token)`, so a word
    /// present in two vocabularies starts from the same vector on both sides.
    /// Dual tables start at zero.
    pub fn init(role: Role, vocab: &Vocabulary, dim: usize, seed: u64, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config("initialization scale must be positive".into()));
        }
        let mut table = Self::zeros(role, vocab.len(), dim);
        if role == Role::Dual {
            return Ok(table);
        }
        for (i, word) in vocab.words().iter().enumerate() {
            let mut rng = Rng::for_token(seed, word);
            for x in table.row_mut(i) {
                *x = rng.uniform(-scale, scale);
            }
        }
        Ok(table)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        crate::math::all_finite(&self.data)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EmbeddingTable {
            role: self.role,
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::from_words(["a", "b", "c", "d"]).unwrap()
    }

    #[test]
    fn dual_tables_start_at_zero() {
        let t = EmbeddingTable::init(Role::Dual, &vocab(), 8, 1, 0.5).unwrap();
        assert!(t.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(t.rows(), 4);
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = EmbeddingTable::init(Role::Distributional, &vocab(), 50, 11, 0.01).unwrap();
        let b = EmbeddingTable::init(Role::Distributional, &vocab(), 50, 11, 0.01).unwrap();
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|x| x.abs() <= 0.01));
        assert!(a.as_slice().iter().any(|&x| x != 0.0));
    }

    #[test]
    fn shared_words_start_equal_across_tables() {
        let corpus = Vocabulary::from_words(["x", "dog", "y"]).unwrap();
        let rel = Vocabulary::from_words(["dog", "z"]).unwrap();
        let w = EmbeddingTable::init(Role::Distributional, &corpus, 6, 5, 0.1).unwrap();
        let v = EmbeddingTable::init(Role::Relational, &rel, 6, 5, 0.1).unwrap();
        assert_eq!(w.row(1), v.row(0));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(EmbeddingTable::init(Role::Relational, &vocab(), 0, 1, 0.1).is_err());
        assert!(EmbeddingTable::init(Role::Relational, &vocab(), 3, 1, 0.0).is_err());
        assert!(EmbeddingTable::from_rows(Role::Relational, 3, alloc::vec![0.0; 7]).is_err());
    }
}
