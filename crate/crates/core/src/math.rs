//! Small dense vector helpers shared by every objective.

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-t))
}

pub fn tanh(t: f64) -> f64 {
    libm::tanh(t)
}

pub fn sqrt(t: f64) -> f64 {
    libm::sqrt(t)
}

pub fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

/// `x·y / (‖x‖‖y‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            what: "cosine_similarity",
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::Input("cosine_similarity of empty vectors".into()));
    }
    let nx = norm(x);
    let ny = norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm("cosine_similarity"));
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Gradient accumulator for a handful of table rows.
///
/// Rows appear in first-touch order; repeated ids accumulate into one entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RowGradients {
    dim: usize,
    ids: Vec<usize>,
    values: Vec<f64>,
}

impl RowGradients {
    pub fn new(dim: usize) -> Self {
        RowGradients {
            dim,
            ids: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn entry(&mut self, id: usize) -> &mut [f64] {
        let pos = match self.ids.iter().position(|&i| i == id) {
            Some(p) => p,
            None => {
                self.ids.push(id);
                self.values.resize(self.values.len() + self.dim, 0.0);
                self.ids.len() - 1
            }
        };
        &mut self.values[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn get(&self, id: usize) -> Option<&[f64]> {
        self.ids
            .iter()
            .position(|&i| i == id)
            .map(|p| &self.values[p * self.dim..(p + 1) * self.dim])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.ids
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.dim.max(1)))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (usize, &mut [f64])> {
        let dim = self.dim.max(1);
        self.ids.iter().copied().zip(self.values.chunks_exact_mut(dim))
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    pub fn clear(&mut self) {
        self.ids.clear();
        self.values.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[-2.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn cosine_rejects_zero_vectors() {
        assert_eq!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroNorm("cosine_similarity"))
        );
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::Dimension { .. })
        ));
    }

    fn nonzero_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, len)
            .prop_filter("nonzero", |v| norm(v) > 1e-3)
    }

    proptest! {
        #[test]
        fn self_cosine_is_one(x in nonzero_vec(6)) {
            let c = cosine_similarity(&x, &x).unwrap();
            prop_assert!((c - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn cosine_is_scale_invariant(
            x in nonzero_vec(5),
            y in nonzero_vec(5),
            alpha in 0.01f64..100.0,
            beta in 0.01f64..100.0,
        ) {
            let xs: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * beta).collect();
            let a = cosine_similarity(&x, &y).unwrap();
            let b = cosine_similarity(&xs, &ys).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }
}
