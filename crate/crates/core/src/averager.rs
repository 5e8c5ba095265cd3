//! Streaming ergodic averages.
//!
//! After pushing `(x^1, alpha_1), ..., (x^t, alpha_t)` the average is
//!
//! ```text
//! sum_j w_j x^j / sum_j w_j,   w_j = sum_{k=j}^t alpha_k beta^{k-j}
//! ```
//!
//! maintained in O(dim) per push through a geometric accumulator. With
//! `beta = 0` this is the plain `alpha`-weighted average used by the
//! non-momentum baselines.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::axpy;

#[derive(Debug, Clone)]
pub struct ErgodicAverager {
    weighted_sum: Vec<f64>,
    normalizer: f64,
    geo_vec: Vec<f64>,
    geo_scalar: f64,
    beta: f64,
    count: usize,
}

impl ErgodicAverager {
    /// `beta` must lie in `[0, 1)`.
    pub fn new(dim: usize, beta: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&beta));
        Self {
            weighted_sum: vec![0.0; dim],
            normalizer: 0.0,
            geo_vec: vec![0.0; dim],
            geo_scalar: 0.0,
            beta,
            count: 0,
        }
    }

    pub fn push(&mut self, x: &[f64], alpha: f64) {
        debug_assert_eq!(x.len(), self.geo_vec.len());
        for (g, xi) in self.geo_vec.iter_mut().zip(x) {
            *g = self.beta * *g + xi;
        }
        self.geo_scalar = self.beta * self.geo_scalar + 1.0;
        axpy(alpha, &self.geo_vec, &mut self.weighted_sum);
        self.normalizer += alpha * self.geo_scalar;
        self.count += 1;
    }

    /// Current average, or `None` before the first push.
    pub fn finalize(&self) -> Option<Vec<f64>> {
        if self.count == 0 {
            return None;
        }
        Some(self.weighted_sum.iter().map(|v| v / self.normalizer).collect())
    }

    /// `sum_j w_j(t)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}
