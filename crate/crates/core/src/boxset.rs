//! Box feasible sets and the (weighted) projections onto them.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{ensure_dim, ensure_finite, Error, Result};

/// An axis-aligned box `{x : lower <= x <= upper}` with finite bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        ensure_dim("BoxSet::new", lower.len(), upper.len())?;
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "box bound {i} is not finite"
                )));
            }
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "box bound {i}: lower {lo} > upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![lo; dim], alloc::vec![hi; dim])
    }

    /// `[-half_width, half_width]^dim`.
    pub fn symmetric(dim: usize, half_width: f64) -> Result<Self> {
        Self::uniform(dim, -half_width, half_width)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Max-norm diameter `max_i (upper_i - lower_i)`.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Whether any coordinate of `x` sits on a face of the box.
    pub fn touches_boundary(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(v, (lo, hi))| v == lo || v == hi)
    }

    /// Euclidean projection, in place.
    #[inline]
    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Euclidean projection.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y.to_vec();
        self.clamp_in_place(&mut x);
        x
    }

    /// `argmin_{x in box} sum_i w_i (x_i - y_i)^2` for a diagonal weight `w >= 0`.
    ///
    /// The objective is coordinate-separable, so any positive weight leaves the
    /// per-coordinate clamp as the unique minimizer. A zero weight makes every
    /// point of `[lower_i, upper_i]` a minimizer; the clamp is returned there as
    /// well so the result never depends on whether a coordinate has been seen.
    pub fn project_weighted(&self, y: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        ensure_dim("project_weighted", self.dim(), y.len())?;
        ensure_dim("project_weighted", self.dim(), weights.len())?;
        ensure_finite(y, "project_weighted input")?;
        ensure_finite(weights, "project_weighted weights")?;
        if let Some(w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::InvalidParameter(format!("negative projection weight {w}")));
        }
        Ok(self.project(y))
    }
}

/// Public entry point matching the kernel naming used across the solvers.
pub fn project_box_weighted(y: &[f64], set: &BoxSet, weights: &[f64]) -> Result<Vec<f64>> {
    set.project_weighted(y, weights)
}
