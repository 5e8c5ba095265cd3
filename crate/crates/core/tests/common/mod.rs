#![allow(dead_code)]

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Central differences of `f` at `x`.
pub fn finite_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        out[i] = (fp - fm) / (2.0 * h);
    }
    out
}

/// `||a - b|| <= tol * max(1, ||b||)`.
pub fn vec_rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff <= tol * nb.max(1.0)
}

/// Grid points `lo, lo+h, ..., hi`.
pub fn grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let steps = ((hi - lo) / h).round() as usize;
    (0..=steps).map(|i| lo + i as f64 * h).collect()
}

/// Running mean and variance.
#[derive(Default, Clone)]
pub struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_error(&self) -> f64 {
        (self.m2 / (self.n - 1.0)).sqrt() / self.n.sqrt()
    }
}

use aprid_core::problem::ConstraintSink;
use aprid_core::{BoxSet, DeterministicProgram, StochasticProgram};

/// A deterministic program seen through a noiseless oracle: every draw is the
/// exact gradient and every constraint is returned with scale 1.
pub struct Exact<D>(pub D);

impl<D: DeterministicProgram> StochasticProgram for Exact<D> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn num_constraints(&self) -> usize {
        self.0.num_constraints()
    }
    fn feasible_set(&self) -> &BoxSet {
        self.0.feasible_set()
    }
    fn deterministic_constraints(&self) -> bool {
        true
    }
    fn objective_batch(
        &self,
        x: &[f64],
        _batch: usize,
        _rng: &mut dyn rand::RngCore,
        weight: f64,
        grad: &mut [f64],
    ) -> aprid_core::Result<()> {
        let mut g = vec![0.0; x.len()];
        self.0.objective(x, Some(&mut g));
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += weight * b);
        Ok(())
    }
    fn constraint_batch(
        &self,
        x: &[f64],
        _batch: usize,
        _rng: &mut dyn rand::RngCore,
        want_grad: bool,
        sink: &mut ConstraintSink<'_>,
    ) -> aprid_core::Result<f64> {
        let mut g = vec![0.0; x.len()];
        for i in 0..self.0.num_constraints() {
            let v = self.0.constraint(i, x, Some(&mut g));
            sink(i, v, if want_grad { &g } else { &[] });
        }
        Ok(1.0)
    }
    fn evaluation_program(&self, _eval_seed: u64) -> Box<dyn DeterministicProgram + '_> {
        Box::new(&self.0)
    }
}
