//! Problem abstractions shared by the solvers.
//!
//! A [`StochasticProgram`] is `min f0(x) s.t. f_i(x) <= 0, x in X` accessed
//! only through sampled estimates. Metrics and reference solutions work on a
//! [`DeterministicProgram`], which every stochastic program can produce
//! (exactly for finite sums, or as a frozen sample average).

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::boxset::BoxSet;
use crate::error::{Error, Result};

/// Callback receiving `(constraint index, value estimate, gradient estimate)`.
pub type ConstraintSink<'a> = dyn FnMut(usize, f64, &[f64]) + 'a;

pub trait StochasticProgram {
    fn dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    fn feasible_set(&self) -> &BoxSet;

    /// True when each `f_i` can be evaluated exactly (the randomness is only
    /// in which constraints are sampled).
    fn deterministic_constraints(&self) -> bool;

    /// Adds `weight` times a batch-averaged stochastic subgradient of `f0`
    /// at `x` into `grad`, using `batch` draws.
    fn objective_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<()>;

    /// Samples constraint estimates for one oracle call and hands each one to
    /// `sink`. The gradient slice is empty when `want_grad` is false.
    ///
    /// Returns the unbiasedness scale to apply to every sampled term: `M/|S|`
    /// when a subset `S` of the constraints is drawn, `1` otherwise.
    fn constraint_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        want_grad: bool,
        sink: &mut ConstraintSink<'_>,
    ) -> Result<f64>;

    /// Deterministic program used for metrics and reference solves. For
    /// sampled problems, `eval_seed` selects the frozen evaluation sample.
    fn evaluation_program(&self, eval_seed: u64) -> Box<dyn DeterministicProgram + '_>;
}

/// A program whose functions can be evaluated exactly.
pub trait DeterministicProgram {
    fn dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    fn feasible_set(&self) -> &BoxSet;

    /// `f0(x)`; when `grad` is given it is overwritten with `grad f0(x)`.
    fn objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64;

    /// `f_i(x)`; when `grad` is given it is overwritten with `grad f_i(x)`.
    fn constraint(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64;
}

impl<T: DeterministicProgram + ?Sized> DeterministicProgram for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_constraints(&self) -> usize {
        (**self).num_constraints()
    }
    fn feasible_set(&self) -> &BoxSet {
        (**self).feasible_set()
    }
    fn objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        (**self).objective(x, grad)
    }
    fn constraint(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        (**self).constraint(i, x, grad)
    }
}

/// Objective value and constraint violations at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f0: f64,
    /// Raw constraint values `f_i(x)` (may be negative).
    pub violations: Vec<f64>,
    /// `(1/M) sum_i [f_i(x)]_+`
    pub viol_avg: f64,
    /// `max_i [f_i(x)]_+`
    pub viol_max: f64,
}

pub fn evaluate(program: &dyn DeterministicProgram, x: &[f64]) -> Evaluation {
    let f0 = program.objective(x, None);
    let m = program.num_constraints();
    let violations: Vec<f64> = (0..m).map(|i| program.constraint(i, x, None)).collect();
    let (sum, max) = violations
        .iter()
        .map(|v| v.max(0.0))
        .fold((0.0, 0.0f64), |(s, mx), v| (s + v, mx.max(v)));
    Evaluation {
        f0,
        violations,
        viol_avg: if m == 0 { 0.0 } else { sum / m as f64 },
        viol_max: max,
    }
}

/// Objective and violations of `x`, exact for finite sums and a fresh
/// evaluation sample (selected by `eval_seed`) for expectation problems.
pub fn evaluate_full<P: StochasticProgram + ?Sized>(problem: &P, x: &[f64], eval_seed: u64) -> Evaluation {
    let program = problem.evaluation_program(eval_seed);
    evaluate(&*program, x)
}

/// `min_{x in X} max_{z in Z} L(x, z)` accessed through a stochastic oracle.
pub trait MinimaxProblem {
    fn dim_x(&self) -> usize;

    fn dim_z(&self) -> usize;

    fn set_x(&self) -> &BoxSet;

    fn set_z(&self) -> &BoxSet;

    /// Writes an unbiased stochastic subgradient `(u, w)` of `L` at `(x, z)`:
    /// `u` estimates a subgradient in `x`, `w` a supergradient in `z`.
    fn sample_gradient(&self, x: &[f64], z: &[f64], rng: &mut dyn RngCore, u: &mut [f64], w: &mut [f64]);

    /// `L(x, z)`.
    fn value(&self, x: &[f64], z: &[f64]) -> f64;

    /// `max_{z in Z} L(x_bar, z) - min_{x in X} L(x, z_bar)`.
    fn primal_dual_gap(&self, _x_bar: &[f64], _z_bar: &[f64]) -> Result<f64> {
        Err(Error::Unsupported("problem has no exact inner solver for the primal-dual gap"))
    }
}

/// Lagrangian subgradient in `x` of a deterministic program:
/// `grad f0(x) + sum_i z_i grad f_i(x)`.
pub fn lagrangian_gradient(program: &dyn DeterministicProgram, x: &[f64], z: &[f64], out: &mut [f64]) {
    program.objective(x, Some(out));
    let mut g = vec![0.0; x.len()];
    for (i, zi) in z.iter().enumerate() {
        if *zi != 0.0 {
            program.constraint(i, x, Some(&mut g));
            crate::linalg::axpy(*zi, &g, out);
        }
    }
}
