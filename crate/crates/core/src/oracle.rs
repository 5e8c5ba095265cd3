//! Unbiased stochastic subgradients of the Lagrangian `f0(x) + z^T f(x)` and
//! of minimax objectives, plus the constraint-value estimator used by CSA.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::axpy;
use crate::problem::{MinimaxProblem, StochasticProgram};

/// One oracle draw.
#[derive(Debug, Clone, PartialEq)]
pub struct GradSample {
    /// Primal stochastic subgradient.
    pub u: Vec<f64>,
    /// Dual-side estimate: constraint values (constrained problems) or the
    /// `z`-supergradient (minimax problems).
    pub w: Vec<f64>,
    /// Nonzero coordinates of `w` when constraints were subsampled.
    pub w_support: Option<Vec<usize>>,
}

/// Batch sizes for objective gradients, constraint gradients and the CSA
/// constraint-value estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSizes {
    pub j0: usize,
    pub j1: usize,
    pub jg: usize,
}

impl BatchSizes {
    pub fn new(j0: usize, j1: usize, jg: usize) -> Result<Self> {
        if j0 == 0 || j1 == 0 || jg == 0 {
            return Err(Error::InvalidParameter(format!(
                "batch sizes must be >= 1, got ({j0}, {j1}, {jg})"
            )));
        }
        Ok(Self { j0, j1, jg })
    }
}

impl Default for BatchSizes {
    fn default() -> Self {
        Self { j0: 10, j1: 10, jg: 100 }
    }
}

/// Draws `(u, w)` with `E[u] = grad_x L(x, z)` and `E[w] = f(x)`.
///
/// `u` is the `j0`-batch objective subgradient plus `scale * z_i * grad f_i`
/// over the sampled constraints; `w` holds `scale * f_i` estimates on the
/// same sampled set.
pub fn sample_lagrangian_subgradient<P: StochasticProgram + ?Sized>(
    problem: &P,
    x: &[f64],
    z: &[f64],
    batches: BatchSizes,
    rng: &mut dyn RngCore,
) -> Result<GradSample> {
    let n = problem.dim();
    let m = problem.num_constraints();
    ensure_dim("lagrangian oracle x", n, x.len())?;
    ensure_dim("lagrangian oracle z", m, z.len())?;
    if batches.j0 == 0 || batches.j1 == 0 {
        return Err(Error::InvalidParameter("zero batch size".into()));
    }
    if z.iter().any(|zi| *zi < 0.0) {
        return Err(Error::InvalidParameter("multipliers must be nonnegative".into()));
    }

    let mut u = vec![0.0; n];
    problem.objective_batch(x, batches.j0, rng, 1.0, &mut u)?;

    let mut cons_grad = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut support = Vec::new();
    let scale = problem.constraint_batch(x, batches.j1, rng, true, &mut |i, value, grad| {
        w[i] = value;
        support.push(i);
        if z[i] != 0.0 {
            axpy(z[i], grad, &mut cons_grad);
        }
    })?;
    axpy(scale, &cons_grad, &mut u);
    for &i in &support {
        w[i] *= scale;
    }
    let w_support = if support.len() < m {
        support.sort_unstable();
        Some(support)
    } else {
        None
    };
    Ok(GradSample { u, w, w_support })
}

/// Unbiased estimate of `g(x) = sum_i [f_i(x)]_+` from `jg` draws.
///
/// Single-constraint problems return the batch estimate of `f_1(x)` itself;
/// many-constraint problems return `(M/|S|) sum_{j in S} [f_j(x)]_+`.
pub fn estimate_constraint_value<P: StochasticProgram + ?Sized>(
    problem: &P,
    x: &[f64],
    jg: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if jg == 0 {
        return Err(Error::InvalidParameter("zero batch size".into()));
    }
    let single = problem.num_constraints() == 1;
    let mut acc = 0.0;
    let scale = problem.constraint_batch(x, jg, rng, false, &mut |_, value, _| {
        acc += if single { value } else { value.max(0.0) };
    })?;
    Ok(scale * acc)
}

/// Draws `(u, w)` with `E[u] = grad_x L(x, z)` and `E[w] = grad_z L(x, z)`.
pub fn sample_minimax_subgradient<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    z: &[f64],
    rng: &mut dyn RngCore,
) -> Result<GradSample> {
    ensure_dim("minimax oracle x", problem.dim_x(), x.len())?;
    ensure_dim("minimax oracle z", problem.dim_z(), z.len())?;
    let mut u = vec![0.0; problem.dim_x()];
    let mut w = vec![0.0; problem.dim_z()];
    problem.sample_gradient(x, z, rng, &mut u, &mut w);
    Ok(GradSample {
        u,
        w,
        w_support: None,
    })
}
