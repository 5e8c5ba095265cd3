//! High-accuracy deterministic solutions for small instances.
//!
//! [`solve_reference`] is an augmented Lagrangian loop with a projected
//! Barzilai-Borwein inner solver and backtracking. It stops on the KKT
//! residuals of the ordinary Lagrangian:
//!
//! ```text
//! stationarity    ||x - proj_X(x - grad f0(x) - sum_i z_i grad f_i(x))||
//! feasibility     max_i [f_i(x)]_+
//! complementarity max_i |z_i f_i(x)|
//! ```
//!
//! [`solve_saddle_reference`] runs extragradient on a bilinear saddle until
//! the closed-form gap is small.

use alloc::vec;
use alloc::vec::Vec;

use crate::boxset::BoxSet;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, spectral_norm};
use crate::problem::{lagrangian_gradient, DeterministicProgram, MinimaxProblem};
use crate::problems::BilinearSaddle;

#[derive(Debug, Clone)]
pub struct ReferenceOptions {
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub penalty: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub x0: Option<Vec<f64>>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_outer: 200,
            max_inner: 50_000,
            penalty: 10.0,
            penalty_growth: 10.0,
            penalty_max: 1e10,
            x0: None,
        }
    }
}

impl ReferenceOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub feasibility: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.feasibility).max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    pub residuals: KktResiduals,
    pub outer_iterations: usize,
}

fn projected_step_norm(set: &BoxSet, x: &[f64], g: &[f64]) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi).collect();
    set.clamp_in_place(&mut y);
    libm::sqrt(y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// KKT residuals of `(x, z)`, computed directly from the program.
pub fn kkt_residuals(program: &dyn DeterministicProgram, x: &[f64], z: &[f64]) -> KktResiduals {
    let mut g = vec![0.0; x.len()];
    lagrangian_gradient(program, x, z, &mut g);
    let stationarity = projected_step_norm(program.feasible_set(), x, &g);
    let mut feasibility = 0.0f64;
    let mut complementarity = 0.0f64;
    for (i, zi) in z.iter().enumerate() {
        let f = program.constraint(i, x, None);
        feasibility = feasibility.max(f);
        complementarity = complementarity.max(libm::fabs(zi * f));
    }
    KktResiduals {
        stationarity,
        feasibility,
        complementarity,
    }
}

/// Augmented Lagrangian `phi(x)` for multipliers `z` and penalty `beta`,
/// with its gradient when requested.
fn augmented(program: &dyn DeterministicProgram, x: &[f64], z: &[f64], beta: f64, grad: Option<&mut [f64]>) -> f64 {
    match grad {
        None => {
            let mut phi = program.objective(x, None);
            for (i, zi) in z.iter().enumerate() {
                let t = (zi + beta * program.constraint(i, x, None)).max(0.0);
                phi += (t * t - zi * zi) / (2.0 * beta);
            }
            phi
        }
        Some(g) => {
            let mut phi = program.objective(x, Some(g));
            let mut gi = vec![0.0; x.len()];
            for (i, zi) in z.iter().enumerate() {
                let t = (zi + beta * program.constraint(i, x, Some(&mut gi))).max(0.0);
                phi += (t * t - zi * zi) / (2.0 * beta);
                if t > 0.0 {
                    axpy(t, &gi, g);
                }
            }
            phi
        }
    }
}

/// Minimizes `phi` over the box to projected-gradient residual `tol`;
/// returns the residual reached.
fn inner_solve(
    program: &dyn DeterministicProgram,
    x: &mut Vec<f64>,
    z: &[f64],
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    let set = program.feasible_set();
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut phi = augmented(program, x, z, beta, Some(&mut g));
    let mut step = 1.0;
    let mut residual = projected_step_norm(set, x, &g);
    let mut g_new = vec![0.0; n];
    for _ in 0..max_iter {
        if residual <= tol {
            break;
        }
        let mut t = step;
        let (x_new, phi_new) = loop {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            set.clamp_in_place(&mut y);
            let d2: f64 = y.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            let val = augmented(program, &y, z, beta, None);
            if val <= phi - 1e-4 * d2 / t || t < 1e-20 {
                break (y, val);
            }
            t *= 0.5;
        };
        augmented(program, &x_new, z, beta, Some(&mut g_new));
        let s: Vec<f64> = x_new.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-12, 1e12) } else { (t * 2.0).min(1e12) };
        *x = x_new;
        core::mem::swap(&mut g, &mut g_new);
        phi = phi_new;
        residual = projected_step_norm(set, x, &g);
        if norm2(&s) == 0.0 {
            break;
        }
    }
    residual
}

/// Solves `min f0(x) s.t. f_i(x) <= 0, x in X` to KKT tolerance `opts.tol`.
pub fn solve_reference(program: &dyn DeterministicProgram, opts: &ReferenceOptions) -> Result<ReferenceSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("reference tolerance must be positive".into()));
    }
    let set = program.feasible_set();
    let m = program.num_constraints();
    let mut x = match &opts.x0 {
        Some(x0) => set.project(x0),
        None => set.project(&vec![0.0; program.dim()]),
    };
    let mut z = vec![0.0; m];
    let mut beta = opts.penalty;
    let mut prev_feas = f64::INFINITY;
    let mut best = f64::INFINITY;
    for outer in 1..=opts.max_outer {
        let inner_tol = libm::pow(0.1, outer as f64).max(0.1 * opts.tol);
        inner_solve(program, &mut x, &z, beta, inner_tol, opts.max_inner);
        let mut feas = 0.0f64;
        for (i, zi) in z.iter_mut().enumerate() {
            let f = program.constraint(i, &x, None);
            feas = feas.max(f);
            *zi = (*zi + beta * f).max(0.0);
        }
        let residuals = kkt_residuals(program, &x, &z);
        best = best.min(residuals.max());
        if residuals.max() <= opts.tol {
            return Ok(ReferenceSolution {
                objective: program.objective(&x, None),
                x,
                z,
                residuals,
                outer_iterations: outer,
            });
        }
        if feas > 0.25 * prev_feas {
            if beta >= opts.penalty_max && feas > 0.99 * prev_feas {
                return Err(Error::NotConverged {
                    method: "augmented Lagrangian reference (stalled feasibility)",
                    iterations: outer,
                    residual: best,
                });
            }
            beta = (beta * opts.penalty_growth).min(opts.penalty_max);
        }
        prev_feas = feas;
    }
    Err(Error::NotConverged {
        method: "augmented Lagrangian reference",
        iterations: opts.max_outer,
        residual: best,
    })
}

/// Extragradient on a bilinear saddle until the exact gap is at most `tol`.
pub fn solve_saddle_reference(problem: &BilinearSaddle, tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (problem.dim_x(), problem.dim_z());
    let norm_a = spectral_norm(problem.matrix(), n, m);
    let step = if norm_a > 0.0 { 0.5 / norm_a } else { 1.0 };
    let mut x = problem.set_x().project(&vec![0.0; n]);
    let mut z = problem.set_z().project(&vec![0.0; m]);
    let (mut u, mut w) = (vec![0.0; n], vec![0.0; m]);
    let mut gap = problem.primal_dual_gap(&x, &z)?;
    for it in 0..max_iter {
        if gap <= tol {
            return Ok((x, z));
        }
        problem.exact_gradient(&x, &z, &mut u, &mut w);
        let mut xh = x.clone();
        let mut zh = z.clone();
        axpy(-step, &u, &mut xh);
        axpy(step, &w, &mut zh);
        problem.set_x().clamp_in_place(&mut xh);
        problem.set_z().clamp_in_place(&mut zh);
        problem.exact_gradient(&xh, &zh, &mut u, &mut w);
        axpy(-step, &u, &mut x);
        axpy(step, &w, &mut z);
        problem.set_x().clamp_in_place(&mut x);
        problem.set_z().clamp_in_place(&mut z);
        if it % 16 == 15 || it + 1 == max_iter {
            gap = problem.primal_dual_gap(&x, &z)?;
        }
    }
    if gap <= tol {
        return Ok((x, z));
    }
    Err(Error::NotConverged {
        method: "extragradient saddle reference",
        iterations: max_iter,
        residual: gap,
    })
}
