//! Random QCQP benchmarks.
//!
//! Objective terms are `1/2 ||H x - c||^2` with `H` (p x n) and `c` (p) drawn
//! i.i.d. standard normal and then normalized; constraint terms are
//! `1/2 x^T Q x + a^T x - b` with `Q = G^T G / ||G^T G||_2` for an i.i.d.
//! normal `G`, `a` normalized Gaussian and `b ~ U(0.1, 1.1)`.
//!
//! Two problem forms share this law: [`QcqpExpectation`] draws fresh terms on
//! every oracle call, [`QcqpFiniteSum`] fixes `N` objective and `M` constraint
//! terms once.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::sample_indices;
use crate::boxset::BoxSet;
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{axpy, dot, gram, mat_t_vec_acc, mat_vec, norm2, quad_form, sym_max_eigenvalue};
use crate::problem::{ConstraintSink, DeterministicProgram, StochasticProgram};
use crate::rng::{seeded, Stream};

/// Half-width of the QCQP feasible box `[-10, 10]^n`.
pub const QCQP_BOX: f64 = 10.0;

/// Number of draws frozen into the evaluation sample of expectation problems.
pub const DEFAULT_EVAL_SAMPLES: usize = 100_000;

/// How the Gaussian `H`, `c` and `a` are normalized after drawing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `H` to unit Frobenius norm, `c` and `a` to unit 2-norm.
    #[default]
    UnitNorm,
    /// Keep the raw standard-normal draws.
    Raw,
}

/// Draws single objective/constraint terms from the benchmark law.
#[derive(Debug, Clone, Copy)]
pub struct QcqpSampler {
    pub n: usize,
    pub p: usize,
    pub normalization: Normalization,
}

fn gaussian_vec(rng: &mut dyn RngCore, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

impl QcqpSampler {
    fn normalize(&self, v: &mut [f64]) {
        if self.normalization == Normalization::UnitNorm {
            let nrm = norm2(v);
            if nrm > 0.0 {
                v.iter_mut().for_each(|x| *x /= nrm);
            }
        }
    }

    /// `(H, c)` with `H` row-major `p x n`.
    pub fn objective_term(&self, rng: &mut dyn RngCore) -> (Vec<f64>, Vec<f64>) {
        let mut h = gaussian_vec(rng, self.p * self.n);
        let mut c = gaussian_vec(rng, self.p);
        self.normalize(&mut h);
        self.normalize(&mut c);
        (h, c)
    }

    /// `(Q, a, b)` with `Q` symmetric PSD of unit spectral norm.
    pub fn constraint_term(&self, rng: &mut dyn RngCore) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.n;
        let g = gaussian_vec(rng, n * n);
        let mut q = gram(&g, n, n);
        let lmax = sym_max_eigenvalue(&q, n);
        q.iter_mut().for_each(|v| *v /= lmax);
        let mut a = gaussian_vec(rng, n);
        self.normalize(&mut a);
        let b = loop {
            let b: f64 = rng.random_range(0.1..1.1);
            if b > 0.1 {
                break b;
            }
        };
        (q, a, b)
    }
}

/// `1/2 ||H x - c||^2`, optionally adding `weight * H^T (H x - c)` into `grad`.
fn ls_term(h: &[f64], c: &[f64], p: usize, n: usize, x: &[f64], weight: f64, grad: Option<&mut [f64]>) -> f64 {
    let mut r = vec![0.0; p];
    mat_vec(h, p, n, x, &mut r);
    r.iter_mut().zip(c).for_each(|(ri, ci)| *ri -= ci);
    if let Some(g) = grad {
        mat_t_vec_acc(h, p, n, &r, weight, g);
    }
    0.5 * dot(&r, &r)
}

/// `1/2 x^T Q x + a^T x - b`, optionally adding `weight * (Q x + a)` into `grad`.
fn quad_term(q: &[f64], a: &[f64], b: f64, n: usize, x: &[f64], weight: f64, grad: Option<&mut [f64]>) -> f64 {
    let mut qx = vec![0.0; n];
    mat_vec(q, n, n, x, &mut qx);
    let value = 0.5 * dot(x, &qx) + dot(a, x) - b;
    if let Some(g) = grad {
        axpy(weight, &qx, g);
        axpy(weight, a, g);
    }
    value
}

/// One quadratic constraint `1/2 x^T Q x + a^T x - b <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraint {
    pub q: Vec<f64>,
    pub a: Vec<f64>,
    pub b: f64,
}

/// `min 1/2 x^T P x + q^T x + r  s.t. quadratic constraints, x in box`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub n: usize,
    pub p_mat: Vec<f64>,
    pub q_vec: Vec<f64>,
    pub r: f64,
    pub constraints: Vec<QuadraticConstraint>,
    pub set: BoxSet,
}

impl QuadraticProgram {
    pub fn new(
        p_mat: Vec<f64>,
        q_vec: Vec<f64>,
        r: f64,
        constraints: Vec<QuadraticConstraint>,
        set: BoxSet,
    ) -> Result<Self> {
        let n = q_vec.len();
        ensure_dim("QuadraticProgram P", n * n, p_mat.len())?;
        ensure_dim("QuadraticProgram box", n, set.dim())?;
        for c in &constraints {
            ensure_dim("QuadraticProgram Q_j", n * n, c.q.len())?;
            ensure_dim("QuadraticProgram a_j", n, c.a.len())?;
        }
        Ok(Self {
            n,
            p_mat,
            q_vec,
            r,
            constraints,
            set,
        })
    }
}

impl DeterministicProgram for QuadraticProgram {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let mut px = vec![0.0; self.n];
        mat_vec(&self.p_mat, self.n, self.n, x, &mut px);
        if let Some(g) = grad {
            g.iter_mut()
                .zip(px.iter().zip(&self.q_vec))
                .for_each(|(gi, (a, b))| *gi = a + b);
        }
        0.5 * dot(x, &px) + dot(&self.q_vec, x) + self.r
    }

    fn constraint(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let c = &self.constraints[i];
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                quad_term(&c.q, &c.a, c.b, self.n, x, 1.0, Some(g))
            }
            None => 0.5 * quad_form(&c.q, self.n, x) + dot(&c.a, x) - c.b,
        }
    }
}

/// `min E[1/2 ||H_xi x - c_xi||^2]  s.t.  E[1/2 x^T Q_xi x + a_xi^T x - b_xi] <= 0`.
#[derive(Debug, Clone)]
pub struct QcqpExpectation {
    sampler: QcqpSampler,
    set: BoxSet,
    eval_samples: usize,
}

impl QcqpExpectation {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        Self::with_options(n, p, Normalization::default(), DEFAULT_EVAL_SAMPLES)
    }

    pub fn with_options(n: usize, p: usize, normalization: Normalization, eval_samples: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter("QCQP dimensions must be >= 1".into()));
        }
        if eval_samples == 0 {
            return Err(Error::InvalidParameter("evaluation sample must be non-empty".into()));
        }
        Ok(Self {
            sampler: QcqpSampler { n, p, normalization },
            set: BoxSet::symmetric(n, QCQP_BOX)?,
            eval_samples,
        })
    }

    pub fn sampler(&self) -> &QcqpSampler {
        &self.sampler
    }

    pub fn eval_samples(&self) -> usize {
        self.eval_samples
    }

    /// One draw of `1/2 ||H x - c||^2` (gradient written when requested).
    pub fn sample_objective(&self, x: &[f64], rng: &mut dyn RngCore, grad: Option<&mut [f64]>) -> f64 {
        let (h, c) = self.sampler.objective_term(rng);
        let n = self.sampler.n;
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                ls_term(&h, &c, self.sampler.p, n, x, 1.0, Some(g))
            }
            None => ls_term(&h, &c, self.sampler.p, n, x, 1.0, None),
        }
    }

    /// One draw of `1/2 x^T Q x + a^T x - b` (gradient written when requested).
    pub fn sample_constraint(&self, x: &[f64], rng: &mut dyn RngCore, grad: Option<&mut [f64]>) -> f64 {
        let (q, a, b) = self.sampler.constraint_term(rng);
        let n = self.sampler.n;
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                quad_term(&q, &a, b, n, x, 1.0, Some(g))
            }
            None => quad_term(&q, &a, b, n, x, 1.0, None),
        }
    }

    /// Sample-average approximation over `samples` fresh draws, reduced to the
    /// moments `E[H^T H]`, `E[H^T c]`, `E[||c||^2]`, `E[Q]`, `E[a]`, `E[b]`.
    pub fn frozen(&self, eval_seed: u64, samples: usize) -> QuadraticProgram {
        let QcqpSampler { n, p, .. } = self.sampler;
        let mut rng = seeded(eval_seed, Stream::Eval);
        let mut p_mat = vec![0.0; n * n];
        let mut q_vec = vec![0.0; n];
        let mut r = 0.0;
        let mut q_bar = vec![0.0; n * n];
        let mut a_bar = vec![0.0; n];
        let mut b_bar = 0.0;
        for _ in 0..samples {
            let (h, c) = self.sampler.objective_term(&mut rng);
            axpy(1.0, &gram(&h, p, n), &mut p_mat);
            mat_t_vec_acc(&h, p, n, &c, -1.0, &mut q_vec);
            r += 0.5 * dot(&c, &c);
            let (q, a, b) = self.sampler.constraint_term(&mut rng);
            axpy(1.0, &q, &mut q_bar);
            axpy(1.0, &a, &mut a_bar);
            b_bar += b;
        }
        let inv = 1.0 / samples as f64;
        for v in p_mat.iter_mut().chain(q_vec.iter_mut()).chain(q_bar.iter_mut()).chain(a_bar.iter_mut()) {
            *v *= inv;
        }
        QuadraticProgram {
            n,
            p_mat,
            q_vec,
            r: r * inv,
            constraints: vec![QuadraticConstraint {
                q: q_bar,
                a: a_bar,
                b: b_bar * inv,
            }],
            set: self.set.clone(),
        }
    }
}

impl StochasticProgram for QcqpExpectation {
    fn dim(&self) -> usize {
        self.sampler.n
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn deterministic_constraints(&self) -> bool {
        false
    }

    fn objective_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        ensure_dim("qcqp objective", self.sampler.n, x.len())?;
        if batch == 0 {
            return Err(Error::InvalidParameter("zero batch size".into()));
        }
        let w = weight / batch as f64;
        for _ in 0..batch {
            let (h, c) = self.sampler.objective_term(rng);
            ls_term(&h, &c, self.sampler.p, self.sampler.n, x, w, Some(grad));
        }
        Ok(())
    }

    fn constraint_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        want_grad: bool,
        sink: &mut ConstraintSink<'_>,
    ) -> Result<f64> {
        let n = self.sampler.n;
        ensure_dim("qcqp constraint", n, x.len())?;
        if batch == 0 {
            return Err(Error::InvalidParameter("zero batch size".into()));
        }
        let w = 1.0 / batch as f64;
        let mut grad = if want_grad { vec![0.0; n] } else { Vec::new() };
        let mut value = 0.0;
        for _ in 0..batch {
            let (q, a, b) = self.sampler.constraint_term(rng);
            value += if want_grad {
                quad_term(&q, &a, b, n, x, w, Some(&mut grad))
            } else {
                quad_term(&q, &a, b, n, x, w, None)
            };
        }
        sink(0, value * w, &grad);
        Ok(1.0)
    }

    fn evaluation_program(&self, eval_seed: u64) -> Box<dyn DeterministicProgram + '_> {
        Box::new(self.frozen(eval_seed, self.eval_samples))
    }
}

/// Default cap on stored matrix entries for finite-sum instances (~1 GiB).
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 27;

/// `min (1/2N) sum_i ||H_i x - c_i||^2  s.t. 1/2 x^T Q_j x + a_j^T x - b_j <= 0, j in [M]`.
#[derive(Debug, Clone)]
pub struct QcqpFiniteSum {
    n: usize,
    p: usize,
    big_n: usize,
    big_m: usize,
    h: Vec<f64>,
    c: Vec<f64>,
    q: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    // objective moments: (1/N) sum H^T H, -(1/N) sum H^T c, (1/2N) sum ||c||^2
    p_mat: Vec<f64>,
    q_vec: Vec<f64>,
    r: f64,
    set: BoxSet,
}

impl QcqpFiniteSum {
    pub fn new(n: usize, p: usize, big_n: usize, big_m: usize, seed: u64) -> Result<Self> {
        Self::with_options(n, p, big_n, big_m, seed, Normalization::default(), DEFAULT_MEMORY_BUDGET)
    }

    pub fn with_options(
        n: usize,
        p: usize,
        big_n: usize,
        big_m: usize,
        seed: u64,
        normalization: Normalization,
        memory_budget: usize,
    ) -> Result<Self> {
        if n == 0 || p == 0 || big_n == 0 || big_m == 0 {
            return Err(Error::InvalidParameter("QCQP dimensions must be >= 1".into()));
        }
        let requested = big_m
            .saturating_mul(n * n)
            .saturating_add(big_n.saturating_mul(p * n));
        if requested > memory_budget {
            return Err(Error::MemoryBudget {
                requested,
                budget: memory_budget,
            });
        }
        let sampler = QcqpSampler { n, p, normalization };
        let mut rng = seeded(seed, Stream::Instance);
        let mut h = Vec::with_capacity(big_n * p * n);
        let mut c = Vec::with_capacity(big_n * p);
        for _ in 0..big_n {
            let (hi, ci) = sampler.objective_term(&mut rng);
            h.extend_from_slice(&hi);
            c.extend_from_slice(&ci);
        }
        let mut q = Vec::with_capacity(big_m * n * n);
        let mut a = Vec::with_capacity(big_m * n);
        let mut b = Vec::with_capacity(big_m);
        for _ in 0..big_m {
            let (qj, aj, bj) = sampler.constraint_term(&mut rng);
            q.extend_from_slice(&qj);
            a.extend_from_slice(&aj);
            b.push(bj);
        }
        Self::from_terms(n, p, h, c, q, a, b, BoxSet::symmetric(n, QCQP_BOX)?)
    }

    /// Builds an instance from explicit term data: `h` holds `N` row-major
    /// `p x n` blocks, `c` holds `N` blocks of length `p`, `q` holds `M`
    /// `n x n` blocks and `a` holds `M` blocks of length `n`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_terms(
        n: usize,
        p: usize,
        h: Vec<f64>,
        c: Vec<f64>,
        q: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        set: BoxSet,
    ) -> Result<Self> {
        if n == 0 || p == 0 || b.is_empty() || c.is_empty() || !c.len().is_multiple_of(p) {
            return Err(Error::InvalidParameter("QCQP term data is empty or ragged".into()));
        }
        let big_n = c.len() / p;
        let big_m = b.len();
        ensure_dim("QCQP H blocks", big_n * p * n, h.len())?;
        ensure_dim("QCQP Q blocks", big_m * n * n, q.len())?;
        ensure_dim("QCQP a blocks", big_m * n, a.len())?;
        ensure_dim("QCQP box", n, set.dim())?;
        let mut p_mat = vec![0.0; n * n];
        let mut q_vec = vec![0.0; n];
        let mut r = 0.0;
        for i in 0..big_n {
            let hi = &h[i * p * n..(i + 1) * p * n];
            let ci = &c[i * p..(i + 1) * p];
            axpy(1.0, &gram(hi, p, n), &mut p_mat);
            mat_t_vec_acc(hi, p, n, ci, -1.0, &mut q_vec);
            r += 0.5 * dot(ci, ci);
        }
        let inv = 1.0 / big_n as f64;
        p_mat.iter_mut().chain(q_vec.iter_mut()).for_each(|v| *v *= inv);
        r *= inv;
        Ok(Self {
            n,
            p,
            big_n,
            big_m,
            h,
            c,
            q,
            a,
            b,
            p_mat,
            q_vec,
            r,
            set,
        })
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.n, self.p, self.big_n, self.big_m)
    }

    /// `1/2 ||H_i x - c_i||^2`; gradient overwritten when requested.
    pub fn objective_term(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let (h, c) = self.objective_data(i);
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                ls_term(h, c, self.p, self.n, x, 1.0, Some(g))
            }
            None => ls_term(h, c, self.p, self.n, x, 1.0, None),
        }
    }

    /// `(Q_j, a_j, b_j)`.
    pub fn constraint_data(&self, j: usize) -> (&[f64], &[f64], f64) {
        let nn = self.n * self.n;
        (&self.q[j * nn..(j + 1) * nn], &self.a[j * self.n..(j + 1) * self.n], self.b[j])
    }

    /// `(H_i, c_i)`.
    pub fn objective_data(&self, i: usize) -> (&[f64], &[f64]) {
        let pn = self.p * self.n;
        (&self.h[i * pn..(i + 1) * pn], &self.c[i * self.p..(i + 1) * self.p])
    }

    /// Objective by direct enumeration of all `N` terms.
    pub fn objective_by_enumeration(&self, x: &[f64]) -> f64 {
        (0..self.big_n).map(|i| self.objective_term(i, x, None)).sum::<f64>() / self.big_n as f64
    }
}

impl StochasticProgram for QcqpFiniteSum {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_constraints(&self) -> usize {
        self.big_m
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn deterministic_constraints(&self) -> bool {
        true
    }

    fn objective_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        ensure_dim("qcqp objective", self.n, x.len())?;
        let idx = sample_indices(rng, self.big_n, batch)?;
        let w = weight / idx.len() as f64;
        for i in idx {
            let (h, c) = self.objective_data(i);
            ls_term(h, c, self.p, self.n, x, w, Some(grad));
        }
        Ok(())
    }

    fn constraint_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        want_grad: bool,
        sink: &mut ConstraintSink<'_>,
    ) -> Result<f64> {
        ensure_dim("qcqp constraint", self.n, x.len())?;
        let idx = sample_indices(rng, self.big_m, batch)?;
        let scale = self.big_m as f64 / idx.len() as f64;
        let mut grad = if want_grad { vec![0.0; self.n] } else { Vec::new() };
        for j in idx {
            let (q, a, b) = self.constraint_data(j);
            let value = if want_grad {
                grad.iter_mut().for_each(|v| *v = 0.0);
                quad_term(q, a, b, self.n, x, 1.0, Some(&mut grad))
            } else {
                0.5 * quad_form(q, self.n, x) + dot(a, x) - b
            };
            sink(j, value, &grad);
        }
        Ok(scale)
    }

    fn evaluation_program(&self, _eval_seed: u64) -> Box<dyn DeterministicProgram + '_> {
        Box::new(self)
    }
}

impl DeterministicProgram for QcqpFiniteSum {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_constraints(&self) -> usize {
        self.big_m
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let mut px = vec![0.0; self.n];
        mat_vec(&self.p_mat, self.n, self.n, x, &mut px);
        if let Some(g) = grad {
            g.iter_mut()
                .zip(px.iter().zip(&self.q_vec))
                .for_each(|(gi, (a, b))| *gi = a + b);
        }
        0.5 * dot(x, &px) + dot(&self.q_vec, x) + self.r
    }

    fn constraint(&self, j: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let (q, a, b) = self.constraint_data(j);
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                quad_term(q, a, b, self.n, x, 1.0, Some(g))
            }
            None => 0.5 * quad_form(q, self.n, x) + dot(a, x) - b,
        }
    }
}
