//! Bilinear saddle problem `L(x, z) = x^T A z + b^T x - c^T z` over boxes,
//! with an optionally noisy gradient oracle. Its primal-dual gap has a closed
//! form, which makes it the test bed for the minimax solver.

use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::boxset::BoxSet;
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{dot, mat_t_vec_acc, mat_vec, norm2, spectral_norm};
use crate::problem::MinimaxProblem;
use crate::rng::{seeded, Stream};

#[derive(Debug, Clone)]
pub struct BilinearSaddle {
    n: usize,
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    set_x: BoxSet,
    set_z: BoxSet,
    noise_sigma: f64,
}

/// `max_{y in box} coef^T y`.
fn box_max_linear(coef: &[f64], set: &BoxSet) -> f64 {
    coef.iter()
        .zip(set.lower().iter().zip(set.upper()))
        .map(|(g, (lo, hi))| (g * lo).max(g * hi))
        .sum()
}

/// `min_{y in box} coef^T y`.
fn box_min_linear(coef: &[f64], set: &BoxSet) -> f64 {
    coef.iter()
        .zip(set.lower().iter().zip(set.upper()))
        .map(|(g, (lo, hi))| (g * lo).min(g * hi))
        .sum()
}

impl BilinearSaddle {
    /// `A` is row-major `n x m`.
    pub fn new(
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        set_x: BoxSet,
        set_z: BoxSet,
        noise_sigma: f64,
    ) -> Result<Self> {
        let (n, m) = (b.len(), c.len());
        ensure_dim("bilinear A", n * m, a.len())?;
        ensure_dim("bilinear X", n, set_x.dim())?;
        ensure_dim("bilinear Z", m, set_z.dim())?;
        if !(noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise level must be >= 0".into()));
        }
        Ok(Self {
            n,
            m,
            a,
            b,
            c,
            set_x,
            set_z,
            noise_sigma,
        })
    }

    /// Random instance: `A` standard normal scaled to unit spectral norm,
    /// `b`, `c` standard normal scaled to unit norm, `X = [-1,1]^n`, `Z = [-1,1]^m`.
    pub fn random(n: usize, m: usize, seed: u64, noise_sigma: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
        }
        let mut rng = seeded(seed, Stream::Instance);
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect() };
        let mut a = draw(n * m);
        let mut b = draw(n);
        let mut c = draw(m);
        let sa = spectral_norm(&a, n, m);
        a.iter_mut().for_each(|v| *v /= sa);
        let (nb, nc) = (norm2(&b), norm2(&c));
        b.iter_mut().for_each(|v| *v /= nb);
        c.iter_mut().for_each(|v| *v /= nc);
        Self::new(a, b, c, BoxSet::symmetric(n, 1.0)?, BoxSet::symmetric(m, 1.0)?, noise_sigma)
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// `(A z + b, A^T x - c)`.
    pub fn exact_gradient(&self, x: &[f64], z: &[f64], u: &mut [f64], w: &mut [f64]) {
        mat_vec(&self.a, self.n, self.m, z, u);
        u.iter_mut().zip(&self.b).for_each(|(ui, bi)| *ui += bi);
        w.iter_mut().zip(&self.c).for_each(|(wi, ci)| *wi = -ci);
        mat_t_vec_acc(&self.a, self.n, self.m, x, 1.0, w);
    }
}

impl MinimaxProblem for BilinearSaddle {
    fn dim_x(&self) -> usize {
        self.n
    }

    fn dim_z(&self) -> usize {
        self.m
    }

    fn set_x(&self) -> &BoxSet {
        &self.set_x
    }

    fn set_z(&self) -> &BoxSet {
        &self.set_z
    }

    fn sample_gradient(&self, x: &[f64], z: &[f64], rng: &mut dyn RngCore, u: &mut [f64], w: &mut [f64]) {
        self.exact_gradient(x, z, u, w);
        if self.noise_sigma > 0.0 {
            for v in u.iter_mut().chain(w.iter_mut()) {
                let e: f64 = rng.sample(StandardNormal);
                *v += self.noise_sigma * e;
            }
        }
    }

    fn value(&self, x: &[f64], z: &[f64]) -> f64 {
        let mut az = alloc::vec![0.0; self.n];
        mat_vec(&self.a, self.n, self.m, z, &mut az);
        dot(x, &az) + dot(&self.b, x) - dot(&self.c, z)
    }

    /// Closed form: both inner problems are linear over a box, so each is
    /// solved by picking, per coordinate, the bound favoured by the sign of
    /// the coefficient.
    fn primal_dual_gap(&self, x_bar: &[f64], z_bar: &[f64]) -> Result<f64> {
        ensure_dim("gap x", self.n, x_bar.len())?;
        ensure_dim("gap z", self.m, z_bar.len())?;
        // max_z L(x_bar, z) = b^T x_bar + max_z (A^T x_bar - c)^T z
        let mut coef_z = alloc::vec![0.0; self.m];
        coef_z.iter_mut().zip(&self.c).for_each(|(v, ci)| *v = -ci);
        mat_t_vec_acc(&self.a, self.n, self.m, x_bar, 1.0, &mut coef_z);
        let upper = dot(&self.b, x_bar) + box_max_linear(&coef_z, &self.set_z);
        // min_x L(x, z_bar) = -c^T z_bar + min_x (A z_bar + b)^T x
        let mut coef_x = alloc::vec![0.0; self.n];
        mat_vec(&self.a, self.n, self.m, z_bar, &mut coef_x);
        coef_x.iter_mut().zip(&self.b).for_each(|(v, bi)| *v += bi);
        let lower = -dot(&self.c, z_bar) + box_min_linear(&coef_x, &self.set_x);
        Ok(upper - lower)
    }
}
