//! Small dense kernels on `f64` slices. Matrices are row-major.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// `out = A x` for a `rows x cols` matrix.
pub fn mat_vec(a: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), rows * cols);
    for (r, o) in out.iter_mut().enumerate().take(rows) {
        *o = dot(&a[r * cols..(r + 1) * cols], x);
    }
}

/// `out += alpha * A^T y` for a `rows x cols` matrix.
pub fn mat_t_vec_acc(a: &[f64], rows: usize, cols: usize, y: &[f64], alpha: f64, out: &mut [f64]) {
    debug_assert_eq!(a.len(), rows * cols);
    for r in 0..rows {
        axpy(alpha * y[r], &a[r * cols..(r + 1) * cols], out);
    }
}

/// `A^T A` for a `rows x cols` matrix, as a `cols x cols` matrix.
pub fn gram(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut g = vec![0.0; cols * cols];
    for r in 0..rows {
        let row = &a[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..cols {
                g[i * cols + j] += ri * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            g[i * cols + j] = g[j * cols + i];
        }
    }
    g
}

/// Quadratic form `x^T Q x` for a square `n x n` matrix.
pub fn quad_form(q: &[f64], n: usize, x: &[f64]) -> f64 {
    (0..n).map(|i| x[i] * dot(&q[i * n..(i + 1) * n], x)).sum()
}

/// Largest eigenvalue of a symmetric `n x n` matrix by cyclic Jacobi rotations.
pub fn sym_max_eigenvalue(a: &[f64], n: usize) -> f64 {
    sym_eigenvalues(a, n)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All eigenvalues of a symmetric matrix (unsorted), cyclic Jacobi.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let frob: f64 = libm::sqrt(m.iter().map(|v| v * v).sum::<f64>());
    if frob == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if libm::sqrt(off) <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Spectral norm of a general `rows x cols` matrix.
pub fn spectral_norm(a: &[f64], rows: usize, cols: usize) -> f64 {
    let g = gram(a, rows, cols);
    libm::sqrt(sym_max_eigenvalue(&g, cols).max(0.0))
}
