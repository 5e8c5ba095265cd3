mod common;

use aprid_core::linalg::norm2;
use aprid_core::{clip_gradient, project_box_weighted, BoxSet, ErgodicAverager};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Weighted least-squares argmin over a 0.001 grid of `[-1, 1]^2`.
fn grid_projection(y: &[f64], w: &[f64]) -> [f64; 2] {
    let g = common::grid(-1.0, 1.0, 1e-3);
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for &a in &g {
        let da = w[0] * (a - y[0]).powi(2);
        for &b in &g {
            let v = da + w[1] * (b - y[1]).powi(2);
            if v < best.1 {
                best = ([a, b], v);
            }
        }
    }
    best.0
}

#[test]
fn clip_examples() {
    assert_eq!(clip_gradient(&[6.0, 8.0], 5.0).unwrap(), vec![3.0, 4.0]);
    assert_eq!(clip_gradient(&[1.0, -2.0], 10.0).unwrap(), vec![1.0, -2.0]);
    assert_eq!(clip_gradient(&[0.0, 0.0], 1.0).unwrap(), vec![0.0, 0.0]);
    assert!(clip_gradient(&[f64::NAN, 0.0], 1.0).is_err());
    assert!(clip_gradient(&[1.0], 0.0).is_err());
}

#[test]
fn projection_examples() {
    let b = BoxSet::symmetric(2, 10.0).unwrap();
    assert_eq!(project_box_weighted(&[12.0, -3.0], &b, &[1.0, 4.0]).unwrap(), vec![10.0, -3.0]);
    let unit = BoxSet::symmetric(2, 1.0).unwrap();
    let p = project_box_weighted(&[0.37, -0.88], &unit, &[2.0, 5.0]).unwrap();
    let g = grid_projection(&[0.37, -0.88], &[2.0, 5.0]);
    assert!((p[0] - g[0]).abs() <= 1e-3 && (p[1] - g[1]).abs() <= 1e-3);
}

#[test]
fn projection_matches_grid_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let unit = BoxSet::symmetric(2, 1.0).unwrap();
    for _ in 0..100 {
        let y = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let w = [rng.random_range(0.01..10.0), rng.random_range(0.01..10.0)];
        let p = project_box_weighted(&y, &unit, &w).unwrap();
        let g = grid_projection(&y, &w);
        for i in 0..2 {
            assert!((p[i] - g[i]).abs() <= 1e-3, "y={y:?} p={p:?} grid={g:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn clipped_norm_is_bounded(u in prop::collection::vec(-1e6f64..1e6, 1..20), theta in 1e-4f64..1e3) {
        let c = clip_gradient(&u, theta).unwrap();
        prop_assert!(norm2(&c) <= theta + 1e-12 * theta.max(1.0));
        if norm2(&u) <= theta {
            prop_assert_eq!(c, u);
        }
    }
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_weight_free(
        y in prop::collection::vec(-20f64..20.0, 1..10),
        w_seed in prop::collection::vec(1e-6f64..1e3, 10),
        half in 0.1f64..15.0,
    ) {
        let set = BoxSet::symmetric(y.len(), half).unwrap();
        let w = &w_seed[..y.len()];
        let p = project_box_weighted(&y, &set, w).unwrap();
        prop_assert!(set.contains(&p));
        prop_assert_eq!(&project_box_weighted(&p, &set, w).unwrap(), &p);
        prop_assert_eq!(&p, &set.project(&y));
    }
}

/// `sum_j (sum_{k=j}^t alpha_k beta^{k-j}) x^j / sum_j sum_{k=j}^t alpha_k beta^{k-j}`.
fn double_sum_average(xs: &[Vec<f64>], alpha: &[f64], beta: f64) -> Vec<f64> {
    let t = xs.len();
    let mut num = vec![0.0; xs[0].len()];
    let mut den = 0.0;
    for (j, xj) in xs.iter().enumerate() {
        let w: f64 = (j..t).map(|k| alpha[k] * beta.powi((k - j) as i32)).sum();
        for (n, x) in num.iter_mut().zip(xj) {
            *n += w * x;
        }
        den += w;
    }
    num.iter().map(|v| v / den).collect()
}

#[test]
fn streaming_average_matches_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..100 {
        let t = rng.random_range(1..=100);
        let dim = rng.random_range(1..6);
        let beta = rng.random_range(0.05..0.99);
        let mut a = rng.random_range(0.1..5.0);
        let mut alpha = Vec::new();
        let mut xs = Vec::new();
        let mut avg = ErgodicAverager::new(dim, beta);
        for _ in 0..t {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
            avg.push(&x, a);
            alpha.push(a);
            xs.push(x);
            a *= rng.random_range(0.8..1.0);
        }
        let direct = double_sum_average(&xs, &alpha, beta);
        let streamed = avg.finalize().unwrap();
        assert!(common::vec_rel_close(&streamed, &direct, 1e-10), "case {case}");
        let sum_alpha: f64 = alpha.iter().sum();
        assert!(avg.normalizer() >= sum_alpha * (1.0 - 1e-12));
    }
}

#[test]
fn constant_step_weights_follow_geometric_profile() {
    // with unit-vector iterates the average exposes each weight directly
    let (t, beta, alpha) = (30, 0.9, 0.37);
    let mut avg = ErgodicAverager::new(t, beta);
    for j in 0..t {
        let mut e = vec![0.0; t];
        e[j] = 1.0;
        avg.push(&e, alpha);
    }
    let w = avg.finalize().unwrap();
    let profile: Vec<f64> = (1..=t).map(|j| 1.0 - beta.powi((t - j + 1) as i32)).collect();
    let total: f64 = profile.iter().sum();
    for j in 0..t {
        assert!(common::rel_close(w[j], profile[j] / total, 1e-12));
    }
}

#[test]
fn single_push_returns_the_point() {
    let mut avg = ErgodicAverager::new(3, 0.9);
    avg.push(&[1.0, -2.0, 3.5], 0.4);
    assert_eq!(avg.finalize().unwrap(), vec![1.0, -2.0, 3.5]);
}
