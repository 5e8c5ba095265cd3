mod common;

use aprid_core::problem::lagrangian_gradient;
use aprid_core::problems::{
    preprocess, synthetic_classification, BilinearSaddle, NpcProblem, QcqpExpectation, QcqpFiniteSum,
    NPC_DEFAULT_BOX,
};
use aprid_core::rng::{seeded, Stream};
use aprid_core::{
    estimate_constraint_value, sample_lagrangian_subgradient, sample_minimax_subgradient, BatchSizes,
    DeterministicProgram, StochasticProgram,
};
use common::Moments;
use rand::RngCore;

const DRAWS: usize = 100_000;

/// Accumulates `(u, w)` moments over `DRAWS` oracle calls.
fn lagrangian_moments<P: StochasticProgram>(
    p: &P,
    x: &[f64],
    z: &[f64],
    batches: BatchSizes,
) -> (Vec<Moments>, Vec<Moments>) {
    let mut rng = seeded(42, Stream::Train);
    let mut mu = vec![Moments::default(); x.len()];
    let mut mw = vec![Moments::default(); z.len()];
    for _ in 0..DRAWS {
        let s = sample_lagrangian_subgradient(p, x, z, batches, &mut rng as &mut dyn RngCore).unwrap();
        mu.iter_mut().zip(&s.u).for_each(|(m, v)| m.push(*v));
        mw.iter_mut().zip(&s.w).for_each(|(m, v)| m.push(*v));
    }
    (mu, mw)
}

fn assert_within(moments: &[Moments], exact: &[f64], factor: f64, what: &str) {
    for (i, (m, e)) in moments.iter().zip(exact).enumerate() {
        let se = m.std_error();
        assert!(
            (m.mean() - e).abs() <= factor * se + 1e-12,
            "{what}[{i}]: mean {} exact {e} se {se}",
            m.mean()
        );
    }
}

fn exact_parts(p: &dyn DeterministicProgram, x: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut g = vec![0.0; x.len()];
    lagrangian_gradient(p, x, z, &mut g);
    let f = (0..z.len()).map(|i| p.constraint(i, x, None)).collect();
    (g, f)
}

#[test]
fn qcqp_expectation_oracle_is_unbiased() {
    let p = QcqpExpectation::new(5, 3).unwrap();
    let x = [0.4, -0.3, 0.8, 0.1, -0.6];
    let z = [0.7];
    let (mu, mw) = lagrangian_moments(&p, &x, &z, BatchSizes::new(1, 1, 1).unwrap());
    let frozen = p.frozen(7, DRAWS);
    let (g, f) = exact_parts(&frozen, &x, &z);
    // the target is itself a sample average of the same size
    let pooled = 4.0 * 2f64.sqrt();
    assert_within(&mu, &g, pooled, "u");
    assert_within(&mw, &f, pooled, "w");
}

#[test]
fn qcqp_finite_sum_oracle_is_unbiased() {
    let p = QcqpFiniteSum::new(4, 3, 40, 30, 2).unwrap();
    let x = [0.9, -1.1, 0.4, 0.7];
    let z: Vec<f64> = (0..30).map(|i| 0.1 * (i % 4) as f64).collect();
    let (mu, mw) = lagrangian_moments(&p, &x, &z, BatchSizes::new(5, 6, 6).unwrap());
    let (g, f) = exact_parts(&p, &x, &z);
    assert_within(&mu, &g, 4.0, "u");
    assert_within(&mw, &f, 4.0, "w");
}

#[test]
fn npc_oracle_is_unbiased() {
    let raw = synthetic_classification(6, 50, 70, 2.0, 8).unwrap();
    let p = NpcProblem::with_offset(&preprocess(&raw).unwrap(), 0.4, NPC_DEFAULT_BOX).unwrap();
    let x = [0.5, -1.0, 0.2, 1.5, -0.3, 0.8];
    let z = [1.3];
    let (mu, mw) = lagrangian_moments(&p, &x, &z, BatchSizes::new(10, 10, 10).unwrap());
    let (g, f) = exact_parts(&p, &x, &z);
    assert_within(&mu, &g, 4.0, "u");
    assert_within(&mw, &f, 4.0, "w");
}

#[test]
fn noisy_bilinear_oracle_is_unbiased() {
    let p = BilinearSaddle::random(4, 3, 1, 0.5).unwrap();
    let exact = BilinearSaddle::random(4, 3, 1, 0.0).unwrap();
    let x = [0.2, -0.5, 0.9, 0.0];
    let z = [-0.4, 0.3, 0.6];
    let (mut u, mut w) = (vec![0.0; 4], vec![0.0; 3]);
    exact.exact_gradient(&x, &z, &mut u, &mut w);
    let mut rng = seeded(5, Stream::Train);
    let mut mu = vec![Moments::default(); 4];
    let mut mw = vec![Moments::default(); 3];
    for _ in 0..DRAWS {
        let s = sample_minimax_subgradient(&p, &x, &z, &mut rng as &mut dyn RngCore).unwrap();
        mu.iter_mut().zip(&s.u).for_each(|(m, v)| m.push(*v));
        mw.iter_mut().zip(&s.w).for_each(|(m, v)| m.push(*v));
    }
    assert_within(&mu, &u, 4.0, "u");
    assert_within(&mw, &w, 4.0, "w");
}

#[test]
fn exact_bilinear_oracle_cases() {
    let p = BilinearSaddle::random(3, 2, 4, 0.0).unwrap();
    let mut rng = seeded(0, Stream::Train);
    let s = sample_minimax_subgradient(&p, &[0.1, 0.2, 0.3], &[0.5, -0.5], &mut rng as &mut dyn RngCore).unwrap();
    let (mut u, mut w) = (vec![0.0; 3], vec![0.0; 2]);
    p.exact_gradient(&[0.1, 0.2, 0.3], &[0.5, -0.5], &mut u, &mut w);
    assert_eq!((s.u, s.w), (u, w));

    let a = p.matrix().to_vec();
    let zero = BilinearSaddle::new(
        a,
        vec![0.0; 3],
        vec![0.0; 2],
        aprid_core::BoxSet::symmetric(3, 1.0).unwrap(),
        aprid_core::BoxSet::symmetric(2, 1.0).unwrap(),
        0.0,
    )
    .unwrap();
    let s = sample_minimax_subgradient(&zero, &[0.0; 3], &[0.0; 2], &mut rng as &mut dyn RngCore).unwrap();
    assert_eq!((s.u, s.w), (vec![0.0; 3], vec![0.0; 2]));
}

#[test]
fn full_batches_give_exact_values() {
    let p = QcqpFiniteSum::new(4, 2, 12, 9, 3).unwrap();
    let x = [0.3, 0.2, -0.8, 1.1];
    let z: Vec<f64> = (0..9).map(|i| i as f64 * 0.2).collect();
    let mut rng = seeded(1, Stream::Train);
    let s = sample_lagrangian_subgradient(&p, &x, &z, BatchSizes::new(12, 9, 9).unwrap(), &mut rng as &mut dyn RngCore)
        .unwrap();
    let (g, f) = exact_parts(&p, &x, &z);
    assert!(common::vec_rel_close(&s.u, &g, 1e-12));
    assert!(common::vec_rel_close(&s.w, &f, 1e-12));
    assert!(s.w_support.is_none());
}

#[test]
fn zero_multipliers_leave_the_objective_gradient() {
    let p = QcqpFiniteSum::new(4, 2, 12, 9, 3).unwrap();
    let x = [0.3, 0.2, -0.8, 1.1];
    let b = BatchSizes::new(12, 3, 3).unwrap();
    let mut rng = seeded(1, Stream::Train);
    let s = sample_lagrangian_subgradient(&p, &x, &[0.0; 9], b, &mut rng as &mut dyn RngCore).unwrap();
    let mut g = vec![0.0; 4];
    p.objective(&x, Some(&mut g));
    assert!(common::vec_rel_close(&s.u, &g, 1e-12));
}

#[test]
fn subsampled_support_is_scaled() {
    let p = QcqpFiniteSum::new(3, 2, 10, 20, 6).unwrap();
    let x = [0.5, -0.5, 1.0];
    let mut rng = seeded(2, Stream::Train);
    let s = sample_lagrangian_subgradient(&p, &x, &[0.1; 20], BatchSizes::new(2, 5, 5).unwrap(), &mut rng as &mut dyn RngCore)
        .unwrap();
    let support = s.w_support.clone().unwrap();
    assert_eq!(support.len(), 5);
    for j in 0..20 {
        if support.contains(&j) {
            let exact = p.constraint(j, &x, None) * 20.0 / 5.0;
            assert!((s.w[j] - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        } else {
            assert_eq!(s.w[j], 0.0);
        }
    }
}

#[test]
fn same_seed_same_stream() {
    let p = QcqpExpectation::new(3, 2).unwrap();
    let draw = || {
        let mut rng = seeded(11, Stream::Train);
        (0..5)
            .map(|_| {
                sample_lagrangian_subgradient(&p, &[0.1, 0.2, 0.3], &[0.5], BatchSizes::default(), &mut rng as &mut dyn RngCore)
                    .unwrap()
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(), draw());
}

#[test]
fn constraint_value_estimates() {
    let p = QcqpFiniteSum::new(4, 2, 10, 200, 12).unwrap();
    let x = [2.0, -2.5, 1.5, 2.0];
    let exact: f64 = (0..200).map(|j| p.constraint(j, &x, None).max(0.0)).sum();
    assert!(exact > 0.0);
    let mut rng = seeded(3, Stream::Train);
    let full = estimate_constraint_value(&p, &x, 200, &mut rng as &mut dyn RngCore).unwrap();
    assert!((full - exact).abs() <= 1e-10 * exact);
    let mut m = Moments::default();
    for _ in 0..10_000 {
        m.push(estimate_constraint_value(&p, &x, 100, &mut rng as &mut dyn RngCore).unwrap());
    }
    assert!((m.mean() - exact).abs() <= 4.0 * m.std_error());

    let raw = synthetic_classification(3, 10, 10, 1.0, 1).unwrap();
    let npc = NpcProblem::with_offset(&preprocess(&raw).unwrap(), 0.4, NPC_DEFAULT_BOX).unwrap();
    let g = estimate_constraint_value(&npc, &[0.3, 0.1, -0.2], 10, &mut rng as &mut dyn RngCore).unwrap();
    assert!((g - npc.constraint(0, &[0.3, 0.1, -0.2], None)).abs() < 1e-14);
}
