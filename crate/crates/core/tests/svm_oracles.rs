//! SMO against a brute-force QP solver, KKT conditions and AUC counting.

use heartid_core::classify::{roc_auc, solve_dual, train_binary_svm, Kernel, SmoConfig};
use heartid_oracles as oracle;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn problem(n: usize, overlap: f64, seed: u64) -> (Array2<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, overlap).unwrap();
    let mut x = Array2::zeros((n, 2));
    let y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    for i in 0..n {
        x[[i, 0]] = y[i] + noise.sample(&mut rng);
        x[[i, 1]] = 0.5 * y[i] + noise.sample(&mut rng);
    }
    (x, y)
}

fn gram_rows(k: &Array2<f64>) -> Vec<Vec<f64>> {
    k.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[test]
fn smo_matches_projected_gradient_on_small_problems() {
    for (seed, n) in [(1u64, 20usize), (2, 20), (3, 35), (4, 50)] {
        for kernel in [Kernel::Linear, Kernel::Rbf { gamma: 0.5 }] {
            let (x, y) = problem(n, 0.9, seed);
            let c = 1.0;
            let k = kernel.matrix(x.view(), x.view());
            let cfg = SmoConfig { c, tol: 1e-6, max_iter: None };
            let sol = solve_dual(k.view(), &y, &cfg).unwrap();
            let alpha_ref = oracle::projected_gradient_qp(&gram_rows(&k), &y, c, 1e-8, 2_000_000);
            let w_ref = oracle::dual_objective(&gram_rows(&k), &y, &alpha_ref);
            let w = oracle::dual_objective(&gram_rows(&k), &y, &sol.alpha);
            assert!(((w - w_ref) / w_ref).abs() <= 1e-4, "seed {seed} {kernel:?}: {w} vs {w_ref}");
            assert!(w >= w_ref * (1.0 - 1e-4));
            assert!((sol.objective - w).abs() <= 1e-9 * w.abs());
            let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
            assert!(balance.abs() <= 1e-6);
            assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        }
    }
}

#[test]
fn kkt_holds_at_default_tolerance() {
    for seed in 0..6 {
        let (x, y) = problem(40, 0.7, seed);
        let cfg = SmoConfig::default();
        let kernel = Kernel::Rbf { gamma: 0.8 };
        let m = train_binary_svm(x.view(), &y, kernel, &cfg).unwrap();
        let k = kernel.matrix(x.view(), x.view());
        let sol = solve_dual(k.view(), &y, &cfg).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            let margin = y[i] * m.decision(row);
            let a = sol.alpha[i];
            if a > 1e-8 && a < cfg.c - 1e-8 {
                assert!((margin - 1.0).abs() <= cfg.tol, "free SV {i}: {margin}");
            } else if a <= 1e-8 {
                assert!(margin >= 1.0 - cfg.tol, "non-SV {i}: {margin}");
            } else {
                assert!(margin <= 1.0 + cfg.tol, "bounded SV {i}: {margin}");
            }
        }
        let balance: f64 = m.coef.iter().sum();
        assert!(balance.abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn smo_objective_never_below_oracle(seed in 0u64..10_000, n in 6usize..30, c in 0.1f64..10.0) {
        let (x, y) = problem(n, 1.2, seed);
        let kernel = Kernel::Rbf { gamma: 0.3 };
        let k = kernel.matrix(x.view(), x.view());
        let sol = solve_dual(k.view(), &y, &SmoConfig { c, tol: 1e-6, max_iter: None }).unwrap();
        let alpha_ref = oracle::projected_gradient_qp(&gram_rows(&k), &y, c, 1e-9, 2_000_000);
        let w_ref = oracle::dual_objective(&gram_rows(&k), &y, &alpha_ref);
        let w = oracle::dual_objective(&gram_rows(&k), &y, &sol.alpha);
        prop_assert!(w >= w_ref - 1e-4 * w_ref.abs());
    }

    #[test]
    fn auc_matches_pair_counting(
        raw in prop::collection::vec((0u8..8, any::<bool>()), 2..120),
        scale in 0.01f64..100.0,
    ) {
        let scores: Vec<f64> = raw.iter().map(|(s, _)| *s as f64 * scale).collect();
        let pos: Vec<bool> = raw.iter().map(|(_, p)| *p).collect();
        if let Some(a) = roc_auc(&scores, &pos) {
            prop_assert!((a - oracle::pairwise_auc(&scores, &pos)).abs() <= 1e-12);
        }
    }
}

#[test]
fn auc_matches_pair_counting_on_continuous_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let n = rng.random_range(2..200);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pos: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        if let Some(a) = roc_auc(&scores, &pos) {
            assert!((a - oracle::pairwise_auc(&scores, &pos)).abs() <= 1e-12);
        }
    }
}
