//! PCA against a Jacobi eigensolver and t-SNE objective checks.

use heartid_core::embedding::{
    conditional_affinities, joint_affinities, kl_divergence, pca2, silhouette, tsne2, tsne_init, TsneConfig,
};
use heartid_oracles as oracle;
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn gaussian_clusters(k: usize, per: usize, d: usize, sep: f64, seed: u64) -> (Array2<f64>, Vec<u32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(0.0, 1.0).unwrap();
    let centres: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| sep * g.sample(&mut rng)).collect()).collect();
    let mut x = Array2::zeros((k * per, d));
    let mut labels = Vec::new();
    for c in 0..k {
        for i in 0..per {
            for j in 0..d {
                x[[c * per + i, j]] = centres[c][j] + g.sample(&mut rng);
            }
            labels.push(c as u32);
        }
    }
    (x, labels)
}

fn random_rotation(d: usize, seed: u64) -> Array2<f64> {
    // Gram-Schmidt on a Gaussian matrix
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(0.0, 1.0).unwrap();
    let mut q = Array2::<f64>::zeros((d, d));
    for c in 0..d {
        let mut v: Vec<f64> = (0..d).map(|_| g.sample(&mut rng)).collect();
        for p in 0..c {
            let dot: f64 = (0..d).map(|i| v[i] * q[[i, p]]).sum();
            for i in 0..d {
                v[i] -= dot * q[[i, p]];
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for i in 0..d {
            q[[i, c]] = v[i] / norm;
        }
    }
    q
}

fn pairwise(points: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt());
        }
    }
    out
}

#[test]
fn variance_fractions_match_jacobi() {
    for seed in 0..4 {
        let (x, _) = gaussian_clusters(3, 15, 8, 3.0, seed);
        let p = pca2(x.view()).unwrap();
        let mean = x.mean_axis(Axis(0)).unwrap();
        let c = &x - &mean;
        let cov = c.t().dot(&c) / (x.nrows() - 1) as f64;
        let rows: Vec<Vec<f64>> = cov.rows().into_iter().map(|r| r.to_vec()).collect();
        let (vals, _) = oracle::jacobi_eigen(&rows);
        let total: f64 = vals.iter().sum();
        assert!((p.diagnostics[0] - vals[0] / total).abs() <= 1e-9);
        assert!((p.diagnostics[1] - vals[1] / total).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotation_keeps_projected_distances(seed in 0u64..1000) {
        let (x, _) = gaussian_clusters(3, 10, 6, 2.0, seed);
        let r = random_rotation(6, seed + 1);
        let a = pca2(x.view()).unwrap();
        let b = pca2(x.dot(&r).view()).unwrap();
        for (p, q) in pairwise(&a.points).iter().zip(pairwise(&b.points)) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + p));
        }
    }

    #[test]
    fn translation_changes_only_signs(seed in 0u64..1000, shift in -50.0f64..50.0) {
        let (x, _) = gaussian_clusters(2, 12, 5, 2.0, seed);
        let a = pca2(x.view()).unwrap();
        let b = pca2((&x + shift).view()).unwrap();
        for k in 0..2 {
            let same = a.points.iter().zip(&b.points).all(|(p, q)| (p[k] - q[k]).abs() <= 1e-8);
            let flipped = a.points.iter().zip(&b.points).all(|(p, q)| (p[k] + q[k]).abs() <= 1e-8);
            prop_assert!(same || flipped);
        }
    }
}

#[test]
fn bisection_hits_target_entropy() {
    let (x, _) = gaussian_clusters(4, 25, 10, 2.0, 5);
    for perplexity in [5.0, 15.0, 30.0] {
        let p = conditional_affinities(x.view(), perplexity).unwrap();
        for row in p.rows() {
            let sum: f64 = row.sum();
            assert!((sum - 1.0).abs() <= 1e-9);
            let h: f64 = -row.iter().filter(|&&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>();
            assert!((h - perplexity.log2()).abs() <= 1e-4, "perplexity {perplexity}: {h}");
        }
    }
    let joint = joint_affinities(x.view(), 20.0).unwrap();
    assert!(joint.iter().all(|&v| v >= 0.0));
    for i in 0..joint.nrows() {
        for j in 0..i {
            assert_eq!(joint[[i, j]], joint[[j, i]]);
        }
    }
}

#[test]
fn optimisation_lowers_kl() {
    let (x, _) = gaussian_clusters(3, 30, 10, 1.5, 9);
    let cfg = TsneConfig {
        perplexity: 15.0,
        iterations: 400,
        seed: 3,
        ..Default::default()
    };
    let p = joint_affinities(x.view(), cfg.perplexity).unwrap();
    let before = kl_divergence(&p, &tsne_init(x.nrows(), cfg.seed));
    let out = tsne2(x.view(), &cfg).unwrap();
    assert!(out.diagnostics[0] < before, "{} vs {before}", out.diagnostics[0]);
    assert!((out.diagnostics[0] - kl_divergence(&p, &out.points)).abs() < 1e-12);
}

#[test]
fn separated_clusters_stay_separated() {
    let (x, labels) = gaussian_clusters(3, 40, 20, 4.0, 2);
    let out = tsne2(x.view(), &TsneConfig { seed: 7, ..Default::default() }).unwrap();
    assert_eq!(out.len(), 120);
    let s = silhouette(&out.points, &labels);
    assert!(s >= 0.5, "silhouette {s}");
}

#[test]
fn tsne_is_deterministic() {
    let (x, _) = gaussian_clusters(2, 20, 5, 3.0, 4);
    let cfg = TsneConfig {
        perplexity: 8.0,
        iterations: 200,
        seed: 11,
        ..Default::default()
    };
    assert_eq!(tsne2(x.view(), &cfg).unwrap(), tsne2(x.view(), &cfg).unwrap());
}
