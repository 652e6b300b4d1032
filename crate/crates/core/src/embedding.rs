//! 2-D projections of feature matrices: PCA and exact t-SNE.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMethod {
    Pca,
    Tsne,
}

impl std::str::FromStr for ProjectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Self::Pca),
            "tsne" | "t-sne" => Ok(Self::Tsne),
            other => Err(Error::InvalidConfig(format!("unknown projection method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    /// `None` means `max(N / 12, 1)`.
    pub learning_rate: Option<f64>,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Vec<[f64; 2]>,
    pub method: ProjectionMethod,
    /// t-SNE settings; `None` for PCA.
    pub tsne: Option<TsneConfig>,
    /// PCA: fraction of total variance on each axis. t-SNE: final KL divergence in `[0]`.
    pub diagnostics: [f64; 2],
}

impl Projection2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::DegenerateInput("non-finite value".into()))
    }
}

/// Projects the centred rows onto the top two principal axes. Each axis is
/// signed so that its largest-magnitude loading is positive.
pub fn pca2(x: ArrayView2<'_, f64>) -> Result<Projection2D> {
    let (n, d) = x.dim();
    if n < 3 || d < 2 {
        return Err(Error::DegenerateInput(format!("PCA needs >= 3 rows and >= 2 columns, got {n} x {d}")));
    }
    check_finite(x)?;
    let mean = x.mean_axis(Axis(0)).expect("rows checked");
    let centred = &x - &mean;
    let cov = centred.t().dot(&centred) / (n - 1) as f64;
    let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("all rows are identical".into()));
    }
    let mut axes = Array2::zeros((d, 2));
    for (c, &k) in order.iter().take(2).enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = (0..d).fold(0, |best, i| if v[i].abs() > v[best].abs() { i } else { best });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            axes[[i, c]] = sign * v[i];
        }
    }
    let proj = centred.dot(&axes);
    Ok(Projection2D {
        points: proj.rows().into_iter().map(|r| [r[0], r[1]]).collect(),
        method: ProjectionMethod::Pca,
        tsne: None,
        diagnostics: [
            eig.eigenvalues[order[0]].max(0.0) / total,
            eig.eigenvalues[order[1]].max(0.0) / total,
        ],
    })
}

fn squared_distances(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

/// Conditional affinities `p_{j|i}` (rows sum to 1) with Gaussian precisions
/// fitted by bisection so each row's entropy is `log2(perplexity)` bits
/// within 1e-4.
pub fn conditional_affinities(x: ArrayView2<'_, f64>, perplexity: f64) -> Result<Array2<f64>> {
    let n = x.nrows();
    if !(perplexity > 0.0) {
        return Err(Error::InvalidConfig(format!("perplexity must be positive, got {perplexity}")));
    }
    if (n as f64) <= 3.0 * perplexity {
        return Err(Error::PerplexityTooLarge { perplexity, rows: n });
    }
    check_finite(x)?;
    let dist = squared_distances(x);
    let target = perplexity.log2();
    let mut p = Array2::zeros((n, n));
    let fit_row = |(i, mut row): (usize, ndarray::ArrayViewMut1<'_, f64>)| {
        let di = dist.row(i);
        // shift by the nearest neighbour distance to keep exp() in range
        let dmin = (0..n).filter(|&j| j != i).map(|j| di[j]).fold(f64::INFINITY, f64::min);
        let entropy_at = |beta: f64, out: &mut ndarray::ArrayViewMut1<'_, f64>| -> f64 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                let v = if j == i { 0.0 } else { (-(di[j] - dmin) * beta).exp() };
                out[j] = v;
                sum += v;
                weighted += v * (di[j] - dmin);
            }
            out.mapv_inplace(|v| v / sum);
            // nats -> bits
            (sum.ln() + beta * weighted / sum) / std::f64::consts::LN_2
        };
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut beta = 1.0 / di.iter().sum::<f64>().max(1e-300) * (n - 1) as f64;
        for _ in 0..200 {
            let h = entropy_at(beta, &mut row);
            if (h - target).abs() < 1e-5 {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use ndarray::parallel::prelude::*;
        p.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(fit_row);
    }
    #[cfg(not(feature = "parallel"))]
    {
        p.axis_iter_mut(Axis(0)).enumerate().for_each(fit_row);
    }
    Ok(p)
}

/// Symmetrised joint affinities `(P + P^T) / (2N)`.
pub fn joint_affinities(x: ArrayView2<'_, f64>, perplexity: f64) -> Result<Array2<f64>> {
    let p = conditional_affinities(x, perplexity)?;
    let n = p.nrows() as f64;
    Ok((&p + &p.t()) / (2.0 * n))
}

/// `KL(P || Q)` for the Student-t affinities of the embedding `y`.
pub fn kl_divergence(p: &Array2<f64>, y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                z += student(y[i], y[j]);
            }
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[[i, j]];
            if i != j && pij > 0.0 {
                let q = (student(y[i], y[j]) / z).max(1e-300);
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

fn student(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    1.0 / (1.0 + dx * dx + dy * dy)
}

/// Seeded Gaussian initialisation with standard deviation 1e-4.
pub fn tsne_init(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(0.0, 1e-4).expect("valid std");
    (0..n).map(|_| [g.sample(&mut rng), g.sample(&mut rng)]).collect()
}

/// Exact O(N^2) t-SNE into two dimensions.
pub fn tsne2(x: ArrayView2<'_, f64>, cfg: &TsneConfig) -> Result<Projection2D> {
    let n = x.nrows();
    let p = joint_affinities(x, cfg.perplexity)?;
    let lr = cfg.learning_rate.unwrap_or((n as f64 / 12.0).max(1.0));
    if !(lr > 0.0) {
        return Err(Error::InvalidConfig(format!("learning rate must be positive, got {lr}")));
    }
    let mut y = tsne_init(n, cfg.seed);
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut grad = vec![[0.0f64; 2]; n];

    for iter in 0..cfg.iterations {
        let exaggeration = if iter < cfg.exaggeration_iterations {
            cfg.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < cfg.exaggeration_iterations { 0.5 } else { 0.8 };
        let y_ref = &y;
        let row_z = |i: usize| -> f64 { (0..n).filter(|&j| j != i).map(|j| student(y_ref[i], y_ref[j])).sum() };
        let row_grad = |i: usize, z: f64| -> [f64; 2] {
            let mut g = [0.0; 2];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = student(y_ref[i], y_ref[j]);
                let coef = (exaggeration * p[[i, j]] - w / z) * w;
                g[0] += 4.0 * coef * (y_ref[i][0] - y_ref[j][0]);
                g[1] += 4.0 * coef * (y_ref[i][1] - y_ref[j][1]);
            }
            g
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            // sequential final sum keeps the result independent of scheduling
            let rows: Vec<f64> = (0..n).into_par_iter().map(row_z).collect();
            let z: f64 = rows.iter().sum();
            grad.par_iter_mut().enumerate().for_each(|(i, g)| *g = row_grad(i, z));
        }
        #[cfg(not(feature = "parallel"))]
        {
            let z: f64 = (0..n).map(row_z).sum();
            grad.iter_mut().enumerate().for_each(|(i, g)| *g = row_grad(i, z));
        }
        for i in 0..n {
            for k in 0..2 {
                let same = (grad[i][k] > 0.0) == (velocity[i][k] > 0.0);
                gains[i][k] = if same { gains[i][k] * 0.8 } else { gains[i][k] + 0.2 }.max(0.01);
                velocity[i][k] = momentum * velocity[i][k] - lr * gains[i][k] * grad[i][k];
                y[i][k] += velocity[i][k];
            }
        }
        // keep the embedding centred
        let (mx, my) = y.iter().fold((0.0, 0.0), |(a, b), v| (a + v[0], b + v[1]));
        for v in y.iter_mut() {
            v[0] -= mx / n as f64;
            v[1] -= my / n as f64;
        }
    }
    if y.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return Err(Error::DegenerateInput("t-SNE diverged".into()));
    }
    let kl = kl_divergence(&p, &y);
    Ok(Projection2D {
        points: y,
        method: ProjectionMethod::Tsne,
        tsne: Some(*cfg),
        diagnostics: [kl, 0.0],
    })
}

/// Mean silhouette coefficient of 2-D points under `labels`.
pub fn silhouette(points: &[[f64; 2]], labels: &[u32]) -> f64 {
    let n = points.len();
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut total = 0.0;
    for i in 0..n {
        let mut a = 0.0;
        let mut b = f64::INFINITY;
        for &c in &classes {
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c && j != i).collect();
            if members.is_empty() {
                continue;
            }
            let mean = members.iter().map(|&j| dist(points[i], points[j])).sum::<f64>() / members.len() as f64;
            if c == labels[i] {
                a = mean;
            } else {
                b = b.min(mean);
            }
        }
        total += if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 };
    }
    total / n as f64
}
