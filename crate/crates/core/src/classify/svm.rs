//! Soft-margin binary SVM trained by sequential minimal optimization.
//!
//! The dual problem
//!
//! ```text
//! max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//! s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0
//! ```
//!
//! is solved two multipliers at a time. Each step picks the maximal KKT
//! violating pair, solves the two-variable subproblem analytically and
//! clips it to the box. The solver stops once the violation gap drops
//! below `tol`.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature floor for the pair subproblem when the kernel is not strictly
/// positive definite on the pair.
const TAU: f64 = 1e-12;

/// Floor of the default iteration cap, so tiny problems are not cut off.
pub const MIN_ITER: usize = 10_000;

/// Multipliers below this are not kept as support vectors.
const SV_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match *self {
            Kernel::Linear => a.dot(&b),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    /// Gram matrix `K[i, j] = k(a_i, b_j)`.
    pub fn matrix(&self, a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut k = Array2::zeros((a.nrows(), b.nrows()));
        let fill = |(i, mut row): (usize, ndarray::ArrayViewMut1<'_, f64>)| {
            let ai = a.row(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.eval(ai, b.row(j));
            }
        };
        #[cfg(feature = "parallel")]
        {
            use ndarray::parallel::prelude::*;
            use ndarray::Axis;
            k.axis_iter_mut(Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(fill);
        }
        #[cfg(not(feature = "parallel"))]
        {
            k.rows_mut().into_iter().enumerate().for_each(fill);
        }
        k
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Iteration cap; `None` means `max(10 * n, MIN_ITER)`.
    pub max_iter: Option<usize>,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            c: 10.0,
            tol: 1e-3,
            max_iter: None,
        }
    }
}

/// Raw dual solution over all training points.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision offset `b` in `f(x) = sum a_i y_i K(x_i, x) + b`.
    pub bias: f64,
    /// Dual objective value (maximised).
    pub objective: f64,
    pub iterations: usize,
    /// Final maximal violation gap.
    pub gap: f64,
}

/// SMO on a precomputed Gram matrix. `y` holds labels in `{-1, +1}`.
pub fn solve_dual(gram: ArrayView2<'_, f64>, y: &[f64], cfg: &SmoConfig) -> Result<DualSolution> {
    let n = y.len();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gram.nrows(),
        });
    }
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidConfig(format!("C must be positive, got {}", cfg.c)));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidConfig("binary labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    let c = cfg.c;
    let max_iter = cfg.max_iter.unwrap_or((10 * n).max(MIN_ITER));
    let q = |i: usize, j: usize| y[i] * y[j] * gram[[i, j]];

    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut gap;
    loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if up && v > g_max {
                g_max = v;
                i = t;
            }
            if low && v < g_min {
                g_min = v;
                j = t;
            }
        }
        gap = g_max - g_min;
        if i == usize::MAX || j == usize::MAX || gap < cfg.tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = q(i, j);
        let (qii, qjj) = (gram[[i, i]], gram[[j, j]]);
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // offset from free multipliers, else the midpoint of the feasible interval
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a - a * g).sum::<f64>();
    Ok(DualSolution {
        alpha,
        bias: -rho,
        objective,
        iterations,
        gap,
    })
}

/// Dual objective `sum a - 1/2 a'Qa` for arbitrary multipliers.
pub fn dual_objective(gram: ArrayView2<'_, f64>, y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[[i, j]];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// A trained two-class machine, `f(x) = sum_i coef_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub kernel: Kernel,
    pub c: f64,
    /// Support vectors, one per row.
    pub support_vectors: Array2<f64>,
    /// `a_i y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
}

impl BinaryMachine {
    pub(crate) fn from_solution(x: ArrayView2<'_, f64>, y: &[f64], kernel: Kernel, c: f64, sol: &DualSolution) -> Self {
        let idx: Vec<usize> = (0..y.len()).filter(|&i| sol.alpha[i] > SV_EPS).collect();
        let mut sv = Array2::zeros((idx.len(), x.ncols()));
        for (r, &i) in idx.iter().enumerate() {
            sv.row_mut(r).assign(&x.row(i));
        }
        Self {
            kernel,
            c,
            support_vectors: sv,
            coef: idx.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
            bias: sol.bias,
            objective: sol.objective,
            iterations: sol.iterations,
        }
    }

    pub fn decision(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.support_vectors
            .rows()
            .into_iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_batch(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let k = self.kernel.matrix(x, self.support_vectors.view());
        k.rows()
            .into_iter()
            .map(|row| row.iter().zip(&self.coef).map(|(kv, a)| kv * a).sum::<f64>() + self.bias)
            .collect()
    }
}

/// Trains a binary soft-margin SVM; `y` in `{-1, +1}`.
pub fn train_binary_svm(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    kernel: Kernel,
    cfg: &SmoConfig,
) -> Result<BinaryMachine> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch(x.nrows(), y.len()));
    }
    let gram = kernel.matrix(x, x);
    let sol = solve_dual(gram.view(), y, cfg)?;
    Ok(BinaryMachine::from_solution(x, y, kernel, cfg.c, &sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn symmetric_pair() {
        let x = array![[-1.0], [1.0]];
        let m = train_binary_svm(x.view(), &[-1.0, 1.0], Kernel::Linear, &SmoConfig { c: 1e6, ..Default::default() }).unwrap();
        assert_eq!(m.coef.len(), 2);
        assert!((m.coef[0] + m.coef[1]).abs() < 1e-12);
        assert!((m.coef[1] - 0.5).abs() < 1e-9);
        assert!(m.bias.abs() < 1e-9);
        assert!(m.decision(array![0.0].view()).abs() < 1e-9);
        assert!(m.decision(array![0.3].view()) > 0.0);
    }

    #[test]
    fn xor_is_separable_with_rbf() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let m = train_binary_svm(x.view(), &y, Kernel::Rbf { gamma: 1.0 }, &SmoConfig { c: 10.0, ..Default::default() }).unwrap();
        for (row, &label) in x.rows().into_iter().zip(&y) {
            assert_eq!(m.decision(row).signum(), label);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            train_binary_svm(x.view(), &[1.0, 1.0], Kernel::Linear, &SmoConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let x = array![[0.0], [0.1], [0.2], [0.3], [5.0], [5.2]];
        let y = [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let cfg = SmoConfig {
            max_iter: Some(1),
            ..Default::default()
        };
        assert!(matches!(
            train_binary_svm(x.view(), &y, Kernel::Rbf { gamma: 0.5 }, &cfg),
            Err(Error::NoConvergence { iterations: 1, .. })
        ));
    }

    #[test]
    fn batch_and_single_decisions_agree() {
        let x = array![[0.0, 1.0], [1.0, 0.5], [2.0, 2.0], [3.0, 1.0], [0.5, 0.2]];
        let y = [-1.0, -1.0, 1.0, 1.0, -1.0];
        let m = train_binary_svm(x.view(), &y, Kernel::Rbf { gamma: 0.7 }, &SmoConfig::default()).unwrap();
        let batch = m.decision_batch(x.view());
        for (row, b) in x.rows().into_iter().zip(batch) {
            assert!((m.decision(row) - b).abs() < 1e-12);
        }
    }
}
