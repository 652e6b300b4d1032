//! Brute-force reference implementations for tests.
//!
//! Everything here is deliberately naive: direct summations, dense Riemann
//! sums and plain iterative solvers, written without sharing code with the
//! library they check.

use std::f64::consts::PI;

/// `C_k = sum_n x_n cos(pi k (n + 1/2) / N)` by direct summation.
pub fn naive_dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * (PI * k as f64 * (i as f64 + 0.5) / n).cos())
                .sum()
        })
        .collect()
}

/// Mel-scale closed forms: `(m_tilde, centres f_0..f_{L+1})`.
pub fn mel_centres(l: usize, f_ref: f64, f_prime: f64, fs: f64) -> (f64, Vec<f64>) {
    let m_tilde = f_prime / (f_prime / f_ref + 1.0).ln();
    let top = m_tilde * (1.0 + fs / (2.0 * f_ref)).ln();
    let centres = (0..=l + 1)
        .map(|i| f_ref * ((top * i as f64 / (l + 1) as f64) / m_tilde).exp() - f_ref)
        .collect();
    (m_tilde, centres)
}

/// Triangle `H_l(f)` with unit area on `[c[l], c[l+2]]`.
pub fn triangle(c: &[f64], l: usize, f: f64) -> f64 {
    let (a, b, e) = (c[l], c[l + 1], c[l + 2]);
    let h = 2.0 / (e - a);
    if f >= a && f < b {
        h * (f - a) / (b - a)
    } else if f >= b && f <= e {
        h * (e - f) / (e - b)
    } else {
        0.0
    }
}

/// Linear interpolation through sorted `(x, y)` knots, constant outside.
pub fn interp(knots: &[(f64, f64)], x: f64) -> f64 {
    if x <= knots[0].0 {
        return knots[0].1;
    }
    let last = knots[knots.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Midpoint Riemann sum of `g` over `[a, b]` with `n` cells.
pub fn riemann(a: f64, b: f64, n: usize, mut g: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| g(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// `int S(f) H_l(f) df` by a midpoint sum with `cells` cells across the
/// filter's support.
pub fn filter_integral(centres: &[f64], l: usize, cells: usize, s: impl Fn(f64) -> f64) -> f64 {
    riemann(centres[l], centres[l + 2], cells, |f| s(f) * triangle(centres, l, f))
}

/// Time integral over `[t0, t0 + duration]` of a quantity known at frame
/// centres, interpolated linearly and held constant beyond the end frames.
pub fn time_integral(times: &[f64], values: &[f64], t0: f64, duration: f64, cells: usize) -> f64 {
    let knots: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
    riemann(t0, t0 + duration, cells, |t| interp(&knots, t))
}

/// Dual objective `sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij`.
pub fn dual_objective(k: &[Vec<f64>], y: &[f64], a: &[f64]) -> f64 {
    let n = y.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += a[i] * a[j] * y[i] * y[j] * k[i][j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * q
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // g is non-increasing in mu
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximises the soft-margin SVM dual by projected gradient ascent until the
/// step changes the iterate by less than `tol`.
pub fn projected_gradient_qp(k: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = y.len();
    // step 1/L with L bounded by the Frobenius norm of Q
    let lip: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| k[i][j] * k[i][j])
        .sum::<f64>()
        .sqrt();
    let step = 1.0 / lip.max(1e-12);
    let mut a = vec![0.0; n];
    for _ in 0..max_iter {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - y[i] * (0..n).map(|j| a[j] * y[j] * k[i][j]).sum::<f64>())
            .collect();
        let v: Vec<f64> = a.iter().zip(&grad).map(|(ai, gi)| ai + step * gi).collect();
        let next = project(&v, y, c);
        let delta = next.iter().zip(&a).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        a = next;
        if delta < tol {
            break;
        }
    }
    a
}

/// AUC as the fraction of (positive, negative) pairs ordered correctly,
/// ties counting one half.
pub fn pairwise_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if positive[i] && !positive[j] {
                den += 1.0;
                num += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

/// Eigenvalues and eigenvectors (columns) of a symmetric matrix by cyclic
/// Jacobi rotations, eigenvalues in descending order.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}
