//! Mel-scale triangular filter bank and its integration over a sampled
//! spectrogram.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Spectrogram;

/// Parameters of the warped mel scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelBankConfig {
    /// Number of triangular filters `L`.
    pub n_filters: usize,
    /// Reference frequency `f~` in Hz.
    pub f_ref: f64,
    /// Upper anchor frequency `f'` in Hz.
    pub f_prime: f64,
    /// Sampling rate of the analysed signal in Hz.
    pub fs: f64,
}

impl MelBankConfig {
    pub fn new(fs: f64) -> Self {
        Self {
            n_filters: 64,
            f_ref: 5.0,
            f_prime: 1000.0,
            fs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.n_filters == 0 {
            return Err(Error::InvalidConfig("mel bank needs at least one filter".into()));
        }
        if !positive(self.f_ref) || !positive(self.f_prime) || !positive(self.fs) {
            return Err(Error::InvalidConfig(format!(
                "mel bank frequencies must be positive: f_ref={}, f_prime={}, fs={}",
                self.f_ref, self.f_prime, self.fs
            )));
        }
        Ok(())
    }
}

/// `L` triangular filters; filter `l` spans `centers[l] .. centers[l + 2]`
/// and peaks at `centers[l + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelBank {
    pub config: MelBankConfig,
    /// `f_0 ..= f_{L+1}` in Hz.
    pub centers: Vec<f64>,
    /// `m_0 ..= m_{L+1}`.
    pub mel_points: Vec<f64>,
    pub m_tilde: f64,
}

impl MelBank {
    pub fn n_filters(&self) -> usize {
        self.config.n_filters
    }

    pub fn fs(&self) -> f64 {
        self.config.fs
    }

    fn knots(&self, l: usize) -> (f64, f64, f64) {
        (self.centers[l], self.centers[l + 1], self.centers[l + 2])
    }
}

/// Builds the bank: `m_l = m~ * l/(L+1) * ln(1 + fs/(2 f~))` and
/// `f_l = f~ (exp(m_l / m~) - 1)` with `m~ = f' / ln(f'/f~ + 1)`.
pub fn build_mel_bank(cfg: &MelBankConfig) -> Result<MelBank> {
    cfg.validate()?;
    let m_tilde = cfg.f_prime / (cfg.f_prime / cfg.f_ref + 1.0).ln();
    let span = (1.0 + cfg.fs / (2.0 * cfg.f_ref)).ln();
    let l1 = (cfg.n_filters + 1) as f64;
    let mel_points: Vec<f64> = (0..=cfg.n_filters + 1)
        .map(|l| m_tilde * (l as f64 / l1) * span)
        .collect();
    let centers = mel_points
        .iter()
        .map(|m| cfg.f_ref * (m / m_tilde).exp_m1())
        .collect();
    Ok(MelBank {
        config: *cfg,
        centers,
        mel_points,
        m_tilde,
    })
}

fn triangle(a: f64, b: f64, c: f64, f: f64) -> f64 {
    if f >= a && f < b {
        2.0 * (f - a) / ((b - a) * (c - a))
    } else if f >= b && f < c {
        2.0 * (c - f) / ((c - b) * (c - a))
    } else {
        0.0
    }
}

/// Response `H_l(f)` of filter `l`; unit area, peak `2 / (f_{l+2} - f_l)`.
pub fn filter_response(bank: &MelBank, l: usize, f: f64) -> Result<f64> {
    if l >= bank.n_filters() {
        return Err(Error::IndexOutOfRange {
            index: l,
            len: bank.n_filters(),
        });
    }
    let (a, b, c) = bank.knots(l);
    Ok(triangle(a, b, c, f))
}

/// Filter-bank energies integrated over time and one side of the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelEnergies {
    /// `M_{+0} .. M_{+(L-1)}`.
    pub positive: Vec<f64>,
    /// `M_{-0} .. M_{-(L-1)}`; `None` for one-sided input.
    pub negative: Option<Vec<f64>>,
    /// Integration length `T_0` in seconds.
    pub duration: f64,
}

/// Quadrature weights `w[l, k] = integral of phi_k(u) H_l(u) du`, where
/// `phi_k` are the hat functions of the piecewise-linear interpolant on
/// `grid` (constant beyond the end points). Exact for that interpolant.
pub(crate) fn filter_weights(bank: &MelBank, grid: &[f64]) -> Array2<f64> {
    let n = grid.len();
    let mut w = Array2::zeros((bank.n_filters(), n));
    if n == 0 {
        return w;
    }
    for l in 0..bank.n_filters() {
        let (a, b, c) = bank.knots(l);
        let mut pts = vec![a, b, c];
        pts.extend(grid.iter().copied().filter(|&u| u > a && u < c));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for seg in pts.windows(2) {
            let (x0, x1) = (seg[0], seg[1]);
            let xm = 0.5 * (x0 + x1);
            let h = |x: f64| triangle(a, b, c, x);
            let (h0, hm, h1) = (h(x0), h(xm), h(x1));
            let width = x1 - x0;
            let j = grid.partition_point(|&u| u <= xm);
            if j == 0 || j == n {
                let k = if j == 0 { 0 } else { n - 1 };
                w[[l, k]] += width / 6.0 * (h0 + 4.0 * hm + h1);
                continue;
            }
            let (u0, u1) = (grid[j - 1], grid[j]);
            let lam = |x: f64| (x - u0) / (u1 - u0);
            let (l0, lm, l1) = (lam(x0), lam(xm), lam(x1));
            w[[l, j - 1]] += width / 6.0
                * ((1.0 - l0) * h0 + 4.0 * (1.0 - lm) * hm + (1.0 - l1) * h1);
            w[[l, j]] += width / 6.0 * (l0 * h0 + 4.0 * lm * hm + l1 * h1);
        }
    }
    w
}

/// Trapezoidal weights over frame centres, with the first and last frame
/// held constant out to the ends of the analysed interval.
pub(crate) fn time_weights(spec: &Spectrogram) -> Vec<f64> {
    let t = &spec.frame_times;
    let n = t.len();
    let start = spec.t0;
    let end = spec.t0 + spec.duration;
    if n == 1 {
        return vec![spec.duration];
    }
    (0..n)
        .map(|i| {
            let left = if i == 0 { t[0] - start } else { 0.5 * (t[i] - t[i - 1]) };
            let right = if i == n - 1 { end - t[n - 1] } else { 0.5 * (t[i + 1] - t[i]) };
            left + right
        })
        .collect()
}

/// Incoherent integration of `S(t, f) H_l(+-f)` over time and each half of
/// the frequency axis.
///
/// Time uses the trapezoidal rule over frame centres; frequency integrates
/// the linear interpolant of `S` against the exact triangle. A two-sided
/// axis with an even window has no `+fs/2` bin; the `-fs/2` bin stands in
/// for it since the DFT is periodic.
pub fn mel_energies(spec: &Spectrogram, bank: &MelBank) -> Result<MelEnergies> {
    if (spec.fs - bank.fs()).abs() > 1e-9 * bank.fs() {
        return Err(Error::AxisMismatch(format!(
            "spectrogram fs {} vs bank fs {}",
            spec.fs,
            bank.fs()
        )));
    }
    let nyq = spec.fs / 2.0;
    let tol = 1e-9 * nyq;
    if spec.freqs.is_empty() || spec.n_bins() != spec.freqs.len() {
        return Err(Error::AxisMismatch("empty or inconsistent frequency axis".into()));
    }
    if spec.freqs.iter().any(|f| f.abs() > nyq + tol) || spec.freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::AxisMismatch("frequency axis not increasing within +-fs/2".into()));
    }
    if spec.two_sided && spec.freqs[0] >= 0.0 {
        return Err(Error::AxisMismatch("two-sided spectrogram without negative bins".into()));
    }
    if !spec.two_sided && spec.freqs[0] < 0.0 {
        return Err(Error::AxisMismatch("one-sided spectrogram with negative bins".into()));
    }

    let tw = time_weights(spec);
    let integrated: Vec<f64> = spec
        .values
        .columns()
        .into_iter()
        .map(|col| col.iter().zip(&tw).map(|(s, w)| s * w).sum())
        .collect();

    let mut pos_grid = Vec::new();
    let mut pos_vals = Vec::new();
    for (&f, &v) in spec.freqs.iter().zip(&integrated) {
        if f >= 0.0 {
            pos_grid.push(f);
            pos_vals.push(v);
        }
    }
    if spec.two_sided && (spec.freqs[0] + nyq).abs() <= tol {
        pos_grid.push(nyq);
        pos_vals.push(integrated[0]);
    }
    let positive = project(bank, &pos_grid, &pos_vals);

    let negative = spec.two_sided.then(|| {
        let mut grid = Vec::new();
        let mut vals = Vec::new();
        for (&f, &v) in spec.freqs.iter().zip(&integrated).rev() {
            if f <= 0.0 {
                grid.push(-f);
                vals.push(v);
            }
        }
        project(bank, &grid, &vals)
    });

    Ok(MelEnergies {
        positive,
        negative,
        duration: spec.duration,
    })
}

fn project(bank: &MelBank, grid: &[f64], vals: &[f64]) -> Vec<f64> {
    let w = filter_weights(bank, grid);
    w.rows()
        .into_iter()
        .map(|row| row.iter().zip(vals).map(|(a, b)| a * b).sum())
        .collect()
}
