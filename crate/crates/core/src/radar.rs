//! FMCW MIMO front end: range FFT over fast time, delay-and-sum beamforming
//! over the virtual array, and selection of the target echo `s(t)`.

use std::f64::consts::PI;

use ndarray::{Array2, Array3, Axis};
use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSeries;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Carrier centre frequency (Hz).
    pub fc: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// Sweep bandwidth (Hz); range resolution is `c / (2B)`.
    pub bandwidth: f64,
    /// Chirp duration (s).
    pub chirp_duration: f64,
    /// Virtual array size.
    pub n_virtual: usize,
    /// Virtual element spacing (m).
    pub element_spacing: f64,
    /// Chirp repetition rate (Hz).
    pub fs_slow: f64,
    /// ADC samples per chirp.
    pub n_fast: usize,
}

impl Default for RadarConfig {
    /// 79 GHz, 3.6 GHz sweep, 3x4 MIMO as a 12-element half-wavelength array,
    /// 100 Hz slow time.
    fn default() -> Self {
        let fc = 79.0e9;
        let wavelength = SPEED_OF_LIGHT / fc;
        Self {
            fc,
            wavelength,
            bandwidth: 3.6e9,
            chirp_duration: 50e-6,
            n_virtual: 12,
            element_spacing: wavelength / 2.0,
            fs_slow: 100.0,
            n_fast: 128,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [
            self.fc,
            self.wavelength,
            self.bandwidth,
            self.chirp_duration,
            self.element_spacing,
            self.fs_slow,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive || self.n_virtual == 0 || self.n_fast == 0 {
            return Err(Error::InvalidConfig("radar parameters must be positive".into()));
        }
        let lambda = SPEED_OF_LIGHT / self.fc;
        if (self.wavelength - lambda).abs() > 1e-3 * lambda {
            return Err(Error::InvalidConfig(format!(
                "wavelength {} m inconsistent with fc (expected {lambda} m)",
                self.wavelength
            )));
        }
        if (self.element_spacing - self.wavelength / 2.0).abs() > 1e-3 * self.wavelength / 2.0 {
            return Err(Error::InvalidConfig("element spacing must be lambda/2".into()));
        }
        Ok(())
    }

    /// Range bin spacing `c / (2B)` in metres.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }
}

/// Raw dechirped samples indexed `(slow time, virtual element, fast time)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    pub values: Array3<Complex32>,
    pub config: RadarConfig,
}

impl DataCube {
    pub fn new(values: Array3<Complex32>, config: RadarConfig) -> Result<Self> {
        let (_, elements, fast) = values.dim();
        if elements != config.n_virtual || fast != config.n_fast {
            return Err(Error::DegenerateCube(format!(
                "cube shape {:?} does not match config ({} elements, {} fast samples)",
                values.dim(),
                config.n_virtual,
                config.n_fast
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DegenerateCube("non-finite samples".into()));
        }
        Ok(Self { values, config })
    }

    pub fn n_slow(&self) -> usize {
        self.values.dim().0
    }
}

/// A point scatterer whose range and reflectivity vary over slow time.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetTrack {
    /// Range per chirp (m).
    pub range_m: Vec<f64>,
    /// Echo amplitude per chirp.
    pub amplitude: Vec<f64>,
    /// Direction of arrival (degrees from broadside).
    pub angle_deg: f64,
    /// Constant carrier phase offset (rad).
    pub phase_offset: f64,
}

/// Stop-and-go FMCW beat model: each chirp sees the target frozen at its
/// current range, giving beat phase `2 pi (2 B R / c) n / n_fast + 4 pi R / lambda`
/// plus the array phase `2 pi d m sin(theta) / lambda`. Complex white noise of
/// standard deviation `noise_std` is added per sample.
pub fn simulate_cube<R: Rng>(
    cfg: &RadarConfig,
    targets: &[TargetTrack],
    n_slow: usize,
    noise_std: f64,
    rng: &mut R,
) -> Result<DataCube> {
    cfg.validate()?;
    for t in targets {
        if t.range_m.len() != n_slow || t.amplitude.len() != n_slow {
            return Err(Error::LengthMismatch(t.range_m.len(), n_slow));
        }
    }
    let mut values = Array3::<Complex32>::zeros((n_slow, cfg.n_virtual, cfg.n_fast));
    let k_range = 2.0 * cfg.bandwidth / SPEED_OF_LIGHT;
    for target in targets {
        let spatial = 2.0 * PI * cfg.element_spacing * target.angle_deg.to_radians().sin() / cfg.wavelength;
        for (t, mut chirp) in values.axis_iter_mut(Axis(0)).enumerate() {
            let r = target.range_m[t];
            let carrier = 4.0 * PI * r / cfg.wavelength + target.phase_offset;
            let beat = 2.0 * PI * k_range * r / cfg.n_fast as f64;
            for (m, mut row) in chirp.axis_iter_mut(Axis(0)).enumerate() {
                let base = carrier + spatial * m as f64;
                for (n, z) in row.iter_mut().enumerate() {
                    let v = Complex64::from_polar(target.amplitude[t], base + beat * n as f64);
                    *z += Complex32::new(v.re as f32, v.im as f32);
                }
            }
        }
    }
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std / 2f64.sqrt())
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for z in values.iter_mut() {
            z.re += normal.sample(rng) as f32;
            z.im += normal.sample(rng) as f32;
        }
    }
    DataCube::new(values, *cfg)
}

/// Per-chirp, per-element unitary DFT over fast time. Output is indexed
/// `(slow time, element, range bin)` with bin spacing `c / (2B)`.
pub fn range_profile(cube: &DataCube) -> Result<Array3<Complex64>> {
    let (n_slow, n_el, n_fast) = cube.values.dim();
    if n_fast < 2 || n_slow == 0 || n_el == 0 {
        return Err(Error::DegenerateCube(format!("shape {:?}", cube.values.dim())));
    }
    let fft = FftPlanner::new().plan_fft_forward(n_fast);
    let scale = 1.0 / (n_fast as f64).sqrt();
    let mut out = Array3::<Complex64>::zeros((n_slow, n_el, n_fast));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fast];
    for t in 0..n_slow {
        for m in 0..n_el {
            for (n, b) in buf.iter_mut().enumerate() {
                let z = cube.values[[t, m, n]];
                *b = Complex64::new(z.re as f64, z.im as f64);
            }
            fft.process(&mut buf);
            for (n, b) in buf.iter().enumerate() {
                out[[t, m, n]] = b * scale;
            }
        }
    }
    Ok(out)
}

/// Delay-and-sum weights `exp(-j 2 pi d m sin(theta) / lambda) / sqrt(M)`.
pub fn steering_weights(cfg: &RadarConfig, angle_deg: f64) -> Vec<Complex64> {
    let norm = 1.0 / (cfg.n_virtual as f64).sqrt();
    let k = 2.0 * PI * cfg.element_spacing * angle_deg.to_radians().sin() / cfg.wavelength;
    (0..cfg.n_virtual)
        .map(|m| Complex64::from_polar(norm, -k * m as f64))
        .collect()
}

/// Output of [`beamform`]: the angle-range power map plus on-demand access
/// to the steered slow-time series of any cell.
#[derive(Debug, Clone)]
pub struct Beamformed<'a> {
    pub angles_deg: Vec<f64>,
    /// Slow-time mean of `|w^T x|^2`, indexed `(angle, range bin)`.
    pub power: Array2<f64>,
    pub range_resolution: f64,
    fs_slow: f64,
    weights: Vec<Vec<Complex64>>,
    profiles: &'a Array3<Complex64>,
}

impl Beamformed<'_> {
    pub fn n_range_bins(&self) -> usize {
        self.power.ncols()
    }

    /// Steered slow-time series at `(angle index, range bin)`.
    pub fn steered(&self, angle_idx: usize, range_bin: usize) -> Result<ComplexSeries> {
        let w = self.weights.get(angle_idx).ok_or(Error::IndexOutOfRange {
            index: angle_idx,
            len: self.weights.len(),
        })?;
        if range_bin >= self.n_range_bins() {
            return Err(Error::IndexOutOfRange {
                index: range_bin,
                len: self.n_range_bins(),
            });
        }
        let samples = self
            .profiles
            .axis_iter(Axis(0))
            .map(|chirp| {
                w.iter()
                    .enumerate()
                    .map(|(m, wm)| wm * chirp[[m, range_bin]])
                    .sum()
            })
            .collect();
        ComplexSeries::new(samples, self.fs_slow)
    }
}

/// Bartlett beamformer over `angle_grid_deg`. The power map is evaluated as
/// `w^T R w*` from each range bin's spatial covariance `R`, which equals the
/// slow-time mean of the steered power.
pub fn beamform<'a>(
    profiles: &'a Array3<Complex64>,
    cfg: &RadarConfig,
    angle_grid_deg: &[f64],
) -> Result<Beamformed<'a>> {
    if angle_grid_deg.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if angle_grid_deg.iter().any(|a| !(-90.0..=90.0).contains(a)) {
        return Err(Error::InvalidConfig("beam angles must lie within +-90 degrees".into()));
    }
    let (n_slow, n_el, n_bins) = profiles.dim();
    if n_el != cfg.n_virtual || n_slow == 0 {
        return Err(Error::DegenerateCube(format!(
            "profile shape {:?} vs {} elements",
            profiles.dim(),
            cfg.n_virtual
        )));
    }
    let weights: Vec<Vec<Complex64>> = angle_grid_deg
        .iter()
        .map(|&a| steering_weights(cfg, a))
        .collect();

    let mut power = Array2::zeros((angle_grid_deg.len(), n_bins));
    let mut cov = vec![Complex64::new(0.0, 0.0); n_el * n_el];
    for r in 0..n_bins {
        cov.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for chirp in profiles.axis_iter(Axis(0)) {
            for i in 0..n_el {
                let xi = chirp[[i, r]];
                for j in 0..n_el {
                    cov[i * n_el + j] += xi * chirp[[j, r]].conj();
                }
            }
        }
        let inv = 1.0 / n_slow as f64;
        for (a, w) in weights.iter().enumerate() {
            let mut p = Complex64::new(0.0, 0.0);
            for i in 0..n_el {
                for j in 0..n_el {
                    p += w[i] * cov[i * n_el + j] * w[j].conj();
                }
            }
            power[[a, r]] = p.re * inv;
        }
    }
    Ok(Beamformed {
        angles_deg: angle_grid_deg.to_vec(),
        power,
        range_resolution: cfg.range_resolution(),
        fs_slow: cfg.fs_slow,
        weights,
        profiles,
    })
}

/// Range window and detection threshold for [`select_echo`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EchoSearch {
    pub range_min_m: f64,
    pub range_max_m: f64,
    /// Peak-to-median power ratio below which the pick is flagged low-SNR.
    pub low_snr_db: f64,
}

impl Default for EchoSearch {
    fn default() -> Self {
        Self {
            range_min_m: 0.5,
            range_max_m: 3.0,
            low_snr_db: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSelection {
    pub signal: ComplexSeries,
    pub angle_deg: f64,
    pub range_bin: usize,
    pub range_m: f64,
    pub power: f64,
    /// The selected cell barely stands out from the window's median power.
    pub low_snr: bool,
}

/// Picks the `(angle, range)` cell of maximal mean power inside the range
/// window and returns its steered series as `s(t)`. Ties go to the lowest
/// angle index, then the nearest range bin.
pub fn select_echo(beams: &Beamformed<'_>, search: &EchoSearch) -> Result<EchoSelection> {
    let dr = beams.range_resolution;
    let bins: Vec<usize> = (0..beams.n_range_bins())
        .filter(|&r| {
            let range = r as f64 * dr;
            range >= search.range_min_m && range <= search.range_max_m
        })
        .collect();
    if bins.is_empty() {
        return Err(Error::EmptyWindow {
            lo: search.range_min_m,
            hi: search.range_max_m,
        });
    }
    let mut best = (0, bins[0], f64::NEG_INFINITY);
    let mut cells = Vec::with_capacity(bins.len() * beams.angles_deg.len());
    for a in 0..beams.angles_deg.len() {
        for &r in &bins {
            let p = beams.power[[a, r]];
            cells.push(p);
            if p > best.2 {
                best = (a, r, p);
            }
        }
    }
    cells.sort_by(f64::total_cmp);
    let median = cells[cells.len() / 2];
    let (a, r, p) = best;
    let ratio_db = 10.0 * (p / median.max(f64::MIN_POSITIVE)).log10();
    Ok(EchoSelection {
        signal: beams.steered(a, r)?,
        angle_deg: beams.angles_deg[a],
        range_bin: r,
        range_m: r as f64 * dr,
        power: p,
        low_snr: !(ratio_db >= search.low_snr_db),
    })
}

/// Default beam grid: -60 to +60 degrees in 1-degree steps.
pub fn default_angle_grid() -> Vec<f64> {
    (-60..=60).map(f64::from).collect()
}

/// Range FFT, beamforming over [`default_angle_grid`] and echo selection.
pub fn reconstruct_echo(cube: &DataCube, search: &EchoSearch) -> Result<EchoSelection> {
    let profiles = range_profile(cube)?;
    let beams = beamform(&profiles, &cube.config, &default_angle_grid())?;
    select_echo(&beams, search)
}
