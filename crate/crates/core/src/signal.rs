//! Sampled signal containers and the elementary operations shared by all
//! feature branches: second derivative, amplitude/phase decomposition and a
//! rectangular-window magnitude STFT.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeries {
    samples: Vec<Complex64>,
    fs: f64,
    t0: f64,
}

impl ComplexSeries {
    pub fn new(samples: Vec<Complex64>, fs: f64) -> Result<Self> {
        Self::with_start(samples, fs, 0.0)
    }

    pub fn with_start(samples: Vec<Complex64>, fs: f64, t0: f64) -> Result<Self> {
        check_rate(fs)?;
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { samples, fs, t0 })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Covered time span, `len / fs`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn real(&self) -> RealSeries {
        RealSeries {
            samples: self.samples.iter().map(|z| z.re).collect(),
            fs: self.fs,
        }
    }

    pub fn imag(&self) -> RealSeries {
        RealSeries {
            samples: self.samples.iter().map(|z| z.im).collect(),
            fs: self.fs,
        }
    }

    /// Contiguous sub-series `[start, start + len)`, start time shifted accordingly.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.samples.len() {
            return Err(Error::SeriesTooShort {
                len: self.samples.len(),
                min: start + len.max(1),
            });
        }
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            fs: self.fs,
            t0: self.t0 + start as f64 / self.fs,
        })
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSeries {
    samples: Vec<f64>,
    fs: f64,
}

impl RealSeries {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        check_rate(fs)?;
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

fn check_rate(fs: f64) -> Result<()> {
    if fs.is_finite() && fs > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("sampling rate must be positive, got {fs}")))
    }
}

/// Either kind of series, as accepted by [`stft_magnitude`].
#[derive(Debug, Clone, Copy)]
pub enum SeriesRef<'a> {
    Real(&'a RealSeries),
    Complex(&'a ComplexSeries),
}

impl<'a> From<&'a RealSeries> for SeriesRef<'a> {
    fn from(x: &'a RealSeries) -> Self {
        SeriesRef::Real(x)
    }
}

impl<'a> From<&'a ComplexSeries> for SeriesRef<'a> {
    fn from(x: &'a ComplexSeries) -> Self {
        SeriesRef::Complex(x)
    }
}

impl SeriesRef<'_> {
    fn len(&self) -> usize {
        match self {
            SeriesRef::Real(x) => x.len(),
            SeriesRef::Complex(x) => x.len(),
        }
    }

    fn fs(&self) -> f64 {
        match self {
            SeriesRef::Real(x) => x.fs(),
            SeriesRef::Complex(x) => x.fs(),
        }
    }

    fn t0(&self) -> f64 {
        match self {
            SeriesRef::Real(_) => 0.0,
            SeriesRef::Complex(x) => x.t0(),
        }
    }

    fn at(&self, n: usize) -> Complex64 {
        match self {
            SeriesRef::Real(x) => Complex64::new(x.samples[n], 0.0),
            SeriesRef::Complex(x) => x.samples[n],
        }
    }
}

/// Central second difference scaled by `fs^2`; the two endpoints are dropped.
pub fn second_derivative(x: &RealSeries) -> Result<RealSeries> {
    let fs2 = x.fs * x.fs;
    let samples = second_difference(&x.samples, |a, b, c| (c - 2.0 * b + a) * fs2)?;
    Ok(RealSeries { samples, fs: x.fs })
}

/// [`second_derivative`] applied to the real and imaginary parts independently.
pub fn complex_second_derivative(s: &ComplexSeries) -> Result<ComplexSeries> {
    let fs2 = s.fs * s.fs;
    let samples = second_difference(&s.samples, |a, b, c| (c - b * 2.0 + a) * fs2)?;
    Ok(ComplexSeries {
        samples,
        fs: s.fs,
        t0: s.t0 + 1.0 / s.fs,
    })
}

fn second_difference<T: Copy>(x: &[T], f: impl Fn(T, T, T) -> T) -> Result<Vec<T>> {
    if x.len() < 3 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 3 });
    }
    Ok(x.windows(3).map(|w| f(w[0], w[1], w[2])).collect())
}

/// Pointwise modulus `|s(t)|`.
pub fn amplitude(s: &ComplexSeries) -> RealSeries {
    RealSeries {
        samples: s.samples.iter().map(|z| z.norm()).collect(),
        fs: s.fs,
    }
}

/// Principal value of `x` in `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    // rem_euclid can land exactly on 2*pi - 0 for tiny negative inputs
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Unwraps a sequence of phases so that every adjacent difference lies in
/// `(-pi, pi]`. The first sample is kept as given.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut iter = phases.iter();
    let Some(&first) = iter.next() else {
        return out;
    };
    out.push(first);
    let mut acc = first;
    let mut prev = first;
    for &p in iter {
        acc += wrap_phase(p - prev);
        prev = p;
        out.push(acc);
    }
    out
}

/// Principal-value phase of every sample followed by unwrapping.
pub fn phase_unwrapped(s: &ComplexSeries) -> Result<RealSeries> {
    let mut principal = Vec::with_capacity(s.len());
    for (index, z) in s.samples.iter().enumerate() {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::ZeroSample { index });
        }
        let p = z.im.atan2(z.re);
        principal.push(if p <= -PI { PI } else { p });
    }
    Ok(RealSeries {
        samples: unwrap(&principal),
        fs: s.fs,
    })
}

/// STFT frame layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    /// Rectangular window width in seconds.
    pub window_len: f64,
    /// Frame advance in seconds.
    pub hop: f64,
    /// Keep negative frequencies (complex input only).
    pub two_sided: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_len: 2.0,
            hop: 0.1,
            two_sided: true,
        }
    }
}

/// Magnitude STFT `S(t, f)`, indexed `(frame, frequency bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub values: Array2<f64>,
    /// Strictly increasing frequency axis in Hz.
    pub freqs: Vec<f64>,
    /// Frame centers in seconds.
    pub frame_times: Vec<f64>,
    pub window_len: f64,
    pub hop: f64,
    pub fs: f64,
    /// Start time of the analysed series.
    pub t0: f64,
    /// Duration of the analysed series, `len / fs`.
    pub duration: f64,
    pub two_sided: bool,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.values.ncols()
    }

    /// DFT length used for each frame.
    pub fn window_samples(&self) -> usize {
        (self.window_len * self.fs).round() as usize
    }
}

/// Rectangular-window magnitude STFT with a unitary DFT (scaled by
/// `1/sqrt(N)`), so each frame obeys Parseval exactly.
///
/// Frames start at the first sample and stay fully inside the signal. Complex
/// input with `two_sided` gives an axis centred on 0 Hz; real input gives
/// `0 ..= fs/2`.
pub fn stft_magnitude<'a>(x: impl Into<SeriesRef<'a>>, cfg: &StftConfig) -> Result<Spectrogram> {
    let x = x.into();
    let fs = x.fs();
    let n = x.len();
    if cfg.two_sided && matches!(x, SeriesRef::Real(_)) {
        return Err(Error::TwoSidedRealInput);
    }
    if !(cfg.hop.is_finite() && cfg.hop > 0.0) {
        return Err(Error::InvalidHop(cfg.hop));
    }
    let hop = (cfg.hop * fs).round() as usize;
    if hop == 0 {
        return Err(Error::InvalidHop(cfg.hop));
    }
    let win = (cfg.window_len * fs).round() as usize;
    if win == 0 || win > n {
        return Err(Error::WindowTooLong {
            window_s: cfg.window_len,
            duration_s: n as f64 / fs,
        });
    }
    let n_frames = (n - win) / hop + 1;

    // (DFT bin, output column) pairs in increasing frequency order
    let bins: Vec<usize> = if cfg.two_sided {
        let neg = win / 2;
        (0..win).map(|i| (i + win - neg) % win).collect()
    } else {
        (0..=win / 2).collect()
    };
    let freqs: Vec<f64> = bins
        .iter()
        .map(|&k| {
            let signed = if cfg.two_sided && k >= (win + 1) / 2 { k as f64 - win as f64 } else { k as f64 };
            signed * fs / win as f64
        })
        .collect();

    let fft = FftPlanner::new().plan_fft_forward(win);
    let scale = 1.0 / (win as f64).sqrt();
    let mut values = Array2::zeros((n_frames, bins.len()));
    let mut buf = vec![Complex64::new(0.0, 0.0); win];
    for frame in 0..n_frames {
        let start = frame * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = x.at(start + i);
        }
        fft.process(&mut buf);
        for (col, &k) in bins.iter().enumerate() {
            values[[frame, col]] = buf[k].norm() * scale;
        }
    }
    let t0 = x.t0();
    let frame_times = (0..n_frames)
        .map(|i| t0 + (i * hop) as f64 / fs + win as f64 / (2.0 * fs))
        .collect();

    Ok(Spectrogram {
        values,
        freqs,
        frame_times,
        window_len: win as f64 / fs,
        hop: hop as f64 / fs,
        fs,
        t0,
        duration: n as f64 / fs,
        two_sided: cfg.two_sided,
    })
}
