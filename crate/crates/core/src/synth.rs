//! Synthetic vital-sign cohort: per-person chest displacement (respiration
//! plus a sum-of-Gaussians heartbeat pulse), rendered as baseband `s(t)` or
//! as full FMCW data cubes, on a day/half-day/repetition schedule.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::s;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::radar::{simulate_cube, DataCube, RadarConfig, TargetTrack};
use crate::signal::{ComplexSeries, RealSeries};

/// One Gaussian lobe of the per-beat displacement waveform. Centre and width
/// are fractions of the beat period; amplitude is relative to the other lobes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseLobe {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonProfile {
    pub id: u32,
    pub heart_rate_hz: f64,
    /// Standard deviation of the inter-beat interval jitter (s).
    pub hrv_std: f64,
    pub pulse: Vec<PulseLobe>,
    pub resp_rate_hz: f64,
    pub resp_amp_m: f64,
    /// Peak heartbeat displacement (m).
    pub heart_amp_m: f64,
    /// Relative echo-amplitude modulation driven by the heartbeat.
    #[serde(default)]
    pub am_depth: f64,
    /// Beat-synchronous waveform of the amplitude modulation; empty means it
    /// follows `pulse`.
    #[serde(default)]
    pub am_pulse: Vec<PulseLobe>,
    /// RMS of the slow 1/f body drift (m).
    #[serde(default)]
    pub drift_amp_m: f64,
    /// Relative standard deviation of the slow heart-rate wander; the
    /// per-beat deviation is AR(1) with coefficient [`HR_WANDER_CORR`].
    #[serde(default)]
    pub hr_wander: f64,
}

/// Beat-to-beat correlation of the slow heart-rate wander.
pub const HR_WANDER_CORR: f64 = 0.9;

impl Default for PersonProfile {
    fn default() -> Self {
        well_separated_cohort().swap_remove(2)
    }
}

impl PersonProfile {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: String| Err(Error::InvalidProfile(format!("person {}: {what}", self.id)));
        if !(0.7..=2.0).contains(&self.heart_rate_hz) {
            return fail(format!("heart rate {} Hz outside [0.7, 2.0]", self.heart_rate_hz));
        }
        if !(0.1..=0.5).contains(&self.resp_rate_hz) {
            return fail(format!("respiration rate {} Hz outside [0.1, 0.5]", self.resp_rate_hz));
        }
        if !(1e-5..=5e-4).contains(&self.heart_amp_m) && self.heart_amp_m != 0.0 {
            return fail(format!("heartbeat amplitude {} m outside [1e-5, 5e-4]", self.heart_amp_m));
        }
        if !(1e-3..=1e-2).contains(&self.resp_amp_m) && self.resp_amp_m != 0.0 {
            return fail(format!("respiration amplitude {} m outside [1e-3, 1e-2]", self.resp_amp_m));
        }
        if !(self.hrv_std >= 0.0) || !(self.am_depth >= 0.0) || !(self.drift_amp_m >= 0.0) {
            return fail("negative variability parameter".into());
        }
        if !(0.0..0.3).contains(&self.hr_wander) {
            return fail(format!("heart-rate wander {} outside [0, 0.3)", self.hr_wander));
        }
        if self
            .pulse
            .iter()
            .chain(&self.am_pulse)
            .any(|l| !l.amplitude.is_finite() || !l.center.is_finite() || !(l.width > 0.0))
        {
            return fail("pulse lobes need finite amplitude/centre and positive width".into());
        }
        Ok(())
    }
}

/// Sum-of-Gaussians value at beat phase `x` (0 = onset, 1 = next onset).
fn template(lobes: &[PulseLobe], x: f64) -> f64 {
    lobes
        .iter()
        .map(|l| l.amplitude * (-(x - l.center).powi(2) / (2.0 * l.width * l.width)).exp())
        .sum()
}

fn template_peak(lobes: &[PulseLobe]) -> f64 {
    (0..=2000)
        .map(|i| template(lobes, -0.5 + 2.0 * i as f64 / 2000.0).abs())
        .fold(0.0, f64::max)
}

/// Beat train with unit peak template, sampled at `fs`.
fn pulse_train(lobes: &[PulseLobe], onsets: &[f64], intervals: &[f64], n: usize, fs: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let peak = template_peak(lobes);
    if peak == 0.0 {
        return out;
    }
    for (&onset, &ibi) in onsets.iter().zip(intervals) {
        for l in lobes {
            let lo = onset + (l.center - 6.0 * l.width) * ibi;
            let hi = onset + (l.center + 6.0 * l.width) * ibi;
            let i0 = (lo * fs).ceil().max(0.0) as usize;
            let i1 = ((hi * fs).floor().max(-1.0) + 1.0).min(n as f64) as usize;
            for (i, h) in out.iter_mut().enumerate().take(i1).skip(i0) {
                let x = (i as f64 / fs - onset) / ibi;
                *h += l.amplitude / peak * (-(x - l.center).powi(2) / (2.0 * l.width * l.width)).exp();
            }
        }
    }
    out
}

fn lobe(amplitude: f64, center: f64, width: f64) -> PulseLobe {
    PulseLobe { amplitude, center, width }
}

/// Six participants with distinct heart rates, pulse shapes and breathing.
pub fn well_separated_cohort() -> Vec<PersonProfile> {
    let p = |id, hr, hrv, pulse, rr, ra, ha, am| PersonProfile {
        id,
        heart_rate_hz: hr,
        hrv_std: hrv,
        pulse,
        resp_rate_hz: rr,
        resp_amp_m: ra,
        heart_amp_m: ha,
        am_depth: am,
        am_pulse: Vec::new(),
        drift_amp_m: 2e-4,
        hr_wander: HR_WANDER,
    };
    vec![
        p(1, 0.95, 0.020, vec![lobe(1.0, 0.15, 0.09), lobe(0.45, 0.42, 0.07)], 0.20, 4.0e-3, 3.0e-4, 0.15),
        p(2, 1.10, 0.015, vec![lobe(1.0, 0.15, 0.08), lobe(0.55, 0.45, 0.05)], 0.27, 3.0e-3, 2.5e-4, 0.08),
        p(3, 1.25, 0.020, vec![lobe(1.0, 0.10, 0.04), lobe(0.35, 0.30, 0.10)], 0.33, 5.0e-3, 2.0e-4, 0.20),
        p(4, 1.40, 0.010, vec![lobe(1.0, 0.20, 0.10), lobe(-0.30, 0.55, 0.06), lobe(0.2, 0.75, 0.05)], 0.16, 6.0e-3, 3.5e-4, 0.10),
        p(5, 1.55, 0.015, vec![lobe(1.0, 0.08, 0.03), lobe(0.6, 0.22, 0.04)], 0.38, 2.5e-3, 1.5e-4, 0.25),
        p(6, 1.70, 0.025, vec![lobe(0.8, 0.12, 0.06), lobe(1.0, 0.40, 0.08), lobe(-0.25, 0.70, 0.05)], 0.23, 3.5e-3, 4.0e-4, 0.12),
    ]
}

/// Six participants whose heart rates overlap within session drift, so
/// identity rests on pulse shape and amplitude modulation; pair with
/// [`HARD_COHORT_SNR_DB`].
pub fn hard_cohort() -> Vec<PersonProfile> {
    let p = |id, hr, pulse, rr, ha, am, am_pulse| PersonProfile {
        id,
        heart_rate_hz: hr,
        hrv_std: 0.03,
        pulse,
        resp_rate_hz: rr,
        resp_amp_m: 4.0e-3,
        heart_amp_m: ha,
        am_depth: am,
        am_pulse,
        drift_amp_m: 3e-4,
        hr_wander: HR_WANDER,
    };
    vec![
        p(1, 1.12, vec![lobe(1.0, 0.12, 0.06), lobe(0.50, 0.38, 0.07)], 0.25, 2.0e-4, 0.25, vec![lobe(1.0, 0.30, 0.10)]),
        p(2, 1.16, vec![lobe(1.0, 0.15, 0.08), lobe(0.20, 0.45, 0.05)], 0.27, 2.2e-4, 0.45,
            vec![lobe(1.0, 0.05, 0.05), lobe(-0.6, 0.25, 0.06)]),
        p(3, 1.20, vec![lobe(1.0, 0.10, 0.04), lobe(0.45, 0.30, 0.09)], 0.24, 1.8e-4, 0.35, vec![lobe(1.0, 0.55, 0.08)]),
        p(4, 1.14, vec![lobe(1.0, 0.14, 0.06), lobe(-0.30, 0.42, 0.06)], 0.28, 2.1e-4, 0.60,
            vec![lobe(-1.0, 0.15, 0.07), lobe(0.5, 0.40, 0.05)]),
        p(5, 1.22, vec![lobe(1.0, 0.09, 0.05), lobe(0.70, 0.25, 0.05)], 0.26, 1.9e-4, 0.30, vec![lobe(1.0, 0.20, 0.15)]),
        p(6, 1.18, vec![lobe(0.9, 0.12, 0.07), lobe(1.0, 0.36, 0.08)], 0.25, 2.3e-4, 0.50,
            vec![lobe(0.6, 0.10, 0.04), lobe(1.0, 0.70, 0.06)]),
    ]
}

const HR_WANDER: f64 = 0.04;

pub const DEFAULT_SNR_DB: f64 = 20.0;
pub const HARD_COHORT_SNR_DB: f64 = 10.0;

/// SplitMix64 finaliser; stable across platforms and releases.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed from a master seed and a key path.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(master), |acc, &k| mix64(acc ^ mix64(k)))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Components of the chest displacement, kept apart so the heartbeat can also
/// drive the echo amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementParts {
    pub respiration: Vec<f64>,
    pub heartbeat: Vec<f64>,
    pub drift: Vec<f64>,
    /// Unit-peak beat waveform that drives the echo amplitude.
    pub am_wave: Vec<f64>,
    /// Beat onset times (s), including one before `t = 0`.
    pub onsets: Vec<f64>,
    pub fs: f64,
}

impl DisplacementParts {
    pub fn total(&self) -> Vec<f64> {
        self.respiration
            .iter()
            .zip(&self.heartbeat)
            .zip(&self.drift)
            .map(|((r, h), d)| r + h + d)
            .collect()
    }
}

fn displacement_parts<R: Rng>(
    profile: &PersonProfile,
    duration: f64,
    fs: f64,
    rng: &mut R,
) -> Result<DisplacementParts> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidConfig(format!("sampling rate must be positive, got {fs}")));
    }
    profile.validate()?;
    let n = (duration * fs).round() as usize;
    if n == 0 {
        return Err(Error::InvalidDuration(duration));
    }
    let t = |i: usize| i as f64 / fs;

    let resp_phase = rng.random_range(0.0..2.0 * PI);
    let respiration = (0..n)
        .map(|i| profile.resp_amp_m * (2.0 * PI * profile.resp_rate_hz * t(i) + resp_phase).sin())
        .collect();

    let period = 1.0 / profile.heart_rate_hz;
    let jitter = Normal::new(0.0, profile.hrv_std.max(0.0)).map_err(|e| Error::InvalidProfile(e.to_string()))?;
    let mut onsets = vec![-rng.random_range(0.0..1.0) * period];
    let mut intervals = Vec::new();
    let wander_step = profile.hr_wander * (1.0 - HR_WANDER_CORR * HR_WANDER_CORR).sqrt();
    let mut wander = if profile.hr_wander > 0.0 {
        profile.hr_wander * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    while *onsets.last().unwrap() < duration {
        let mut ibi = period / (1.0 + wander);
        if profile.hrv_std > 0.0 {
            ibi = (ibi + jitter.sample(rng)).max(0.5 * period);
        }
        if profile.hr_wander > 0.0 {
            wander = HR_WANDER_CORR * wander + wander_step * rng.sample::<f64, _>(StandardNormal);
        }
        intervals.push(ibi);
        let next = onsets.last().unwrap() + ibi;
        onsets.push(next);
    }
    let heartbeat = if profile.heart_amp_m > 0.0 {
        let mut h = pulse_train(&profile.pulse, &onsets, &intervals, n, fs);
        h.iter_mut().for_each(|v| *v *= profile.heart_amp_m);
        h
    } else {
        vec![0.0; n]
    };
    let am_wave = if profile.am_pulse.is_empty() {
        pulse_train(&profile.pulse, &onsets, &intervals, n, fs)
    } else {
        pulse_train(&profile.am_pulse, &onsets, &intervals, n, fs)
    };

    let mut drift = vec![0.0; n];
    if profile.drift_amp_m > 0.0 {
        // 1/f amplitude spectrum over 0.005..0.1 Hz
        let comps: Vec<(f64, f64, f64)> = (1..=20)
            .map(|k| {
                let f = 0.005 * k as f64;
                (f, 1.0 / f, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let rms = (comps.iter().map(|c| c.1 * c.1).sum::<f64>() / 2.0).sqrt();
        for (i, d) in drift.iter_mut().enumerate() {
            let v: f64 = comps.iter().map(|&(f, a, p)| a * (2.0 * PI * f * t(i) + p).sin()).sum();
            *d = profile.drift_amp_m * v / rms;
        }
    }

    Ok(DisplacementParts {
        respiration,
        heartbeat,
        drift,
        am_wave,
        onsets,
        fs,
    })
}

/// Chest displacement `d(t)` in metres; deterministic given `seed`.
pub fn displacement(profile: &PersonProfile, duration: f64, fs: f64, seed: u64) -> Result<RealSeries> {
    let parts = displacement_parts(profile, duration, fs, &mut rng_for(seed))?;
    RealSeries::new(parts.total(), fs)
}

/// Beat onsets that [`displacement`] uses for the same arguments.
pub fn beat_onsets(profile: &PersonProfile, duration: f64, fs: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(displacement_parts(profile, duration, fs, &mut rng_for(seed))?.onsets)
}

fn noise_std(snr_db: f64) -> f64 {
    if snr_db.is_finite() {
        10f64.powf(-snr_db / 20.0)
    } else {
        0.0
    }
}

/// `s(t) = exp(j 4 pi d(t) / lambda)` plus circular white Gaussian noise at
/// `snr_db` relative to the unit carrier. `snr_db = inf` renders noiselessly.
pub fn render_baseband(d: &RealSeries, cfg: &RadarConfig, snr_db: f64, seed: u64) -> Result<ComplexSeries> {
    render_baseband_modulated(d, None, 0.0, cfg, snr_db, seed)
}

/// [`render_baseband`] with an optional echo-amplitude envelope and a
/// constant carrier phase offset.
pub fn render_baseband_modulated(
    d: &RealSeries,
    envelope: Option<&[f64]>,
    phase_offset: f64,
    cfg: &RadarConfig,
    snr_db: f64,
    seed: u64,
) -> Result<ComplexSeries> {
    if let Some(env) = envelope {
        if env.len() != d.len() {
            return Err(Error::LengthMismatch(env.len(), d.len()));
        }
    }
    let k = 4.0 * PI / cfg.wavelength;
    let sigma = noise_std(snr_db) / 2f64.sqrt();
    let mut rng = rng_for(seed);
    let normal = Normal::new(0.0, sigma.max(0.0)).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let samples = d
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let a = envelope.map_or(1.0, |e| e[i]);
            let clean = Complex64::from_polar(a, k * x + phase_offset);
            if sigma > 0.0 {
                clean + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
            } else {
                clean
            }
        })
        .collect();
    ComplexSeries::new(samples, d.fs())
}

/// Morning or afternoon recording block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DayHalf {
    Am,
    Pm,
}

/// One measurement period, e.g. `d1-am`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId {
    pub day: u32,
    pub half: DayHalf,
}

impl SessionId {
    fn key(&self) -> u64 {
        (self.day as u64) << 1 | (self.half == DayHalf::Pm) as u64
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let half = match self.half {
            DayHalf::Am => "am",
            DayHalf::Pm => "pm",
        };
        write!(f, "d{}-{half}", self.day)
    }
}

impl FromStr for SessionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Manifest(format!("bad session id `{s}`"));
        let (day, half) = s.strip_prefix('d').and_then(|r| r.split_once('-')).ok_or_else(bad)?;
        let day = day.parse().map_err(|_| bad())?;
        let half = match half {
            "am" => DayHalf::Am,
            "pm" => DayHalf::Pm,
            _ => return Err(bad()),
        };
        Ok(Self { day, half })
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sessions times repetitions per session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub sessions: Vec<SessionId>,
    pub repetitions: u32,
}

impl Schedule {
    /// `days` days, a morning and an afternoon session each.
    pub fn days(days: u32, repetitions: u32) -> Self {
        let sessions = (1..=days)
            .flat_map(|day| [DayHalf::Am, DayHalf::Pm].map(|half| SessionId { day, half }))
            .collect();
        Self { sessions, repetitions }
    }

    pub fn len(&self) -> usize {
        self.sessions.len() * self.repetitions as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for Schedule {
    /// Five days, five repetitions in each half day.
    fn default() -> Self {
        Self::days(5, 5)
    }
}

/// Per-session nuisance variation magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionVariation {
    /// Echo gain drawn log-uniformly within +-`gain_db`.
    pub gain_db: f64,
    /// Relative heart-rate drift drawn uniformly within +-`heart_rate_drift`.
    pub heart_rate_drift: f64,
    /// Relative respiration-rate drift.
    pub resp_rate_drift: f64,
}

impl Default for SessionVariation {
    fn default() -> Self {
        Self {
            gain_db: 2.0,
            heart_rate_drift: 0.05,
            resp_rate_drift: 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Baseband,
    Cube,
}

impl FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseband" => Ok(Self::Baseband),
            "cube" => Ok(Self::Cube),
            other => Err(Error::InvalidConfig(format!("unknown render mode `{other}`"))),
        }
    }
}

/// Where the subject sits relative to the array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub range_m: f64,
    pub angle_deg: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Self {
            range_m: 1.5,
            angle_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    pub duration: f64,
    pub fs: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub mode: RenderMode,
    pub radar: RadarConfig,
    pub placement: Placement,
    pub variation: SessionVariation,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self {
            duration: 60.0,
            fs: 100.0,
            snr_db: DEFAULT_SNR_DB,
            seed: 0,
            mode: RenderMode::Baseband,
            radar: RadarConfig::default(),
            placement: Placement::default(),
            variation: SessionVariation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recording {
    Baseband(ComplexSeries),
    Cube(DataCube),
}

impl Recording {
    pub fn n_samples(&self) -> usize {
        match self {
            Recording::Baseband(s) => s.len(),
            Recording::Cube(c) => c.n_slow(),
        }
    }

    pub fn fs(&self) -> f64 {
        match self {
            Recording::Baseband(s) => s.fs(),
            Recording::Cube(c) => c.config.fs_slow,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub recording: Recording,
    pub label: u32,
    pub session: SessionId,
    pub repetition: u32,
    /// Seed this measurement was rendered from.
    pub seed: u64,
    /// Position within the parent recording after [`segment`]; 0 otherwise.
    pub segment_index: u32,
}

impl Measurement {
    pub fn duration(&self) -> f64 {
        self.recording.n_samples() as f64 / self.recording.fs()
    }

    pub fn sample_id(&self) -> String {
        format!(
            "p{}-{}-r{}-s{:02}",
            self.label, self.session, self.repetition, self.segment_index
        )
    }
}

/// Identity and seed of one scheduled measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedMeasurement {
    pub profile_index: usize,
    pub label: u32,
    pub session: SessionId,
    pub repetition: u32,
    pub seed: u64,
}

/// Enumerates the schedule for every profile, session-major.
pub fn plan_cohort(profiles: &[PersonProfile], schedule: &Schedule, seed: u64) -> Result<Vec<PlannedMeasurement>> {
    if schedule.is_empty() {
        return Err(Error::ScheduleEmpty);
    }
    if profiles.len() < 2 {
        return Err(Error::TooFewClasses(profiles.len()));
    }
    for p in profiles {
        p.validate()?;
    }
    let mut plan = Vec::with_capacity(profiles.len() * schedule.len());
    for session in &schedule.sessions {
        for repetition in 1..=schedule.repetitions {
            for (profile_index, p) in profiles.iter().enumerate() {
                plan.push(PlannedMeasurement {
                    profile_index,
                    label: p.id,
                    session: *session,
                    repetition,
                    seed: derive_seed(seed, &[p.id as u64, session.key(), repetition as u64]),
                });
            }
        }
    }
    Ok(plan)
}

struct SessionEffect {
    gain: f64,
    phase: f64,
    heart_factor: f64,
    resp_factor: f64,
}

fn session_effect(master: u64, label: u32, session: SessionId, v: &SessionVariation) -> SessionEffect {
    let mut rng = rng_for(derive_seed(master, &[label as u64, session.key(), u64::MAX]));
    let mut sym = |r: f64| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
    let gain_db = sym(v.gain_db);
    let heart_factor = 1.0 + sym(v.heart_rate_drift);
    let resp_factor = 1.0 + sym(v.resp_rate_drift);
    let phase = sym(PI);
    SessionEffect {
        gain: 10f64.powf(gain_db / 20.0),
        phase,
        heart_factor,
        resp_factor,
    }
}

/// Renders one planned measurement.
pub fn render_measurement(
    plan: &PlannedMeasurement,
    profile: &PersonProfile,
    cfg: &CohortConfig,
) -> Result<Measurement> {
    let effect = session_effect(cfg.seed, plan.label, plan.session, &cfg.variation);
    let mut person = profile.clone();
    person.heart_rate_hz = (person.heart_rate_hz * effect.heart_factor).clamp(0.7, 2.0);
    person.resp_rate_hz = (person.resp_rate_hz * effect.resp_factor).clamp(0.1, 0.5);

    let mut rng = rng_for(plan.seed);
    let parts = displacement_parts(&person, cfg.duration, cfg.fs, &mut rng)?;
    let d = parts.total();
    let envelope: Vec<f64> = parts
        .am_wave
        .iter()
        .map(|w| effect.gain * (1.0 + person.am_depth * w))
        .collect();
    let noise_seed = derive_seed(plan.seed, &[1]);

    let recording = match cfg.mode {
        RenderMode::Baseband => {
            let d = RealSeries::new(d, cfg.fs)?;
            Recording::Baseband(render_baseband_modulated(
                &d,
                Some(&envelope),
                effect.phase,
                &cfg.radar,
                cfg.snr_db,
                noise_seed,
            )?)
        }
        RenderMode::Cube => {
            let radar = RadarConfig {
                fs_slow: cfg.fs,
                ..cfg.radar
            };
            let track = TargetTrack {
                range_m: d.iter().map(|x| cfg.placement.range_m + x).collect(),
                amplitude: envelope,
                angle_deg: cfg.placement.angle_deg,
                phase_offset: effect.phase,
            };
            let n = track.range_m.len();
            Recording::Cube(simulate_cube(
                &radar,
                &[track],
                n,
                noise_std(cfg.snr_db),
                &mut rng_for(noise_seed),
            )?)
        }
    };
    Ok(Measurement {
        recording,
        label: plan.label,
        session: plan.session,
        repetition: plan.repetition,
        seed: plan.seed,
        segment_index: 0,
    })
}

/// One measurement per (profile, session, repetition); a pure function of
/// its arguments.
pub fn generate_cohort(
    profiles: &[PersonProfile],
    schedule: &Schedule,
    cfg: &CohortConfig,
) -> Result<Vec<Measurement>> {
    let plan = plan_cohort(profiles, schedule, cfg.seed)?;
    let render = |p: &PlannedMeasurement| render_measurement(p, &profiles[p.profile_index], cfg);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        plan.par_iter().map(render).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        plan.iter().map(render).collect()
    }
}

/// Splits a measurement into contiguous, non-overlapping pieces of `seg_len`
/// seconds that inherit its label and session.
pub fn segment(m: &Measurement, seg_len: f64) -> Result<Vec<Measurement>> {
    let fs = m.recording.fs();
    let n = m.recording.n_samples();
    let duration = n as f64 / fs;
    let per = seg_len * fs;
    let non_divisible = || Error::NonDivisibleLength { seg_len, duration };
    if !(seg_len > 0.0) || (per - per.round()).abs() > 1e-9 * per.max(1.0) || per.round() < 1.0 {
        return Err(non_divisible());
    }
    let per = per.round() as usize;
    if n % per != 0 {
        return Err(non_divisible());
    }
    (0..n / per)
        .map(|k| {
            let recording = match &m.recording {
                Recording::Baseband(s) => Recording::Baseband(s.slice(k * per, per)?),
                Recording::Cube(c) => Recording::Cube(DataCube::new(
                    c.values.slice(s![k * per..(k + 1) * per, .., ..]).to_owned(),
                    c.config,
                )?),
            };
            Ok(Measurement {
                recording,
                segment_index: k as u32,
                ..m.clone()
            })
        })
        .collect()
}
