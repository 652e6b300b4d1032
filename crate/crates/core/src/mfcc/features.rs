//! End-to-end cepstral feature extraction for the amplitude, phase and
//! complex branches, and their fusion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bank::{build_mel_bank, mel_energies, MelBankConfig};
use super::dct::dct2;
use crate::error::{Error, Result};
use crate::signal::{
    amplitude, complex_second_derivative, phase_unwrapped, second_derivative, stft_magnitude,
    ComplexSeries, SeriesRef, StftConfig,
};

const LOG_FLOOR: f64 = 1e-12;

/// Which signal component a feature vector was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// `|s(t)|`, one-sided, `K'` coefficients.
    Amp,
    /// Unwrapped phase of `s(t)`, one-sided, `K'` coefficients.
    Ph,
    /// Complex `s(t)`, two-sided, `2K'` coefficients.
    Comp,
    /// Concatenation amp, ph, comp: `4K'` coefficients.
    Prop,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [Self::Amp, Self::Ph, Self::Comp, Self::Prop];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Amp => "amp",
            Self::Ph => "ph",
            Self::Comp => "comp",
            Self::Prop => "prop",
        }
    }

    /// Feature dimension for truncation order `k_prime`.
    pub fn dim(self, k_prime: usize) -> usize {
        match self {
            Self::Amp | Self::Ph => k_prime,
            Self::Comp => 2 * k_prime,
            Self::Prop => 4 * k_prime,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amp" => Ok(Self::Amp),
            "ph" => Ok(Self::Ph),
            "comp" => Ok(Self::Comp),
            "prop" => Ok(Self::Prop),
            other => Err(Error::InvalidConfig(format!("unknown feature kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: FeatureKind,
    pub k_prime: usize,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Everything the extractor needs besides the signal itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub n_filters: usize,
    pub f_ref: f64,
    pub f_prime: f64,
    /// DCT coefficients computed per side (`K`).
    pub n_dct: usize,
    /// Coefficients retained per side (`K'`).
    pub k_prime: usize,
    pub window_len: f64,
    pub hop: f64,
    /// Take `ln(M + 1e-12)` before the DCT.
    pub log_energies: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            n_filters: 64,
            f_ref: 5.0,
            f_prime: 1000.0,
            n_dct: 64,
            k_prime: 24,
            window_len: 2.0,
            hop: 0.1,
            log_energies: false,
        }
    }
}

impl FeatureConfig {
    pub fn mel_config(&self, fs: f64) -> MelBankConfig {
        MelBankConfig {
            n_filters: self.n_filters,
            f_ref: self.f_ref,
            f_prime: self.f_prime,
            fs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dct == 0 || self.n_dct > self.n_filters {
            return Err(Error::InvalidConfig(format!(
                "DCT size {} must be in 1..={}",
                self.n_dct, self.n_filters
            )));
        }
        if self.k_prime == 0 || self.k_prime >= self.n_dct {
            return Err(Error::KPrimeTooLarge {
                k_prime: self.k_prime,
                k: self.n_dct,
            });
        }
        Ok(())
    }

    fn stft(&self, two_sided: bool) -> StftConfig {
        StftConfig {
            window_len: self.window_len,
            hop: self.hop,
            two_sided,
        }
    }

    fn cepstrum(&self, energies: &[f64]) -> Result<Vec<f64>> {
        let input: Vec<f64> = if self.log_energies {
            energies.iter().map(|m| (m + LOG_FLOOR).ln()).collect()
        } else {
            energies.to_vec()
        };
        let mut c = dct2(&input)?;
        c.truncate(self.k_prime.min(self.n_dct));
        Ok(c)
    }
}

/// Computes `r_amp`, `r_ph`, `r_comp` or the fused `r_prop` from `s(t)`.
pub fn extract_features(
    s: &ComplexSeries,
    cfg: &FeatureConfig,
    kind: FeatureKind,
) -> Result<FeatureVector> {
    cfg.validate()?;
    let win = (cfg.window_len * s.fs()).round() as usize;
    if s.len() < win + 2 {
        return Err(Error::SeriesTooShort {
            len: s.len(),
            min: win + 2,
        });
    }
    let bank = build_mel_bank(&cfg.mel_config(s.fs()))?;
    let values = match kind {
        FeatureKind::Amp | FeatureKind::Ph => {
            let component = if kind == FeatureKind::Amp {
                amplitude(s)
            } else {
                phase_unwrapped(s)?
            };
            let d2 = second_derivative(&component)?;
            let spec = stft_magnitude(SeriesRef::Real(&d2), &cfg.stft(false))?;
            let m = mel_energies(&spec, &bank)?;
            cfg.cepstrum(&m.positive)?
        }
        FeatureKind::Comp => {
            let d2 = complex_second_derivative(s)?;
            let spec = stft_magnitude(&d2, &cfg.stft(true))?;
            let m = mel_energies(&spec, &bank)?;
            let pos = cfg.cepstrum(&m.positive)?;
            let neg = cfg.cepstrum(m.negative.as_deref().unwrap_or_default())?;
            neg.iter().rev().chain(&pos).copied().collect()
        }
        FeatureKind::Prop => {
            let amp = extract_features(s, cfg, FeatureKind::Amp)?;
            let ph = extract_features(s, cfg, FeatureKind::Ph)?;
            let comp = extract_features(s, cfg, FeatureKind::Comp)?;
            return fuse(&amp, &ph, &comp);
        }
    };
    Ok(FeatureVector {
        values,
        kind,
        k_prime: cfg.k_prime,
    })
}

/// Concatenates `[r_amp; r_ph; r_comp]` into `r_prop`.
pub fn fuse(amp: &FeatureVector, ph: &FeatureVector, comp: &FeatureVector) -> Result<FeatureVector> {
    for (v, want) in [(amp, FeatureKind::Amp), (ph, FeatureKind::Ph), (comp, FeatureKind::Comp)] {
        if v.kind != want {
            return Err(Error::KindMismatch {
                expected: want.to_string(),
                got: v.kind.to_string(),
            });
        }
    }
    let k = amp.k_prime;
    for v in [amp, ph, comp] {
        if v.k_prime != k || v.dim() != v.kind.dim(k) {
            return Err(Error::DimensionMismatch {
                expected: v.kind.dim(k),
                got: v.dim(),
            });
        }
    }
    let values = [&amp.values, &ph.values, &comp.values]
        .into_iter()
        .flatten()
        .copied()
        .collect();
    Ok(FeatureVector {
        values,
        kind: FeatureKind::Prop,
        k_prime: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn chest_signal(secs: f64) -> ComplexSeries {
        let fs = 100.0;
        let lambda = 3.8e-3;
        let s = (0..(secs * fs) as usize)
            .map(|i| {
                let t = i as f64 / fs;
                let d = 4e-3 * (2.0 * PI * 0.25 * t).sin() + 2e-4 * (2.0 * PI * 1.1 * t).sin().powi(3);
                Complex64::from_polar(1.0 + 0.05 * (2.0 * PI * 1.1 * t).cos(), 4.0 * PI * d / lambda)
            })
            .collect();
        ComplexSeries::new(s, fs).unwrap()
    }

    #[test]
    fn dimensions_follow_kind() {
        let s = chest_signal(10.0);
        let cfg = FeatureConfig::default();
        assert_eq!(extract_features(&s, &cfg, FeatureKind::Comp).unwrap().dim(), 48);
        assert_eq!(extract_features(&s, &cfg, FeatureKind::Amp).unwrap().dim(), 24);
        assert_eq!(extract_features(&s, &cfg, FeatureKind::Ph).unwrap().dim(), 24);
        let prop = extract_features(&s, &cfg, FeatureKind::Prop).unwrap();
        assert_eq!(prop.dim(), 96);
        assert_eq!(prop.kind, FeatureKind::Prop);
    }

    #[test]
    fn extraction_is_deterministic() {
        let s = chest_signal(8.0);
        let cfg = FeatureConfig::default();
        let a = extract_features(&s, &cfg, FeatureKind::Prop).unwrap();
        let b = extract_features(&s, &cfg, FeatureKind::Prop).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn comp_orders_negative_side_first() {
        let s = chest_signal(6.0);
        let cfg = FeatureConfig::default();
        let comp = extract_features(&s, &cfg, FeatureKind::Comp).unwrap();
        let d2 = complex_second_derivative(&s).unwrap();
        let spec = stft_magnitude(&d2, &cfg.stft(true)).unwrap();
        let bank = build_mel_bank(&cfg.mel_config(100.0)).unwrap();
        let m = mel_energies(&spec, &bank).unwrap();
        let pos = dct2(&m.positive).unwrap();
        let neg = dct2(m.negative.as_ref().unwrap()).unwrap();
        assert_eq!(comp.values[23], neg[0]);
        assert_eq!(comp.values[0], neg[23]);
        assert_eq!(comp.values[24], pos[0]);
        assert_eq!(comp.values[47], pos[23]);
    }

    #[test]
    fn log_flag_changes_features() {
        let s = chest_signal(6.0);
        let plain = FeatureConfig::default();
        let log = FeatureConfig { log_energies: true, ..plain };
        let a = extract_features(&s, &plain, FeatureKind::Ph).unwrap();
        let b = extract_features(&s, &log, FeatureKind::Ph).unwrap();
        assert_ne!(a.values, b.values);
        assert!(b.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = FeatureConfig::default();
        let short = chest_signal(2.0);
        assert!(matches!(
            extract_features(&short, &cfg, FeatureKind::Amp),
            Err(Error::SeriesTooShort { .. })
        ));
        let big = FeatureConfig { k_prime: 64, ..cfg };
        assert!(matches!(
            extract_features(&chest_signal(5.0), &big, FeatureKind::Amp),
            Err(Error::KPrimeTooLarge { .. })
        ));
    }

    #[test]
    fn fuse_concatenates_in_order() {
        let mk = |kind, n, base: f64| FeatureVector {
            values: (0..n).map(|i| base + i as f64).collect(),
            kind,
            k_prime: 24,
        };
        let amp = mk(FeatureKind::Amp, 24, 0.0);
        let ph = mk(FeatureKind::Ph, 24, 100.0);
        let comp = mk(FeatureKind::Comp, 48, 200.0);
        let prop = fuse(&amp, &ph, &comp).unwrap();
        assert_eq!(prop.dim(), 96);
        assert_eq!(&prop.values[..24], &amp.values[..]);
        assert_eq!(&prop.values[24..48], &ph.values[..]);
        assert_eq!(&prop.values[48..], &comp.values[..]);
        assert_eq!(fuse(&amp, &ph, &comp).unwrap(), prop);

        assert!(matches!(fuse(&ph, &amp, &comp), Err(Error::KindMismatch { .. })));
        let short = mk(FeatureKind::Comp, 40, 0.0);
        assert!(matches!(fuse(&amp, &ph, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kind_round_trips_through_str() {
        for k in FeatureKind::ALL {
            assert_eq!(k.as_str().parse::<FeatureKind>().unwrap(), k);
        }
        assert!("phase".parse::<FeatureKind>().is_err());
    }
}
