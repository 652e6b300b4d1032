//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions behind
//! them are ordinary Rust and are tested natively.

use std::f64::consts::PI;

use heartid_core::classify::{session_grouped_cv, SvmConfig};
use heartid_core::embedding::{pca2, tsne2, ProjectionMethod, TsneConfig};
use heartid_core::mfcc::{build_mel_bank, extract_features, FeatureConfig, FeatureKind, MelBankConfig};
use heartid_core::pipeline::{extract_rows, measurement_signal, rows_to_dataset};
use heartid_core::radar::EchoSearch;
use heartid_core::signal::{amplitude, phase_unwrapped};
use heartid_core::synth::{
    generate_cohort, hard_cohort, plan_cohort, render_measurement, well_separated_cohort, CohortConfig, PersonProfile,
    Schedule, DEFAULT_SNR_DB, HARD_COHORT_SNR_DB,
};
use heartid_core::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn preset(name: &str) -> Result<(Vec<PersonProfile>, f64)> {
    match name {
        "default" => Ok((well_separated_cohort(), DEFAULT_SNR_DB)),
        "hard" => Ok((hard_cohort(), HARD_COHORT_SNR_DB)),
        other => Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string(v)?)
}

#[derive(Serialize)]
struct BankView {
    centers: Vec<f64>,
    m_tilde: f64,
    /// Unit-area triangle peaks, `2 / (f_{l+2} - f_l)`.
    peaks: Vec<f64>,
}

pub fn mel_bank_json(n_filters: usize, f_ref: f64, f_prime: f64, fs: f64) -> Result<String> {
    let bank = build_mel_bank(&MelBankConfig {
        n_filters,
        f_ref,
        f_prime,
        fs,
    })?;
    let peaks = bank.centers.windows(3).map(|w| 2.0 / (w[2] - w[0])).collect();
    to_json(&BankView {
        centers: bank.centers,
        m_tilde: bank.m_tilde,
        peaks,
    })
}

#[derive(Serialize)]
struct SubjectView {
    fs: f64,
    /// Displacement recovered from the unwrapped phase, in micrometres.
    displacement_um: Vec<f64>,
    amplitude: Vec<f64>,
    heart_rate_hz: f64,
    features: Vec<(FeatureKind, Vec<f64>)>,
}

pub fn simulate_subject_json(preset_name: &str, person: usize, duration: f64, seed: u64) -> Result<String> {
    let (profiles, snr_db) = preset(preset_name)?;
    let profile = profiles
        .get(person)
        .ok_or_else(|| Error::InvalidConfig(format!("person index {person} out of range")))?;
    let cfg = CohortConfig {
        duration,
        snr_db,
        seed,
        ..CohortConfig::default()
    };
    // first measurement of this person in the regular schedule, so the page
    // shows the same recording the CLI would write
    let plan = plan_cohort(&profiles, &Schedule::days(1, 1), seed)?
        .into_iter()
        .find(|p| p.profile_index == person)
        .ok_or_else(|| Error::InvalidConfig(format!("person index {person} not scheduled")))?;
    let m = render_measurement(&plan, profile, &cfg)?;
    let s = measurement_signal(&m, &EchoSearch::default())?;
    let scale = 1e6 * cfg.radar.wavelength / (4.0 * PI);
    let phase = phase_unwrapped(&s)?;
    let p0 = phase.samples()[0];
    let features = [FeatureKind::Amp, FeatureKind::Ph, FeatureKind::Comp]
        .into_iter()
        .map(|k| Ok((k, extract_features(&s, &FeatureConfig::default(), k)?.values)))
        .collect::<Result<Vec<_>>>()?;
    to_json(&SubjectView {
        fs: s.fs(),
        displacement_um: phase.samples().iter().map(|p| (p - p0) * scale).collect(),
        amplitude: amplitude(&s).into_samples(),
        heart_rate_hz: profile.heart_rate_hz,
        features,
    })
}

#[derive(Serialize)]
struct CohortView {
    labels: Vec<u32>,
    points: Vec<[f64; 2]>,
    /// Leave-one-session-out accuracy in percent.
    accuracy: Option<f64>,
    macro_auc: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn project_cohort_json(
    preset_name: &str,
    kind: &str,
    method: &str,
    days: u32,
    repetitions: u32,
    duration: f64,
    seed: u64,
    evaluate: bool,
) -> Result<String> {
    let (profiles, snr_db) = preset(preset_name)?;
    let kind: FeatureKind = kind.parse()?;
    let method: ProjectionMethod = method.parse()?;
    let cfg = CohortConfig {
        duration,
        snr_db,
        seed,
        ..CohortConfig::default()
    };
    let ms = generate_cohort(&profiles, &Schedule::days(days, repetitions), &cfg)?;
    let rows = extract_rows(&ms, &FeatureConfig::default(), kind, &EchoSearch::default())?;
    let data = rows_to_dataset(&rows)?;
    let projection = match method {
        ProjectionMethod::Pca => pca2(data.features.view())?,
        ProjectionMethod::Tsne => {
            let n = data.len() as f64;
            let tsne = TsneConfig {
                perplexity: (n / 4.0).clamp(2.0, 30.0),
                seed,
                ..TsneConfig::default()
            };
            tsne2(data.features.view(), &tsne)?
        }
    };
    let (accuracy, macro_auc) = if evaluate {
        let r = session_grouped_cv(&data, &SvmConfig::default())?;
        (Some(r.accuracy), Some(r.macro_auc))
    } else {
        (None, None)
    };
    to_json(&CohortView {
        labels: data.labels.clone(),
        points: projection.points,
        accuracy,
        macro_auc,
    })
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Filter centre frequencies and triangle heights.
#[wasm_bindgen]
pub fn mel_bank(n_filters: usize, f_ref: f64, f_prime: f64, fs: f64) -> std::result::Result<String, JsError> {
    js(mel_bank_json(n_filters, f_ref, f_prime, fs))
}

/// One measurement of one participant: recovered displacement, echo
/// amplitude and the three cepstral feature vectors.
#[wasm_bindgen]
pub fn simulate_subject(preset: &str, person: usize, duration: f64, seed: u64) -> std::result::Result<String, JsError> {
    js(simulate_subject_json(preset, person, duration, seed))
}

/// Synthesises a cohort, extracts one feature kind and projects it to 2-D;
/// with `evaluate` also runs session-grouped cross-validation.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn project_cohort(
    preset: &str,
    kind: &str,
    method: &str,
    days: u32,
    repetitions: u32,
    duration: f64,
    seed: u64,
    evaluate: bool,
) -> std::result::Result<String, JsError> {
    js(project_cohort_json(preset, kind, method, days, repetitions, duration, seed, evaluate))
}
