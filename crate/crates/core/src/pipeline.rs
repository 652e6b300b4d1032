//! Measurement to feature-row plumbing shared by the front ends.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::classify::LabeledDataset;
use crate::error::{Error, Result};
use crate::mfcc::{extract_features, FeatureConfig, FeatureKind};
use crate::radar::{reconstruct_echo, EchoSearch};
use crate::signal::ComplexSeries;
use crate::synth::{Measurement, Recording};

/// One extracted feature vector with its bookkeeping columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub sample_id: String,
    pub label: u32,
    pub session_id: String,
    pub segment_index: u32,
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

/// Baseband `s(t)` of a measurement; cubes go through range FFT,
/// beamforming and echo selection first.
pub fn measurement_signal(m: &Measurement, search: &EchoSearch) -> Result<ComplexSeries> {
    match &m.recording {
        Recording::Baseband(s) => Ok(s.clone()),
        Recording::Cube(c) => Ok(reconstruct_echo(c, search)?.signal),
    }
}

pub fn extract_row(m: &Measurement, cfg: &FeatureConfig, kind: FeatureKind, search: &EchoSearch) -> Result<FeatureRow> {
    let id = m.sample_id();
    let wrap = |e: Error| Error::Sample {
        id: id.clone(),
        source: Box::new(e),
    };
    let s = measurement_signal(m, search).map_err(wrap)?;
    let f = extract_features(&s, cfg, kind).map_err(wrap)?;
    Ok(FeatureRow {
        sample_id: id.clone(),
        label: m.label,
        session_id: m.session.to_string(),
        segment_index: m.segment_index,
        kind,
        values: f.values,
    })
}

/// Extracts one row per measurement, preserving order.
pub fn extract_rows(
    measurements: &[Measurement],
    cfg: &FeatureConfig,
    kind: FeatureKind,
    search: &EchoSearch,
) -> Result<Vec<FeatureRow>> {
    let one = |m: &Measurement| extract_row(m, cfg, kind, search);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        measurements.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        measurements.iter().map(one).collect()
    }
}

/// Stacks rows into a dataset grouped by session id.
pub fn rows_to_dataset(rows: &[FeatureRow]) -> Result<LabeledDataset> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let d = first.values.len();
    let mut x = Array2::zeros((rows.len(), d));
    for (i, r) in rows.iter().enumerate() {
        if r.values.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.values.len(),
            });
        }
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&r.values));
    }
    LabeledDataset::new(
        x,
        rows.iter().map(|r| r.label).collect(),
        rows.iter().map(|r| r.session_id.clone()).collect(),
    )
}
