//! On-disk formats: dataset manifests, raw I/Q and cube files, feature CSVs.
//!
//! Sample files are little-endian `f32` pairs (I then Q). Cubes are stored
//! with fast time varying fastest, then element, then slow time, i.e. the
//! row-major order of a `(slow, element, fast)` array. Baseband recordings
//! are rounded to `f32` on write; cube samples are `f32` already and round
//! trip exactly.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array3;
use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfcc::FeatureKind;
use crate::pipeline::FeatureRow;
use crate::radar::{DataCube, RadarConfig};
use crate::signal::ComplexSeries;
use crate::synth::{
    CohortConfig, Measurement, PersonProfile, Placement, Recording, RenderMode, Schedule, SessionId,
    SessionVariation,
};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Leading bookkeeping columns of a feature CSV.
pub const FEATURE_META_COLUMNS: [&str; 5] = ["sample_id", "label", "session_id", "segment_index", "kind"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Path relative to the dataset directory.
    pub file: String,
    pub label: u32,
    pub session_id: SessionId,
    pub repetition: u32,
    pub seed: u64,
    /// Slow-time samples.
    pub n_samples: usize,
    /// `[slow, element, fast]` for cube files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_id: String,
    pub fs: f64,
    pub duration: f64,
    pub mode: RenderMode,
    pub seed: u64,
    /// `None` for a noiseless render.
    pub snr_db: Option<f64>,
    pub radar: RadarConfig,
    pub placement: Placement,
    pub variation: SessionVariation,
    pub schedule: Schedule,
    pub profiles: Vec<PersonProfile>,
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    /// Generation parameters as a cohort config.
    pub fn cohort_config(&self) -> CohortConfig {
        CohortConfig {
            duration: self.duration,
            fs: self.fs,
            snr_db: self.snr_db.unwrap_or(f64::INFINITY),
            seed: self.seed,
            mode: self.mode,
            radar: self.radar,
            placement: self.placement,
            variation: self.variation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Manifest(m));
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return bad(format!("fs must be positive, got {}", self.fs));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.records.is_empty() {
            return bad("no records".into());
        }
        let expected = (self.duration * self.fs).round() as usize;
        for r in &self.records {
            if r.file.is_empty() || Path::new(&r.file).is_absolute() || r.file.contains("..") {
                return bad(format!("record file `{}` must be a plain relative path", r.file));
            }
            if !self.profiles.is_empty() && !self.profiles.iter().any(|p| p.id == r.label) {
                return bad(format!("record `{}` has label {} with no profile", r.file, r.label));
            }
            if r.n_samples != expected {
                return bad(format!(
                    "record `{}` has {} samples, expected {expected}",
                    r.file, r.n_samples
                ));
            }
            match (self.mode, r.dims) {
                (RenderMode::Baseband, None) => {}
                (RenderMode::Cube, Some([slow, el, fast])) => {
                    if slow != r.n_samples || el != self.radar.n_virtual || fast != self.radar.n_fast {
                        return bad(format!(
                            "record `{}` dims {:?} disagree with the radar config",
                            r.file,
                            [slow, el, fast]
                        ));
                    }
                }
                (mode, dims) => {
                    return bad(format!("record `{}` dims {dims:?} do not fit mode {mode:?}", r.file));
                }
            }
        }
        Ok(())
    }
}

pub fn write_iq<W: Write>(mut w: W, samples: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 8);
    for z in samples {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f32_pairs<R: Read>(mut r: R) -> Result<Vec<Complex32>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Manifest(format!(
            "I/Q payload of {} bytes is not a whole number of f32 pairs",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect())
}

pub fn read_iq<R: Read>(r: R) -> Result<Vec<Complex64>> {
    Ok(read_f32_pairs(r)?
        .into_iter()
        .map(|z| Complex64::new(z.re as f64, z.im as f64))
        .collect())
}

pub fn write_cube<W: Write>(mut w: W, cube: &DataCube) -> Result<()> {
    let mut buf = Vec::with_capacity(cube.values.len() * 8);
    for z in cube.values.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_cube<R: Read>(r: R, dims: [usize; 3], config: RadarConfig) -> Result<DataCube> {
    let values = read_f32_pairs(r)?;
    let want = dims.iter().product::<usize>();
    if values.len() != want {
        return Err(Error::Manifest(format!(
            "cube holds {} samples, dims {dims:?} need {want}",
            values.len()
        )));
    }
    let values = Array3::from_shape_vec((dims[0], dims[1], dims[2]), values)
        .map_err(|e| Error::Manifest(e.to_string()))?;
    DataCube::new(values, config)
}

/// File name of a measurement's recording inside a dataset directory.
pub fn recording_file(m: &Measurement) -> String {
    let ext = match m.recording {
        Recording::Baseband(_) => "iq",
        Recording::Cube(_) => "cube",
    };
    format!("p{}-{}-r{}.{ext}", m.label, m.session, m.repetition)
}

/// Writes one file per measurement plus `manifest.json` into `dir`,
/// creating it if needed.
pub fn write_dataset(
    dir: &Path,
    dataset_id: &str,
    profiles: &[PersonProfile],
    schedule: &Schedule,
    cfg: &CohortConfig,
    measurements: &[Measurement],
) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut records = Vec::with_capacity(measurements.len());
    for m in measurements {
        let file = recording_file(m);
        let mut w = BufWriter::new(File::create(dir.join(&file))?);
        let dims = match &m.recording {
            Recording::Baseband(s) => {
                write_iq(&mut w, s.samples())?;
                None
            }
            Recording::Cube(c) => {
                write_cube(&mut w, c)?;
                let (a, b, c) = c.values.dim();
                Some([a, b, c])
            }
        };
        w.flush()?;
        records.push(ManifestRecord {
            file,
            label: m.label,
            session_id: m.session,
            repetition: m.repetition,
            seed: m.seed,
            n_samples: m.recording.n_samples(),
            dims,
        });
    }
    let manifest = Manifest {
        dataset_id: dataset_id.to_string(),
        fs: cfg.fs,
        duration: cfg.duration,
        mode: cfg.mode,
        seed: cfg.seed,
        snr_db: cfg.snr_db.is_finite().then_some(cfg.snr_db),
        radar: RadarConfig {
            fs_slow: cfg.fs,
            ..cfg.radar
        },
        placement: cfg.placement,
        variation: cfg.variation,
        schedule: schedule.clone(),
        profiles: profiles.to_vec(),
        records,
    };
    write_manifest(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Manifest(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    manifest.validate()?;
    Ok(manifest)
}

/// Loads the recording behind one manifest record.
pub fn read_record(dir: &Path, manifest: &Manifest, record: &ManifestRecord) -> Result<Measurement> {
    let path = dir.join(&record.file);
    let file = File::open(&path).map_err(|e| Error::Manifest(format!("cannot open {}: {e}", path.display())))?;
    let r = BufReader::new(file);
    let recording = match record.dims {
        None => {
            let samples = read_iq(r)?;
            if samples.len() != record.n_samples {
                return Err(Error::Manifest(format!(
                    "{} holds {} samples, manifest says {}",
                    record.file,
                    samples.len(),
                    record.n_samples
                )));
            }
            Recording::Baseband(ComplexSeries::new(samples, manifest.fs)?)
        }
        Some(dims) => Recording::Cube(read_cube(r, dims, manifest.radar)?),
    };
    Ok(Measurement {
        recording,
        label: record.label,
        session: record.session_id,
        repetition: record.repetition,
        seed: record.seed,
        segment_index: 0,
    })
}

/// Manifest plus every measurement, in manifest order.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, Vec<Measurement>)> {
    let manifest = read_manifest(dir)?;
    let measurements = manifest
        .records
        .iter()
        .map(|r| read_record(dir, &manifest, r))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, measurements))
}

/// Header plus one row per sample. All rows must share kind and dimension.
pub fn write_features<W: Write>(w: W, rows: &[FeatureRow]) -> Result<()> {
    let first = rows.first().ok_or(Error::EmptyInput)?;
    let d = first.values.len();
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = FEATURE_META_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((0..d).map(|i| format!("f{i}")))
        .collect();
    out.write_record(&header)?;
    for r in rows {
        if r.values.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.values.len(),
            });
        }
        if r.kind != first.kind {
            return Err(Error::KindMismatch {
                expected: first.kind.to_string(),
                got: r.kind.to_string(),
            });
        }
        let mut record = vec![
            r.sample_id.clone(),
            r.label.to_string(),
            r.session_id.clone(),
            r.segment_index.to_string(),
            r.kind.to_string(),
        ];
        // shortest round-trip formatting, so reading back is exact
        record.extend(r.values.iter().map(|v| v.to_string()));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(r: R) -> Result<Vec<FeatureRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    let n_meta = FEATURE_META_COLUMNS.len();
    if header.len() <= n_meta || header.iter().take(n_meta).ne(FEATURE_META_COLUMNS) {
        return Err(Error::FeatureFile(format!(
            "header must start with {} followed by feature columns",
            FEATURE_META_COLUMNS.join(",")
        )));
    }
    for (i, name) in header.iter().skip(n_meta).enumerate() {
        if name != format!("f{i}") {
            return Err(Error::FeatureFile(format!("feature column {i} is named `{name}`, expected `f{i}`")));
        }
    }
    let d = header.len() - n_meta;
    let mut rows: Vec<FeatureRow> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: String| Error::FeatureFile(format!("line {line}: {what}"));
        if rec.len() != n_meta + d {
            return Err(bad(format!("{} fields, expected {}", rec.len(), n_meta + d)));
        }
        let label = rec[1].parse().map_err(|_| bad(format!("bad label `{}`", &rec[1])))?;
        let segment_index = rec[3].parse().map_err(|_| bad(format!("bad segment index `{}`", &rec[3])))?;
        let kind: FeatureKind = rec[4].parse().map_err(|_| bad(format!("bad kind `{}`", &rec[4])))?;
        let values = rec
            .iter()
            .skip(n_meta)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(bad(format!("bad feature value `{v}`"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.kind != kind {
                return Err(bad(format!("kind `{kind}` differs from `{}`", first.kind)));
            }
        }
        rows.push(FeatureRow {
            sample_id: rec[0].to_string(),
            label,
            session_id: rec[2].to_string(),
            segment_index,
            kind,
            values,
        });
    }
    if rows.is_empty() {
        return Err(Error::FeatureFile("no data rows".into()));
    }
    Ok(rows)
}

pub fn write_features_file(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_features(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

pub fn read_features_file(path: &Path) -> Result<Vec<FeatureRow>> {
    let file = File::open(path).map_err(|e| Error::FeatureFile(format!("cannot open {}: {e}", path.display())))?;
    read_features(BufReader::new(file))
}
