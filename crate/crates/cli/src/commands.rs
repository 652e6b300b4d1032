//! Subcommand bodies. Each returns its primary artifact so tests can check
//! it without going through the process boundary; nothing here prints.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use heartid_core::classify::{session_grouped_cv, train_multiclass, EvalReport, SvmConfig, SvmModel};
use heartid_core::embedding::{pca2, tsne2, ProjectionMethod, Projection2D, TsneConfig};
use heartid_core::io::{self, Manifest};
use heartid_core::mfcc::{FeatureConfig, FeatureKind};
use heartid_core::pipeline::{extract_rows, rows_to_dataset, FeatureRow};
use heartid_core::radar::EchoSearch;
use heartid_core::synth::{generate_cohort, segment, Measurement};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SynthPlan;
use crate::error::{CliError, CliResult};
use crate::svg;

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(heartid_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn synth(plan: &SynthPlan, out: &Path) -> CliResult<Manifest> {
    let measurements = generate_cohort(&plan.profiles, &plan.schedule, &plan.cohort)?;
    Ok(io::write_dataset(
        out,
        &plan.dataset_id,
        &plan.profiles,
        &plan.schedule,
        &plan.cohort,
        &measurements,
    )?)
}

/// Counts per class and per session, as printed after `synth`.
pub fn dataset_summary(m: &Manifest) -> String {
    let mut per_class: BTreeMap<u32, usize> = BTreeMap::new();
    let mut per_session: BTreeMap<String, usize> = BTreeMap::new();
    for r in &m.records {
        *per_class.entry(r.label).or_default() += 1;
        *per_session.entry(r.session_id.to_string()).or_default() += 1;
    }
    let join = |it: Vec<String>| it.join(" ");
    format!(
        "{}: {} measurements, {} classes, {} sessions, {} s at {} Hz ({:?})\n  per class:   {}\n  per session: {}",
        m.dataset_id,
        m.records.len(),
        per_class.len(),
        per_session.len(),
        m.duration,
        m.fs,
        m.mode,
        join(per_class.iter().map(|(k, v)| format!("{k}:{v}")).collect()),
        join(per_session.iter().map(|(k, v)| format!("{k}:{v}")).collect()),
    )
}

/// Reads a dataset and optionally cuts every measurement into `segment`-second pieces.
pub fn load_measurements(data: &Path, seg: Option<f64>) -> CliResult<(Manifest, Vec<Measurement>)> {
    let (manifest, measurements) = io::read_dataset(data)?;
    let measurements = match seg {
        None => measurements,
        Some(len) => {
            let mut out = Vec::new();
            for m in &measurements {
                out.extend(segment(m, len)?);
            }
            out
        }
    };
    Ok((manifest, measurements))
}

pub fn extract(
    measurements: &[Measurement],
    kind: FeatureKind,
    cfg: &FeatureConfig,
    echo: &EchoSearch,
) -> CliResult<Vec<FeatureRow>> {
    Ok(extract_rows(measurements, cfg, kind, echo)?)
}

pub fn write_features(path: &Path, rows: &[FeatureRow]) -> CliResult<()> {
    let mut buf = Vec::new();
    io::write_features(&mut buf, rows)?;
    write_file(path, buf)
}

/// Feature rows plus the SHA-256 of the file they came from.
pub fn read_features(path: &Path) -> CliResult<(Vec<FeatureRow>, String)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let rows = io::read_features(&bytes[..])?;
    Ok((rows, sha256_hex(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: FeatureKind,
    pub dim: usize,
    pub n_train: usize,
    /// SHA-256 of the training feature CSV.
    pub features_sha256: String,
    pub svm: SvmConfig,
    pub model: SvmModel,
}

pub fn train(rows: &[FeatureRow], features_sha256: &str, svm: &SvmConfig) -> CliResult<ModelFile> {
    let data = rows_to_dataset(rows)?;
    let model = train_multiclass(&data, svm)?;
    Ok(ModelFile {
        kind: rows[0].kind,
        dim: data.dim(),
        n_train: data.len(),
        features_sha256: features_sha256.to_string(),
        svm: *svm,
        model,
    })
}

pub fn write_model(path: &Path, model: &ModelFile) -> CliResult<()> {
    write_file(path, to_json(model)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub kind: FeatureKind,
    pub dim: usize,
    pub features_sha256: String,
    pub svm: SvmConfig,
    /// Seconds since the Unix epoch; only present with `--timestamp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix_s: Option<u64>,
    pub report: EvalReport,
}

pub fn evaluate(rows: &[FeatureRow], features_sha256: &str, svm: &SvmConfig, timestamp: bool) -> CliResult<ReportFile> {
    let data = rows_to_dataset(rows)?;
    let report = session_grouped_cv(&data, svm)?;
    let total: usize = report.confusion.iter().flatten().sum();
    if total != data.len() || report.accuracy != 100.0 * report.trace() as f64 / total as f64 {
        return Err(CliError::Internal(format!(
            "confusion total {total} / accuracy {} disagree with {} rows",
            report.accuracy,
            data.len()
        )));
    }
    let generated_unix_s = timestamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    Ok(ReportFile {
        kind: rows[0].kind,
        dim: data.dim(),
        features_sha256: features_sha256.to_string(),
        svm: *svm,
        generated_unix_s,
        report,
    })
}

pub fn confusion_csv(report: &EvalReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once("true\\predicted".to_string())
        .chain(report.classes.iter().map(|c| c.to_string()))
        .collect();
    let csv_err = |e: csv::Error| CliError::Core(e.into());
    w.write_record(&header).map_err(csv_err)?;
    for (c, row) in report.classes.iter().zip(&report.confusion) {
        let rec: Vec<String> = std::iter::once(c.to_string())
            .chain(row.iter().map(|n| n.to_string()))
            .collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes `{stem}.json`, `{stem}_confusion.csv` and optionally
/// `{stem}_confusion.svg`; returns the paths written.
pub fn write_eval_outputs(dir: &Path, stem: &str, file: &ReportFile, svg_out: bool) -> CliResult<Vec<PathBuf>> {
    let mut written = vec![dir.join(format!("{stem}.json")), dir.join(format!("{stem}_confusion.csv"))];
    write_file(&written[0], to_json(file)?)?;
    write_file(&written[1], confusion_csv(&file.report)?)?;
    if svg_out {
        let path = dir.join(format!("{stem}_confusion.svg"));
        let title = format!("r_{}: {:.2}% accuracy", file.kind, file.report.accuracy);
        write_file(&path, svg::confusion(&file.report.classes, &file.report.confusion, &title))?;
        written.push(path);
    }
    Ok(written)
}

pub fn project(rows: &[FeatureRow], method: ProjectionMethod, tsne: &TsneConfig) -> CliResult<Projection2D> {
    let data = rows_to_dataset(rows)?;
    let p = match method {
        ProjectionMethod::Pca => pca2(data.features.view())?,
        ProjectionMethod::Tsne => tsne2(data.features.view(), tsne)?,
    };
    if p.len() != rows.len() {
        return Err(CliError::Internal(format!("{} points for {} rows", p.len(), rows.len())));
    }
    Ok(p)
}

pub fn projection_csv(rows: &[FeatureRow], p: &Projection2D) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Core(e.into());
    w.write_record(["sample_id", "label", "x", "y"]).map_err(csv_err)?;
    for (r, pt) in rows.iter().zip(&p.points) {
        w.write_record([r.sample_id.clone(), r.label.to_string(), pt[0].to_string(), pt[1].to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn write_projection(path: &Path, svg_path: Option<&Path>, rows: &[FeatureRow], p: &Projection2D) -> CliResult<()> {
    write_file(path, projection_csv(rows, p)?)?;
    if let Some(svg_path) = svg_path {
        let labels: Vec<u32> = rows.iter().map(|r| r.label).collect();
        let name = match p.method {
            ProjectionMethod::Pca => "PCA",
            ProjectionMethod::Tsne => "t-SNE",
        };
        let title = format!("{name} of r_{} ({} samples)", rows[0].kind, rows.len());
        write_file(svg_path, svg::scatter(&p.points, &labels, &title))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: FeatureKind,
    pub dim: usize,
    pub n_samples: usize,
    pub accuracy: f64,
    pub macro_auc: f64,
}

pub struct ReportOptions<'a> {
    pub features: &'a FeatureConfig,
    pub echo: &'a EchoSearch,
    pub svm: &'a SvmConfig,
    pub segment: Option<f64>,
    pub svg: bool,
    pub timestamp: bool,
}

/// Extracts and cross-validates every feature kind, writing per-kind
/// features, reports and confusion matrices plus `summary.csv` and
/// `summary.md` into `out_dir`.
pub fn report(
    data: &Path,
    out_dir: &Path,
    opts: &ReportOptions<'_>,
    mut progress: impl FnMut(&str),
) -> CliResult<Vec<SummaryRow>> {
    let (_, measurements) = load_measurements(data, opts.segment)?;
    let mut summary = Vec::new();
    for kind in FeatureKind::ALL {
        progress(&format!("r_{kind}: extracting {} samples", measurements.len()));
        let rows = extract(&measurements, kind, opts.features, opts.echo)?;
        let csv_path = out_dir.join(format!("features_{kind}.csv"));
        write_features(&csv_path, &rows)?;
        let (rows, sha) = read_features(&csv_path)?;
        progress(&format!("r_{kind}: cross-validating"));
        let file = evaluate(&rows, &sha, opts.svm, opts.timestamp)?;
        write_eval_outputs(out_dir, &format!("report_{kind}"), &file, opts.svg)?;
        summary.push(SummaryRow {
            kind,
            dim: file.dim,
            n_samples: file.report.n_samples,
            accuracy: file.report.accuracy,
            macro_auc: file.report.macro_auc,
        });
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &summary {
        w.serialize(row).map_err(|e| CliError::Core(e.into()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(format!("csv buffer: {e}")))?;
    write_file(&out_dir.join("summary.csv"), bytes)?;
    write_file(&out_dir.join("summary.md"), summary_table(&summary))?;
    Ok(summary)
}

/// Markdown table, one row per feature kind.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = String::from("| features | dim | samples | accuracy (%) | macro AUC |\n|---|---:|---:|---:|---:|\n");
    for r in rows {
        s.push_str(&format!(
            "| r_{} | {} | {} | {:.2} | {:.3} |\n",
            r.kind, r.dim, r.n_samples, r.accuracy, r.macro_auc
        ));
    }
    s
}
