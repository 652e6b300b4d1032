//! One-vs-rest wrapper around the binary machine.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use super::svm::{solve_dual, BinaryMachine, Kernel, SmoConfig};
use crate::error::{Error, Result};

/// Kernel choice before training. `Rbf { gamma: None }` resolves to
/// `1 / (d * Var(X))` over the (standardized) training matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf { gamma: None }
    }
}

impl std::str::FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(KernelSpec::Linear),
            "rbf" => Ok(KernelSpec::Rbf { gamma: None }),
            other => Err(Error::InvalidConfig(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    pub standardize: bool,
    pub max_iter: Option<usize>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            c: 10.0,
            tol: 1e-3,
            standardize: true,
            max_iter: None,
        }
    }
}

impl SvmConfig {
    fn smo(&self) -> SmoConfig {
        SmoConfig {
            c: self.c,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Features with class ids and a session tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<u32>,
    pub sessions: Vec<String>,
}

impl LabeledDataset {
    /// Checks row counts, at least two classes, and that every class
    /// appears in at least two sessions.
    pub fn new(features: Array2<f64>, labels: Vec<u32>, sessions: Vec<String>) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::LengthMismatch(n, labels.len()));
        }
        if sessions.len() != n {
            return Err(Error::LengthMismatch(n, sessions.len()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite feature value".into()));
        }
        let ds = Self {
            features,
            labels,
            sessions,
        };
        let classes = ds.classes();
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        for &c in &classes {
            let s: BTreeSet<&str> = ds
                .labels
                .iter()
                .zip(&ds.sessions)
                .filter(|(l, _)| **l == c)
                .map(|(_, s)| s.as_str())
                .collect();
            if s.len() < 2 {
                return Err(Error::TooFewSessions(s.len()));
            }
        }
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Sorted distinct class ids.
    pub fn classes(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Distinct sessions in order of first appearance.
    pub fn session_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.sessions {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<u32>,
    pub kernel: Kernel,
    pub c: f64,
    pub standardizer: Option<Standardizer>,
    /// One machine per class, or a single machine (class 1 vs class 0)
    /// when there are two classes.
    pub machines: Vec<BinaryMachine>,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.machines[0].support_vectors.ncols()
    }
}

fn resolve_kernel(spec: KernelSpec, x: ArrayView2<'_, f64>) -> Kernel {
    match spec {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: g },
        KernelSpec::Rbf { gamma: None } => {
            let n = x.len() as f64;
            let mean = x.sum() / n;
            let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let d = x.ncols() as f64;
            let gamma = if var > 0.0 { 1.0 / (d * var) } else { 1.0 / d };
            Kernel::Rbf { gamma }
        }
    }
}

/// Trains on rows `x` with class ids `labels`.
pub fn train_multiclass_raw(x: ArrayView2<'_, f64>, labels: &[u32], cfg: &SvmConfig) -> Result<SvmModel> {
    if x.nrows() != labels.len() {
        return Err(Error::LengthMismatch(x.nrows(), labels.len()));
    }
    let classes: Vec<u32> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let (standardizer, xs) = if cfg.standardize {
        let s = Standardizer::fit(x)?;
        let t = s.transform(x)?;
        (Some(s), t)
    } else {
        (None, x.to_owned())
    };
    let kernel = resolve_kernel(cfg.kernel, xs.view());
    let gram = kernel.matrix(xs.view(), xs.view());
    let smo = cfg.smo();

    let positives: Vec<u32> = if classes.len() == 2 {
        vec![classes[1]]
    } else {
        classes.clone()
    };
    let train_one = |&pos: &u32| -> Result<BinaryMachine> {
        let y: Vec<f64> = labels.iter().map(|&l| if l == pos { 1.0 } else { -1.0 }).collect();
        let sol = solve_dual(gram.view(), &y, &smo)?;
        Ok(BinaryMachine::from_solution(xs.view(), &y, kernel, cfg.c, &sol))
    };
    #[cfg(feature = "parallel")]
    let machines: Result<Vec<_>> = {
        use rayon::prelude::*;
        positives.par_iter().map(train_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let machines: Result<Vec<_>> = positives.iter().map(train_one).collect();

    Ok(SvmModel {
        classes,
        kernel,
        c: cfg.c,
        standardizer,
        machines: machines?,
    })
}

pub fn train_multiclass(data: &LabeledDataset, cfg: &SvmConfig) -> Result<SvmModel> {
    train_multiclass_raw(data.features.view(), &data.labels, cfg)
}

/// Predicted labels and a (samples x classes) score matrix.
pub fn predict(model: &SvmModel, x: ArrayView2<'_, f64>) -> Result<(Vec<u32>, Array2<f64>)> {
    if x.ncols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.ncols(),
        });
    }
    let xs = match &model.standardizer {
        Some(s) => s.transform(x)?,
        None => x.to_owned(),
    };
    let k = model.classes.len();
    let mut scores = Array2::zeros((x.nrows(), k));
    if model.machines.len() == 1 && k == 2 {
        let f = model.machines[0].decision_batch(xs.view());
        for (i, v) in f.into_iter().enumerate() {
            scores[[i, 0]] = -v;
            scores[[i, 1]] = v;
        }
    } else {
        for (c, m) in model.machines.iter().enumerate() {
            for (i, v) in m.decision_batch(xs.view()).into_iter().enumerate() {
                scores[[i, c]] = v;
            }
        }
    }
    Ok((argmax_labels(&model.classes, scores.view()), scores))
}

/// Row-wise argmax; ties go to the lowest class id.
pub fn argmax_labels(classes: &[u32], scores: ArrayView2<'_, f64>) -> Vec<u32> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            classes[best]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Axis};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(n_per: usize, k: usize, spread: f64, seed: u64) -> (Array2<f64>, Vec<u32>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, spread).unwrap();
        let d = 4;
        let mut x = Array2::zeros((n_per * k, d));
        let mut y = Vec::new();
        for c in 0..k {
            for i in 0..n_per {
                let r = c * n_per + i;
                for j in 0..d {
                    let centre = if j % k == c % d { 6.0 } else { 0.0 } + c as f64 * 2.0 * (j as f64 - 1.5);
                    x[[r, j]] = centre + noise.sample(&mut rng);
                }
                y.push(c as u32);
            }
        }
        (x, y)
    }

    #[test]
    fn two_classes_use_one_machine() {
        let (x, y) = blobs(15, 2, 0.5, 1);
        let m = train_multiclass_raw(x.view(), &y, &SvmConfig::default()).unwrap();
        assert_eq!(m.machines.len(), 1);
        let (labels, scores) = predict(&m, x.view()).unwrap();
        let xs = m.standardizer.as_ref().unwrap().transform(x.view()).unwrap();
        for (i, row) in xs.rows().into_iter().enumerate() {
            let f = m.machines[0].decision(row);
            assert_eq!(labels[i], if f > 0.0 { 1 } else { 0 });
            assert!((scores[[i, 1]] + scores[[i, 0]]).abs() < 1e-12);
        }
    }

    #[test]
    fn six_separable_classes_fit() {
        let (x, y) = blobs(20, 6, 0.4, 2);
        let m = train_multiclass_raw(x.view(), &y, &SvmConfig::default()).unwrap();
        let (labels, _) = predict(&m, x.view()).unwrap();
        let correct = labels.iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(correct as f64 / y.len() as f64 >= 0.99);
        // a training point of a well-separated class maps back to it
        let (probe, _) = predict(&m, x.select(Axis(0), &[45]).view()).unwrap();
        assert_eq!(probe[0], y[45]);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = blobs(12, 3, 1.5, 3);
        let cfg = SvmConfig::default();
        let a = train_multiclass_raw(x.view(), &y, &cfg).unwrap();
        let b = train_multiclass_raw(x.view(), &y, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let probe = Array2::from_shape_fn((10, 4), |_| rng.random_range(-3.0..8.0));
        assert_eq!(predict(&a, probe.view()).unwrap(), predict(&b, probe.view()).unwrap());
    }

    #[test]
    fn zero_variance_column_does_not_change_scores() {
        let (x, y) = blobs(10, 3, 0.8, 4);
        let mut wide = Array2::from_elem((x.nrows(), x.ncols() + 1), 3.5);
        wide.slice_mut(ndarray::s![.., ..x.ncols()]).assign(&x);
        let cfg = SvmConfig {
            kernel: KernelSpec::Rbf { gamma: Some(0.3) },
            ..Default::default()
        };
        let a = train_multiclass_raw(x.view(), &y, &cfg).unwrap();
        let b = train_multiclass_raw(wide.view(), &y, &cfg).unwrap();
        let (_, sa) = predict(&a, x.view()).unwrap();
        let (_, sb) = predict(&b, wide.view()).unwrap();
        for (p, q) in sa.iter().zip(sb.iter()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_ties_pick_lowest_class() {
        let s = array![[1.0, 1.0, 0.0], [0.0, 2.0, 2.0]];
        assert_eq!(argmax_labels(&[3, 5, 9], s.view()), vec![3, 5]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (x, y) = blobs(5, 2, 0.5, 5);
        let m = train_multiclass_raw(x.view(), &y, &SvmConfig::default()).unwrap();
        assert!(matches!(
            predict(&m, Array2::zeros((1, 3)).view()),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn dataset_requires_two_sessions_per_class() {
        let x = Array2::zeros((4, 2));
        let ok = LabeledDataset::new(x.clone(), vec![0, 0, 1, 1], vec!["a".into(), "b".into(), "a".into(), "b".into()]);
        assert!(ok.is_ok());
        let bad = LabeledDataset::new(x, vec![0, 0, 1, 1], vec!["a".into(), "a".into(), "a".into(), "b".into()]);
        assert!(bad.is_err());
    }

    #[test]
    fn kernel_spec_parses() {
        assert_eq!("linear".parse::<KernelSpec>().unwrap(), KernelSpec::Linear);
        assert_eq!("RBF".parse::<KernelSpec>().unwrap(), KernelSpec::Rbf { gamma: None });
        assert!("poly".parse::<KernelSpec>().is_err());
    }
}
