//! Accuracy, confusion counts and one-vs-rest ROC AUC.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub session: String,
    pub n_train: usize,
    pub n_validation: usize,
    /// Percent.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<u32>,
    pub n_samples: usize,
    /// Percent, `100 * trace / total`.
    pub accuracy: f64,
    /// `confusion[true][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<usize>>,
    /// Percent per true class.
    pub per_class_accuracy: Vec<f64>,
    /// `None` for a class without both positives and negatives.
    pub per_class_auc: Vec<Option<f64>>,
    pub macro_auc: f64,
    pub folds: Vec<FoldReport>,
    /// Pooled predictions in input row order.
    pub predictions: Vec<u32>,
}

impl EvalReport {
    pub fn trace(&self) -> usize {
        (0..self.classes.len()).map(|i| self.confusion[i][i]).sum()
    }
}

/// ROC AUC of `scores` for binary `positive` flags, via the Mann-Whitney
/// statistic with midranks for ties. `None` unless both groups are present.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n = scores.len();
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let np = n_pos as f64;
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// Builds a report from true and predicted ids plus a (samples x classes)
/// score matrix whose columns follow `classes`. Folds are left empty.
pub fn metrics(truth: &[u32], predicted: &[u32], scores: ArrayView2<'_, f64>, classes: &[u32]) -> Result<EvalReport> {
    let n = truth.len();
    if predicted.len() != n {
        return Err(Error::LengthMismatch(n, predicted.len()));
    }
    if scores.nrows() != n {
        return Err(Error::LengthMismatch(n, scores.nrows()));
    }
    if scores.ncols() != classes.len() {
        return Err(Error::DimensionMismatch {
            expected: classes.len(),
            got: scores.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let index = |c: u32| {
        classes
            .iter()
            .position(|&k| k == c)
            .ok_or_else(|| Error::InvalidConfig(format!("label {c} is not among the scored classes")))
    };
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[index(t)?][index(p)?] += 1;
    }
    let trace: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class_accuracy = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            if total == 0 {
                0.0
            } else {
                100.0 * row[i] as f64 / total as f64
            }
        })
        .collect();
    let per_class_auc: Vec<Option<f64>> = classes
        .iter()
        .enumerate()
        .map(|(c, &id)| {
            let pos: Vec<bool> = truth.iter().map(|&t| t == id).collect();
            roc_auc(&scores.column(c).to_vec(), &pos)
        })
        .collect();
    let defined: Vec<f64> = per_class_auc.iter().flatten().copied().collect();
    let macro_auc = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(EvalReport {
        classes: classes.to_vec(),
        n_samples: n,
        accuracy: 100.0 * trace as f64 / n as f64,
        confusion,
        per_class_accuracy,
        per_class_auc,
        macro_auc,
        folds: Vec::new(),
        predictions: predicted.to_vec(),
    })
}
