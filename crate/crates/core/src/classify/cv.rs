//! Leave-one-session-out cross-validation.

use ndarray::{Array2, Axis};

use super::metrics::{metrics, EvalReport, FoldReport};
use super::multiclass::{argmax_labels, predict, train_multiclass_raw, LabeledDataset, SvmConfig};
use crate::error::{Error, Result};

/// Train and validation row indices for one held-out session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub session: String,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// One fold per distinct session, in order of first appearance.
pub fn session_folds(data: &LabeledDataset) -> Result<Vec<Fold>> {
    let sessions = data.session_ids();
    if sessions.len() < 2 {
        return Err(Error::TooFewSessions(sessions.len()));
    }
    Ok(sessions
        .into_iter()
        .map(|s| {
            let (validation, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| data.sessions[i] == s);
            Fold {
                session: s,
                train,
                validation,
            }
        })
        .collect())
}

/// Holds each session out in turn and pools the validation predictions.
pub fn session_grouped_cv(data: &LabeledDataset, cfg: &SvmConfig) -> Result<EvalReport> {
    let folds = session_folds(data)?;
    let classes = data.classes();
    let mut scores = Array2::zeros((data.len(), classes.len()));
    let mut fold_reports = Vec::with_capacity(folds.len());
    for fold in &folds {
        let xt = data.features.select(Axis(0), &fold.train);
        let yt: Vec<u32> = fold.train.iter().map(|&i| data.labels[i]).collect();
        let model = train_multiclass_raw(xt.view(), &yt, cfg)?;
        let xv = data.features.select(Axis(0), &fold.validation);
        let (pred, s) = predict(&model, xv.view())?;
        let mut correct = 0;
        for (r, &i) in fold.validation.iter().enumerate() {
            if pred[r] == data.labels[i] {
                correct += 1;
            }
            // classes missing from this fold's training rows keep -inf
            for (c, id) in classes.iter().enumerate() {
                scores[[i, c]] = match model.classes.iter().position(|k| k == id) {
                    Some(m) => s[[r, m]],
                    None => f64::NEG_INFINITY,
                };
            }
        }
        fold_reports.push(FoldReport {
            session: fold.session.clone(),
            n_train: fold.train.len(),
            n_validation: fold.validation.len(),
            accuracy: 100.0 * correct as f64 / fold.validation.len() as f64,
        });
    }
    let predicted = argmax_labels(&classes, scores.view());
    let mut report = metrics(&data.labels, &predicted, scores.view(), &classes)?;
    report.folds = fold_reports;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// `k` classes x `s` sessions x `r` repetitions of 3-D blobs.
    fn dataset(k: usize, s: usize, r: usize, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let n = k * s * r;
        let mut x = Array2::zeros((n, 3));
        let mut labels = Vec::new();
        let mut sessions = Vec::new();
        let mut row = 0;
        for si in 0..s {
            for c in 0..k {
                for _ in 0..r {
                    let angle = c as f64 * std::f64::consts::TAU / k as f64;
                    x[[row, 0]] = 4.0 * angle.cos() + noise.sample(&mut rng);
                    x[[row, 1]] = 4.0 * angle.sin() + noise.sample(&mut rng);
                    x[[row, 2]] = noise.sample(&mut rng);
                    labels.push(c as u32);
                    sessions.push(format!("s{si}"));
                    row += 1;
                }
            }
        }
        LabeledDataset::new(x, labels, sessions).unwrap()
    }

    #[test]
    fn folds_of_270_and_30() {
        let data = dataset(6, 10, 5, 1);
        let folds = session_folds(&data).unwrap();
        assert_eq!(folds.len(), 10);
        for f in &folds {
            assert_eq!((f.train.len(), f.validation.len()), (270, 30));
            assert!(f.train.iter().all(|&i| data.sessions[i] != f.session));
            assert!(f.validation.iter().all(|&i| data.sessions[i] == f.session));
        }
        let mut seen: Vec<usize> = folds.iter().flat_map(|f| f.validation.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..300).collect::<Vec<_>>());
    }

    #[test]
    fn folds_of_3240_and_360() {
        let data = dataset(6, 10, 60, 2);
        for f in session_folds(&data).unwrap() {
            assert_eq!((f.train.len(), f.validation.len()), (3240, 360));
        }
    }

    #[test]
    fn single_session_is_rejected() {
        let mut data = dataset(2, 2, 3, 3);
        data.sessions.iter_mut().for_each(|s| *s = "only".into());
        assert!(matches!(session_grouped_cv(&data, &SvmConfig::default()), Err(Error::TooFewSessions(1))));
    }

    #[test]
    fn separable_cv_is_accurate() {
        let data = dataset(4, 5, 4, 4);
        let r = session_grouped_cv(&data, &SvmConfig::default()).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r.n_samples, 80);
        assert!(r.accuracy >= 99.0, "{}", r.accuracy);
        assert!(r.macro_auc > 0.99);
        assert_eq!(r.accuracy, 100.0 * r.trace() as f64 / 80.0);
    }
}
