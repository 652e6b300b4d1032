use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dimension z-score learned from training rows. Zero-variance
/// dimensions map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: ArrayView2<'_, f64>) -> Result<Self> {
        if train.nrows() < 2 {
            return Err(Error::TooFewRows {
                min: 2,
                got: train.nrows(),
            });
        }
        let n = train.nrows() as f64;
        let mean: Vec<f64> = train.mean_axis(Axis(0)).expect("rows checked").to_vec();
        let std = train
            .columns()
            .into_iter()
            .zip(&mean)
            .map(|(col, m)| (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (mut col, (m, s)) in out.columns_mut().into_iter().zip(self.mean.iter().zip(&self.std)) {
            if *s > 0.0 {
                col.mapv_inplace(|v| (v - m) / s);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }
}

/// Fits a [`Standardizer`] on `train` and returns it with the transformed rows.
pub fn standardize_fit_transform(train: ArrayView2<'_, f64>) -> Result<(Standardizer, Array2<f64>)> {
    let st = Standardizer::fit(train)?;
    let x = st.transform(train)?;
    Ok((st, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn two_points() {
        let (st, x) = standardize_fit_transform(array![[0.0], [2.0]].view()).unwrap();
        assert_eq!(st.mean, vec![1.0]);
        assert_eq!(st.std, vec![1.0]);
        assert_eq!(x, array![[-1.0], [1.0]]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (_, x) = standardize_fit_transform(array![[3.0, 1.0], [3.0, 2.0], [3.0, 4.0]].view()).unwrap();
        assert!(x.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn needs_two_rows() {
        assert!(matches!(
            Standardizer::fit(array![[1.0, 2.0]].view()),
            Err(Error::TooFewRows { min: 2, got: 1 })
        ));
    }

    proptest! {
        #[test]
        fn columns_have_zero_mean_unit_std(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..40)) {
            let n = rows.len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let m = Array2::from_shape_vec((n, 4), flat).unwrap();
            let (st, x) = standardize_fit_transform(m.view()).unwrap();
            for (j, col) in x.columns().into_iter().enumerate() {
                if st.std[j] < 1e-6 { continue; }
                let mean = col.sum() / n as f64;
                let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
                prop_assert!(mean.abs() < 1e-12);
                prop_assert!((sd - 1.0).abs() < 1e-9);
            }
        }
    }
}
