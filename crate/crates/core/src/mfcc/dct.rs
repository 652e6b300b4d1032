use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Unnormalized DCT-II, `C_k = sum_n x_n cos(pi k (n + 1/2) / N)`, computed
/// through a single length-`N` FFT of the even/odd reordered input.
pub fn dct2(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (i, &xi) in x.iter().enumerate() {
        let pos = if i % 2 == 0 { i / 2 } else { n - 1 - i / 2 };
        v[pos] = Complex64::new(xi, 0.0);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut v);
    Ok(v.iter()
        .enumerate()
        .map(|(k, vk)| (vk * Complex64::from_polar(1.0, -PI * k as f64 / (2.0 * n as f64))).re)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vector_has_only_dc() {
        let c = dct2(&[2.5; 64]).unwrap();
        assert!((c[0] - 160.0).abs() < 1e-10);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn single_element_is_identity() {
        assert_eq!(dct2(&[-3.25]).unwrap(), vec![-3.25]);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(dct2(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn odd_lengths() {
        let c = dct2(&[1.0, 2.0, 3.0]).unwrap();
        let direct: Vec<f64> = (0..3)
            .map(|k| {
                (0..3)
                    .map(|i| (i as f64 + 1.0) * (PI * k as f64 * (i as f64 + 0.5) / 3.0).cos())
                    .sum()
            })
            .collect();
        for (a, b) in c.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
