//! Summary statistics and the paired two-sided t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 for a single value.
    pub std: f64,
    pub n: usize,
}

pub fn mean_std(values: &[f64]) -> Result<MeanStd> {
    if values.is_empty() {
        return Err(Error::TooFewSamples {
            required: 1,
            found: 0,
        });
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(MeanStd { mean, std, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p_value: f64,
    pub df: usize,
    pub mean_difference: f64,
}

/// Paired two-sided t-test on `a[i] - b[i]` with `n - 1` degrees of freedom.
///
/// Identical differences give `p = 1` when they are all zero and `p = 0`
/// otherwise.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            found: a.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let MeanStd { mean, std, n } = mean_std(&diffs)?;
    let df = n - 1;
    if std == 0.0 {
        let (t, p_value) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTest {
            t,
            p_value,
            df,
            mean_difference: mean,
        });
    }
    let t = mean * (n as f64).sqrt() / std;
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    let p_value = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(TTest {
        t,
        p_value,
        df,
        mean_difference: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_example() {
        let s = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]).unwrap().std, 0.0);
        assert!(mean_std(&[]).is_err());
    }

    #[test]
    fn identical_samples_have_p_one() {
        let a = [0.1, 0.2, 0.3];
        let r = paired_ttest(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn constant_shift_has_p_zero() {
        let r = paired_ttest(&[1.0, 2.0, 3.0], &[0.5, 1.5, 2.5]).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            paired_ttest(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            paired_ttest(&[1.0], &[2.0]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn symmetric_in_argument_order() {
        let a = [0.21, 0.25, 0.19, 0.30, 0.22];
        let b = [0.20, 0.27, 0.15, 0.26, 0.18];
        let ab = paired_ttest(&a, &b).unwrap();
        let ba = paired_ttest(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.t, -ba.t);
    }
}
