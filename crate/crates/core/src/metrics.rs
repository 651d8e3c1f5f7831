//! Forecast fit metrics.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {truth} true values vs {pred} predictions")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("need at least 2 values, got {0}")]
    TooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub mse: f64,
    pub rmse: f64,
    /// Coefficient of determination (`1 - SSE/SST`); `None` when the truth is
    /// constant. Negative for fits worse than the mean.
    pub r2: Option<f64>,
}

pub fn evaluate(y_true: &[f64], y_pred: &[f64]) -> Result<FitReport, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    let n = y_true.len();
    if n < 2 {
        return Err(MetricsError::TooShort(n));
    }
    let sse: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    let mean = y_true.iter().sum::<f64>() / n as f64;
    let sst: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    let mse = sse / n as f64;
    Ok(FitReport {
        mse,
        rmse: mse.sqrt(),
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_fit() {
        let r = evaluate(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            r,
            FitReport {
                mse: 0.0,
                rmse: 0.0,
                r2: Some(1.0)
            }
        );
    }

    #[test]
    fn constant_truth_has_no_r2() {
        let r = evaluate(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(
            r,
            FitReport {
                mse: 1.0,
                rmse: 1.0,
                r2: None
            }
        );
    }

    #[test]
    fn mean_predictor_scores_zero() {
        let t = [1.0, 4.0, 2.0, 7.0];
        let r = evaluate(&t, &[3.5; 4]).unwrap();
        assert!(r.r2.unwrap().abs() < 1e-15);
    }

    #[test]
    fn bad_fit_goes_negative() {
        let r = evaluate(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(r.r2, Some(-3.0));
    }

    #[test]
    fn errors() {
        assert_eq!(
            evaluate(&[1.0, 2.0], &[1.0]),
            Err(MetricsError::LengthMismatch { truth: 2, pred: 1 })
        );
        assert_eq!(evaluate(&[1.0], &[1.0]), Err(MetricsError::TooShort(1)));
    }

    proptest! {
        #[test]
        fn rmse_squared_is_mse(v in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..64)) {
            let (t, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let r = evaluate(&t, &p).unwrap();
            prop_assert!((r.rmse * r.rmse - r.mse).abs() <= 1e-12 * r.mse.max(1.0));
        }

        #[test]
        fn r2_shift_invariant(
            v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..32),
            shift in -50.0f64..50.0,
        ) {
            let (t, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let a = evaluate(&t, &p).unwrap();
            let ts: Vec<f64> = t.iter().map(|x| x + shift).collect();
            let ps: Vec<f64> = p.iter().map(|x| x + shift).collect();
            let b = evaluate(&ts, &ps).unwrap();
            if let (Some(x), Some(y)) = (a.r2, b.r2) {
                prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0));
            }
        }

        #[test]
        fn mse_permutation_invariant(
            v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..32).prop_shuffle()
        ) {
            let (t, p): (Vec<f64>, Vec<f64>) = v.iter().copied().unzip();
            let mut sorted = v.clone();
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let (ts, ps): (Vec<f64>, Vec<f64>) = sorted.into_iter().unzip();
            let a = evaluate(&t, &p).unwrap().mse;
            let b = evaluate(&ts, &ps).unwrap().mse;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
