//! Classification and regression metric primitives.
//!
//! Zero-denominator convention: ratio metrics report a value of 0.0 with
//! `defined = false` instead of erroring, so degenerate predictors still
//! produce a complete report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

/// A ratio metric together with its zero-denominator flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub defined: bool,
}

impl MetricValue {
    fn defined(value: f64) -> Self {
        MetricValue {
            value,
            defined: true,
        }
    }

    fn undefined() -> Self {
        MetricValue {
            value: 0.0,
            defined: false,
        }
    }
}

impl ConfusionMatrix {
    /// Counts exact agreement between 0/1 label and prediction vectors.
    pub fn from_labels(labels: &[f64], preds: &[f64]) -> Result<Self> {
        if labels.len() != preds.len() {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "labels ({}) and predictions ({}) differ in length",
                    labels.len(),
                    preds.len()
                ),
            });
        }
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut cm = ConfusionMatrix {
            true_pos: 0,
            false_pos: 0,
            true_neg: 0,
            false_neg: 0,
        };
        for (i, (&y, &p)) in labels.iter().zip(preds).enumerate() {
            for (v, which) in [(y, "label"), (p, "prediction")] {
                if v != 0.0 && v != 1.0 {
                    return Err(Error::RangeViolation {
                        row: Some(i + 1),
                        column: which.to_string(),
                        value: v,
                        expected: "binary value in {0, 1}".to_string(),
                    });
                }
            }
            match (y == 1.0, p == 1.0) {
                (true, true) => cm.true_pos += 1,
                (false, true) => cm.false_pos += 1,
                (false, false) => cm.true_neg += 1,
                (true, false) => cm.false_neg += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    /// (tp + tn) / total. Construction guarantees total > 0.
    pub fn accuracy(&self) -> f64 {
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> MetricValue {
        let denom = self.true_pos + self.false_pos;
        if denom == 0 {
            MetricValue::undefined()
        } else {
            MetricValue::defined(self.true_pos as f64 / denom as f64)
        }
    }

    pub fn recall(&self) -> MetricValue {
        let denom = self.true_pos + self.false_neg;
        if denom == 0 {
            MetricValue::undefined()
        } else {
            MetricValue::defined(self.true_pos as f64 / denom as f64)
        }
    }

    pub fn f1(&self) -> MetricValue {
        let p = self.precision();
        let r = self.recall();
        if !p.defined || !r.defined {
            return MetricValue::undefined();
        }
        f1_score(p.value, r.value)
    }
}

/// F1 = 2PR / (P + R); undefined when P + R = 0.
pub fn f1_score(precision: f64, recall: f64) -> MetricValue {
    let denom = precision + recall;
    if denom == 0.0 {
        MetricValue::undefined()
    } else {
        MetricValue::defined(2.0 * precision * recall / denom)
    }
}

/// Root mean squared error.
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let n = y.len() as f64;
    let sum: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok((sum / n).sqrt())
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let n = y.len() as f64;
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / n)
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::ShapeMismatch {
            detail: format!("vectors differ in length: {} vs {}", y.len(), yhat.len()),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_confusion() {
        let cm = ConfusionMatrix::from_labels(&[1.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(cm.true_pos, 1);
        assert_eq!(cm.true_neg, 1);
        assert_eq!(cm.false_neg, 1);
        assert_eq!(cm.false_pos, 0);
        assert_eq!(cm.total(), 3);
    }

    #[test]
    fn identical_vectors_have_no_errors() {
        let v = [1.0, 0.0, 1.0, 1.0];
        let cm = ConfusionMatrix::from_labels(&v, &v).unwrap();
        assert_eq!(cm.false_pos, 0);
        assert_eq!(cm.false_neg, 0);
        assert_eq!(cm.accuracy(), 1.0);
        assert_eq!(cm.precision().value, 1.0);
        assert_eq!(cm.recall().value, 1.0);
        assert_eq!(cm.f1().value, 1.0);
    }

    #[test]
    fn empty_vectors_error() {
        assert!(ConfusionMatrix::from_labels(&[], &[]).is_err());
    }

    #[test]
    fn non_binary_value_errors() {
        assert!(ConfusionMatrix::from_labels(&[2.0], &[1.0]).is_err());
        assert!(ConfusionMatrix::from_labels(&[1.0], &[0.5]).is_err());
    }

    #[test]
    fn reported_precision_recall_give_reported_f1() {
        // Internal consistency of a published P/R/F1 triple.
        let f1 = f1_score(0.8828, 0.9389);
        assert!(f1.defined);
        assert_eq!((f1.value * 1e4).round() / 1e4, 0.9100);
    }

    #[test]
    fn zero_denominator_flags() {
        let cm = ConfusionMatrix::from_labels(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        let p = cm.precision();
        assert!(!p.defined);
        assert_eq!(p.value, 0.0);
        let r = cm.recall();
        assert!(r.defined);
        assert_eq!(r.value, 0.0);
        assert!(!cm.f1().defined);
    }

    #[test]
    fn rmse_mae_analytic_values() {
        let y = [0.0, 1.0];
        let yhat = [1.0, 0.0];
        assert_eq!(rmse(&y, &yhat).unwrap(), 1.0);
        assert_eq!(mae(&y, &yhat).unwrap(), 1.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn rmse_length_mismatch_errors() {
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }
}
