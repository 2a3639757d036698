//! Per-column descriptive statistics in the standard summary-table layout.

use serde::{Deserialize, Serialize};

use crate::data::SurveyDataset;
use crate::error::{Error, Result};

/// Eight summary statistics for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

/// Descriptive statistics for every column of a dataset.
///
/// `std_denominator` records the variance convention; this crate uses the
/// sample denominator (n - 1). Quantiles use linear interpolation between
/// order statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub columns: Vec<ColumnStats>,
    pub std_denominator: String,
}

pub const SAMPLE_STD: &str = "sample (n-1)";

/// Linear-interpolation quantile of a sorted slice: with h = (n-1)q, the
/// result is v[floor(h)] + frac(h) * (v[floor(h)+1] - v[floor(h)]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Computes the full statistics table. The dataset must be non-empty and
/// complete (run case-wise deletion first).
pub fn describe(ds: &SurveyDataset) -> Result<DescriptiveStats> {
    if ds.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut columns = Vec::new();
    for spec in ds.schema().columns() {
        ds.require_complete(&spec.name)?;
        let col = ds.column(&spec.name)?;
        let n = col.len();
        let mean = col.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = col
                .iter()
                .map(|v| {
                    let d = v - mean;
                    d * d
                })
                .sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = col.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN after completeness check"));
        columns.push(ColumnStats {
            name: spec.name.clone(),
            count: n,
            mean,
            std,
            min: sorted[0],
            p25: quantile_sorted(&sorted, 0.25),
            p50: quantile_sorted(&sorted, 0.50),
            p75: quantile_sorted(&sorted, 0.75),
            max: sorted[n - 1],
        });
    }
    Ok(DescriptiveStats {
        columns,
        std_denominator: SAMPLE_STD.to_string(),
    })
}

impl DescriptiveStats {
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Aligned plain-text table: one statistic per row, one column per variable.
    pub fn render_text(&self) -> String {
        let stats: [(&str, fn(&ColumnStats) -> String); 8] = [
            ("Count", |c| c.count.to_string()),
            ("Mean", |c| format!("{:.4}", c.mean)),
            ("Std", |c| format!("{:.4}", c.std)),
            ("Min", |c| format!("{:.4}", c.min)),
            ("25%", |c| format!("{:.4}", c.p25)),
            ("50%", |c| format!("{:.4}", c.p50)),
            ("75%", |c| format!("{:.4}", c.p75)),
            ("Max", |c| format!("{:.4}", c.max)),
        ];
        let widths: Vec<usize> = self
            .columns
            .iter()
            .map(|c| c.name.len().max(7) + 2)
            .collect();
        let mut out = String::new();
        out.push_str(&format!("{:<10}", "Statistic"));
        for (c, w) in self.columns.iter().zip(&widths) {
            out.push_str(&format!("{:>w$}", c.name, w = w));
        }
        out.push('\n');
        for (label, f) in stats {
            out.push_str(&format!("{label:<10}"));
            for (c, w) in self.columns.iter().zip(&widths) {
                out.push_str(&format!("{:>w$}", f(c), w = w));
            }
            out.push('\n');
        }
        out.push_str(&format!("(std denominator: {})\n", self.std_denominator));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            detail: format!("stats record: {e}"),
        })
    }
}
