//! Ordinary least squares with classical inference, plus the cross-dataset
//! coefficient-consistency comparison used as the transfer baseline.
//!
//! Fits go through a Householder QR (see [`solve`]); the raw normal
//! equations exist only as an independent oracle in the test suite. Binary
//! outcomes are fit as linear probability models, matching the summary-table
//! convention this artifact reproduces.

pub mod solve;

use serde::{Deserialize, Serialize};

use crate::data::{SurveyDataset, TaskSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Coefficients with |value| below this band are treated as sign-zero and
/// excluded from sign-match counting.
pub const SIGN_ZERO_BAND: f64 = 1e-9;

/// A fitted linear model with classical homoskedastic inference.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub outcome: String,
    /// Regressor names in canonical order (intercept excluded).
    pub feature_names: Vec<String>,
    /// Intercept first, then one slope per feature.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n: usize,
    pub r2: f64,
    pub adj_r2: f64,
    /// Residual standard error, with df_resid = n - (k + 1).
    pub rse: f64,
    pub df_resid: usize,
    /// Overall regression F with (k, n - k - 1) degrees of freedom.
    pub f_stat: f64,
    pub df1: usize,
    pub residuals: Vec<f64>,
}

/// Serializable summary of a fit (everything except the residual vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsSummary {
    pub outcome: String,
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub rse: f64,
    pub df_resid: usize,
    pub f_stat: f64,
    pub df1: usize,
}

impl OlsFit {
    pub fn summary(&self) -> OlsSummary {
        OlsSummary {
            outcome: self.outcome.clone(),
            feature_names: self.feature_names.clone(),
            coefficients: self.coefficients.clone(),
            std_errors: self.std_errors.clone(),
            n: self.n,
            r2: self.r2,
            adj_r2: self.adj_r2,
            rse: self.rse,
            df_resid: self.df_resid,
            f_stat: self.f_stat,
            df1: self.df1,
        }
    }
}

/// Per-coefficient comparison between two fits of the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientComparison {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<CoefficientRow>,
    /// Rows whose signs match, among rows outside the zero band.
    pub sign_match_count: usize,
    /// Rows outside the zero band.
    pub compared_count: usize,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub value_a: f64,
    pub value_b: f64,
    pub abs_diff: f64,
    /// True iff both values lie outside the zero band and their product is
    /// positive.
    pub sign_match: bool,
    /// True when either value lies within [`SIGN_ZERO_BAND`] of zero; such
    /// rows are excluded from `sign_match_count`.
    pub in_zero_band: bool,
}

/// Fits the task outcome on the dataset's features (intercept included),
/// solved by Householder QR.
pub fn fit_ols(ds: &SurveyDataset, task: &TaskSpec) -> Result<OlsFit> {
    let y = ds.outcome_vector(&task.outcome)?;
    let x = ds.feature_matrix()?;
    let names = ds.schema().feature_names();
    fit_xy(&x, &y, &names, &task.outcome)
}

/// Core fit on an explicit feature matrix (no intercept column; it is added
/// here).
pub fn fit_xy(features: &Matrix, y: &[f64], names: &[String], outcome: &str) -> Result<OlsFit> {
    let n = features.rows();
    let k = features.cols();
    if n <= k + 1 {
        return Err(Error::InsufficientData {
            detail: format!("{n} rows cannot support {k} regressors plus an intercept"),
        });
    }
    let mut design = Matrix::zeros(n, k + 1);
    for i in 0..n {
        design.set(i, 0, 1.0);
        for j in 0..k {
            design.set(i, j + 1, features.get(i, j));
        }
    }
    let mut design_names = Vec::with_capacity(k + 1);
    design_names.push("Constant".to_string());
    design_names.extend(names.iter().cloned());

    let sol = solve::least_squares(&design, y, &design_names)?;
    let beta = sol.beta;

    let mut residuals = Vec::with_capacity(n);
    let mut ssr = 0.0;
    for i in 0..n {
        let mut pred = beta[0];
        for j in 0..k {
            pred += beta[j + 1] * features.get(i, j);
        }
        let e = y[i] - pred;
        residuals.push(e);
        ssr += e * e;
    }
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y
        .iter()
        .map(|v| {
            let d = v - mean_y;
            d * d
        })
        .sum();
    if sst == 0.0 {
        return Err(Error::DegenerateOutcome {
            detail: format!("outcome {outcome:?} has zero variance"),
        });
    }
    let df_resid = n - (k + 1);
    let r2 = 1.0 - ssr / sst;
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df_resid as f64;
    let sigma2 = ssr / df_resid as f64;
    let rse = sigma2.sqrt();
    let f_stat = (r2 / k as f64) / ((1.0 - r2) / df_resid as f64);
    let std_errors: Vec<f64> = (0..=k)
        .map(|j| (sigma2 * sol.xtx_inv[j * (k + 1) + j]).sqrt())
        .collect();

    Ok(OlsFit {
        outcome: outcome.to_string(),
        feature_names: names.to_vec(),
        coefficients: beta,
        std_errors,
        n,
        r2,
        adj_r2,
        rse,
        df_resid,
        f_stat,
        df1: k,
        residuals,
    })
}

/// Applies fitted coefficients to a dataset: yhat = X beta, unclipped.
pub fn predict(fit: &OlsSummary, ds: &SurveyDataset) -> Result<Vec<f64>> {
    let names = ds.schema().feature_names();
    if names != fit.feature_names {
        return Err(Error::SchemaMismatch {
            detail: format!(
                "fit expects features {:?}, dataset has {:?}",
                fit.feature_names, names
            ),
        });
    }
    let x = ds.feature_matrix()?;
    let k = x.cols();
    let mut out = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let mut pred = fit.coefficients[0];
        for j in 0..k {
            pred += fit.coefficients[j + 1] * row[j];
        }
        out.push(pred);
    }
    Ok(out)
}

/// Output of [`transfer_ols`].
#[derive(Debug, Clone)]
pub struct TransferOls {
    /// Source-model predictions on the target features.
    pub predictions: Vec<f64>,
    /// OLS of the predicted outcome on the target features. Because the
    /// predictions are an exact linear function of the regressors, this
    /// refit reproduces the source coefficients with R^2 = 1.
    pub refit: OlsFit,
    /// Target-real-fit coefficients vs refit coefficients, present when the
    /// target carries the real outcome.
    pub target_fit: Option<OlsFit>,
    pub comparison: Option<CoefficientComparison>,
}

/// Applies a source-survey fit to a target survey: predicts, refits the
/// predictions on the target features, and (when the target has the real
/// outcome) compares the target-real coefficients against the refit.
pub fn transfer_ols(
    source_fit: &OlsSummary,
    target: &SurveyDataset,
    task: &TaskSpec,
) -> Result<TransferOls> {
    let predictions = predict(source_fit, target)?;
    let x = target.feature_matrix()?;
    let names = target.schema().feature_names();
    let refit = fit_xy(&x, &predictions, &names, &format!("{} (predicted)", task.outcome))?;

    let has_real_outcome = target.has_column(&task.outcome)
        && target.require_complete(&task.outcome).is_ok();
    let (target_fit, comparison) = if has_real_outcome {
        let real = fit_ols(target, task)?;
        let cmp = compare_coefficients(&real, &refit, "target real", "transferred")?;
        (Some(real), Some(cmp))
    } else {
        (None, None)
    };

    Ok(TransferOls {
        predictions,
        refit,
        target_fit,
        comparison,
    })
}

/// Pairs up coefficients by position and tallies sign agreement under the
/// documented zero band.
pub fn compare_coefficients(
    a: &OlsFit,
    b: &OlsFit,
    label_a: &str,
    label_b: &str,
) -> Result<CoefficientComparison> {
    if a.feature_names != b.feature_names {
        return Err(Error::SchemaMismatch {
            detail: "coefficient comparison requires identical regressor layouts".to_string(),
        });
    }
    let mut rows = Vec::with_capacity(a.coefficients.len());
    let mut names = vec!["Constant".to_string()];
    names.extend(a.feature_names.iter().cloned());
    let mut sign_match_count = 0;
    let mut compared_count = 0;
    let mut max_abs_diff: f64 = 0.0;
    for (i, name) in names.into_iter().enumerate() {
        let va = a.coefficients[i];
        let vb = b.coefficients[i];
        let in_zero_band = va.abs() < SIGN_ZERO_BAND || vb.abs() < SIGN_ZERO_BAND;
        let sign_match = !in_zero_band && va * vb > 0.0;
        if !in_zero_band {
            compared_count += 1;
            if sign_match {
                sign_match_count += 1;
            }
        }
        let abs_diff = (va - vb).abs();
        max_abs_diff = max_abs_diff.max(abs_diff);
        rows.push(CoefficientRow {
            name,
            value_a: va,
            value_b: vb,
            abs_diff,
            sign_match,
            in_zero_band,
        });
    }
    Ok(CoefficientComparison {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        rows,
        sign_match_count,
        compared_count,
        max_abs_diff,
    })
}

/// Renders a fit in the coefficient/(SE) column layout with the N, R^2,
/// Adj. R^2, RSE(df), and F-stat(df1; df2) block underneath.
pub fn summarize(fit: &OlsSummary) -> String {
    let mut out = String::new();
    let width = fit
        .feature_names
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("Constant".len())
        .max("F-stat".len());
    out.push_str(&format!("{:^w$}\n", fit.outcome, w = width + 14));
    out.push_str(&"-".repeat(width + 14));
    out.push('\n');
    let mut names = fit.feature_names.clone();
    names.push("Constant".to_string());
    for (i, name) in names.iter().enumerate() {
        // intercept prints last, matching the usual table layout
        let idx = if i == names.len() - 1 { 0 } else { i + 1 };
        out.push_str(&format!(
            "{:<w$}{:>12.3}\n",
            name,
            fit.coefficients[idx],
            w = width + 2
        ));
        out.push_str(&format!(
            "{:<w$}{:>12}\n",
            "",
            format!("({:.3})", fit.std_errors[idx]),
            w = width + 2
        ));
    }
    out.push_str(&"-".repeat(width + 14));
    out.push('\n');
    out.push_str(&format!("{:<w$}{:>12}\n", "N", fit.n, w = width + 2));
    out.push_str(&format!("{:<w$}{:>12.3}\n", "R2", fit.r2, w = width + 2));
    out.push_str(&format!("{:<w$}{:>12.3}\n", "Adj. R2", fit.adj_r2, w = width + 2));
    out.push_str(&format!(
        "{:<w$}{:>12.3}  (df={})\n",
        "RSE",
        fit.rse,
        fit.df_resid,
        w = width + 2
    ));
    let f_text = if fit.f_stat > 1e6 {
        format!("{:.3e}", fit.f_stat)
    } else {
        format!("{:.3}", fit.f_stat)
    };
    out.push_str(&format!(
        "{:<w$}{:>12}  (df={};{})\n",
        "F-stat",
        f_text,
        fit.df1,
        fit.df_resid,
        w = width + 2
    ));
    out
}

/// Renders a coefficient comparison as an aligned table.
pub fn render_comparison(cmp: &CoefficientComparison) -> String {
    let width = cmp.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(11);
    let mut out = String::new();
    out.push_str(&format!(
        "{:<w$}{:>14}{:>14}{:>10}  sign\n",
        "coefficient",
        cmp.label_a,
        cmp.label_b,
        "|diff|",
        w = width + 2
    ));
    for row in &cmp.rows {
        let sign = if row.in_zero_band {
            "zero-band"
        } else if row.sign_match {
            "match"
        } else {
            "flip"
        };
        out.push_str(&format!(
            "{:<w$}{:>14.3}{:>14.3}{:>10.3}  {}\n",
            row.name,
            row.value_a,
            row.value_b,
            row.abs_diff,
            sign,
            w = width + 2
        ));
    }
    out.push_str(&format!(
        "sign matches: {}/{} ({} in zero band), max |diff| {:.4}\n",
        cmp.sign_match_count,
        cmp.compared_count,
        cmp.rows.len() - cmp.compared_count,
        cmp.max_abs_diff
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::builtin::canonical_schema;
    use crate::data::schema::{FeatureSpec, Kind, Role, SurveySchema};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Deterministic toy dataset on the canonical schema with the outcome
    /// built exactly from the given coefficients (no noise).
    fn noiseless_dataset(coefs: &[f64; 9], outcome: &str) -> SurveyDataset {
        let schema = canonical_schema();
        let n = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut features: Vec<Vec<f64>> = Vec::new();
        for spec in &schema.features {
            let col: Vec<f64> = (0..n)
                .map(|_| match spec.kind {
                    Kind::Binary => f64::from(rng.random::<f64>() < 0.5),
                    _ => rng.random::<f64>(),
                })
                .collect();
            features.push(col);
        }
        let mut y = vec![coefs[0]; n];
        for (j, col) in features.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                y[i] += coefs[j + 1] * v;
            }
        }
        // y is unbounded in general; rescale into [0, 1] is not needed for
        // the continuous outcome because these coefficients keep it inside.
        let y: Vec<f64> = y.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let mut columns = features;
        columns.push(vec![f64::NAN; n]); // vote_trump unused
        columns.push(y);
        let mut ds =
            SurveyDataset::from_columns(schema, columns, "toy", "test").unwrap();
        if outcome == "vote_trump" {
            // swap roles: build a binary outcome instead
            let _ = &mut ds;
        }
        ds
    }

    #[test]
    fn noiseless_identifiability_recovers_coefficients() {
        // target-survey resentment coefficients reused as the construction
        let coefs = [0.880, -0.273, 0.004, -0.010, 0.093, -0.078, -0.037, 0.031, -0.401];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment")).unwrap();
        for (a, b) in fit.coefficients.iter().zip(coefs.iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!((fit.r2 - 1.0).abs() < 1e-10);
        assert!(fit.rse < 1e-10);
        assert!(fit.f_stat > 1e12 || fit.f_stat.is_infinite());
    }

    #[test]
    fn duplicate_feature_column_is_singular() {
        let base = SurveySchema::new(
            vec![
                FeatureSpec::new("inc", Role::Inc, Kind::ContinuousUnit, ""),
                FeatureSpec::new("inc_copy", Role::Inc, Kind::ContinuousUnit, ""),
            ],
            vec![FeatureSpec::new("y", Role::Outcome, Kind::ContinuousUnit, "")],
        )
        .unwrap();
        let inc: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let y: Vec<f64> = inc.iter().map(|v| 0.2 + 0.5 * v).collect();
        let ds =
            SurveyDataset::from_columns(base, vec![inc.clone(), inc, y], "toy", "test").unwrap();
        match fit_ols(&ds, &TaskSpec::continuous("y")) {
            Err(Error::Singular { columns }) => assert!(columns.contains(&"inc_copy".to_string())),
            other => panic!("expected singular, got {:?}", other.map(|f| f.r2)),
        }
    }

    #[test]
    fn too_few_rows_is_insufficient_data() {
        let coefs = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment").select_rows(&[0, 1, 2, 3]);
        assert!(matches!(
            fit_ols(&ds, &TaskSpec::continuous("racial_resentment")),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn predict_intercept_shape_and_interpolation() {
        let coefs = [0.3, 0.05, 0.01, -0.02, 0.04, -0.03, 0.02, 0.01, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment"))
            .unwrap()
            .summary();

        // all-zero feature row predicts the intercept
        let schema = ds.schema().clone();
        let zero_cols: Vec<Vec<f64>> = schema
            .columns()
            .map(|c| {
                if c.role == Role::Outcome {
                    vec![f64::NAN]
                } else {
                    vec![0.0]
                }
            })
            .collect();
        let zero_ds = SurveyDataset::from_columns(schema, zero_cols, "zero", "test").unwrap();
        let preds = predict(&fit, &zero_ds).unwrap();
        assert_eq!(preds.len(), 1);
        assert!((preds[0] - fit.coefficients[0]).abs() < 1e-12);

        // predicting the training data reproduces y in a noiseless fit
        let preds = predict(&fit, &ds).unwrap();
        assert_eq!(preds.len(), ds.n_rows());
        let y = ds.column("racial_resentment").unwrap();
        for (p, t) in preds.iter().zip(y) {
            assert!((p - t).abs() < 1e-9);
        }
    }

    #[test]
    fn predict_rejects_schema_mismatch() {
        let coefs = [0.3, 0.05, 0.01, -0.02, 0.04, -0.03, 0.02, 0.01, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let mut fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment"))
            .unwrap()
            .summary();
        fit.feature_names.swap(0, 1);
        assert!(matches!(
            predict(&fit, &ds),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn refit_on_predictions_has_unit_r2() {
        let coefs = [0.3, 0.05, 0.01, -0.02, 0.04, -0.03, 0.02, 0.01, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment"))
            .unwrap()
            .summary();
        let t = transfer_ols(&fit, &ds, &TaskSpec::continuous("racial_resentment")).unwrap();
        assert!((t.refit.r2 - 1.0).abs() < 1e-10);
        assert!(t.refit.rse < 1e-9);
        let cmp = t.comparison.unwrap();
        assert_eq!(cmp.compared_count, cmp.sign_match_count);
    }

    #[test]
    fn zero_slopes_fall_in_zero_band() {
        let coefs = [0.3, 0.05, 0.01, -0.02, 0.04, -0.03, 0.02, 0.01, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let mut fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment"))
            .unwrap()
            .summary();
        for c in fit.coefficients.iter_mut().skip(1) {
            *c = 0.0;
        }
        let t = transfer_ols(&fit, &ds, &TaskSpec::continuous("racial_resentment")).unwrap();
        let cmp = t.comparison.unwrap();
        // every slope row of the refit is ~0, so slopes sit in the zero band
        let banded = cmp.rows.iter().filter(|r| r.in_zero_band).count();
        assert!(banded >= 8, "expected at least 8 banded rows, got {banded}");
    }

    #[test]
    fn summarize_prints_df_arithmetic() {
        let coefs = [0.3, 0.05, 0.01, -0.02, 0.04, -0.03, 0.02, 0.01, 0.1];
        let ds = noiseless_dataset(&coefs, "racial_resentment");
        let fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment")).unwrap();
        assert_eq!(fit.df1, 8);
        assert_eq!(fit.df_resid, ds.n_rows() - 9);
        let text = summarize(&fit.summary());
        assert!(text.contains(&format!("(df={};{})", 8, ds.n_rows() - 9)));
        assert!(text.contains("Constant"));
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let coefs = [0.4, 0.1, -0.05, 0.02, 0.03, -0.08, 0.06, 0.01, -0.2];
        let mut ds = noiseless_dataset(&coefs, "racial_resentment");
        // add deterministic noise so residuals are nonzero
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noisy: Vec<f64> = ds
            .column("racial_resentment")
            .unwrap()
            .iter()
            .map(|v| (v + 0.05 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0))
            .collect();
        let schema = ds.schema().clone();
        let mut cols: Vec<Vec<f64>> = schema
            .columns()
            .map(|c| ds.column(&c.name).unwrap().to_vec())
            .collect();
        let pos = schema.columns().position(|c| c.name == "racial_resentment").unwrap();
        cols[pos] = noisy;
        ds = SurveyDataset::from_columns(schema, cols, "toy", "test").unwrap();

        let fit = fit_ols(&ds, &TaskSpec::continuous("racial_resentment")).unwrap();
        let x = ds.feature_matrix().unwrap();
        let sum_resid: f64 = fit.residuals.iter().sum();
        assert!(sum_resid.abs() < 1e-8);
        for j in 0..x.cols() {
            let dot: f64 = (0..x.rows()).map(|i| x.get(i, j) * fit.residuals[i]).sum();
            assert!(dot.abs() < 1e-8, "column {j} not orthogonal: {dot}");
        }
    }
}
