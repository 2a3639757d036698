//! Least-squares solve via Householder QR.
//!
//! The factorization works on the design matrix directly; the normal
//! equations are never formed here. Near-collinear party/ideology columns
//! are expected in this domain, so rank problems are detected from the
//! diagonal of R and reported with the offending column names.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub struct LeastSquares {
    pub beta: Vec<f64>,
    /// (X'X)^-1, p x p row-major, computed as R^-1 R^-T.
    pub xtx_inv: Vec<f64>,
}

/// Relative tolerance on |r_jj| below which column j is declared linearly
/// dependent on the preceding columns.
const RANK_TOL: f64 = 1e-10;

pub fn least_squares(x: &Matrix, y: &[f64], names: &[String]) -> Result<LeastSquares> {
    let n = x.rows();
    let p = x.cols();
    assert_eq!(y.len(), n, "rhs length mismatch");
    assert_eq!(names.len(), p, "column name count mismatch");
    if n < p {
        return Err(Error::InsufficientData {
            detail: format!("{n} rows cannot identify {p} coefficients"),
        });
    }

    let mut a = x.data().to_vec();
    let mut b = y.to_vec();
    let idx = |i: usize, j: usize| i * p + j;

    let mut col_scale = 0.0_f64;
    for j in 0..p {
        let norm: f64 = (0..n).map(|i| a[idx(i, j)] * a[idx(i, j)]).sum::<f64>().sqrt();
        col_scale = col_scale.max(norm);
    }
    if col_scale == 0.0 {
        return Err(Error::Singular {
            columns: names.to_vec(),
        });
    }

    let mut dependent: Vec<String> = Vec::new();
    let mut v = vec![0.0; n];
    for j in 0..p {
        let sigma: f64 = (j..n).map(|i| a[idx(i, j)] * a[idx(i, j)]).sum::<f64>().sqrt();
        if sigma <= RANK_TOL * col_scale {
            dependent.push(names[j].clone());
            a[idx(j, j)] = 0.0;
            continue;
        }
        let alpha = if a[idx(j, j)] >= 0.0 { -sigma } else { sigma };
        v[j] = a[idx(j, j)] - alpha;
        for i in (j + 1)..n {
            v[i] = a[idx(i, j)];
        }
        let vtv: f64 = (j..n).map(|i| v[i] * v[i]).sum();
        a[idx(j, j)] = alpha;
        for i in (j + 1)..n {
            a[idx(i, j)] = 0.0;
        }
        for k in (j + 1)..p {
            let dot: f64 = (j..n).map(|i| v[i] * a[idx(i, k)]).sum();
            let tau = 2.0 * dot / vtv;
            for i in j..n {
                a[idx(i, k)] -= tau * v[i];
            }
        }
        let dot: f64 = (j..n).map(|i| v[i] * b[i]).sum();
        let tau = 2.0 * dot / vtv;
        for i in j..n {
            b[i] -= tau * v[i];
        }
    }
    for j in 0..p {
        if a[idx(j, j)].abs() <= RANK_TOL * col_scale && !dependent.contains(&names[j]) {
            dependent.push(names[j].clone());
        }
    }
    if !dependent.is_empty() {
        return Err(Error::Singular { columns: dependent });
    }

    // back-substitution: R beta = Q'y
    let mut beta = vec![0.0; p];
    for j in (0..p).rev() {
        let mut s = b[j];
        for k in (j + 1)..p {
            s -= a[idx(j, k)] * beta[k];
        }
        beta[j] = s / a[idx(j, j)];
    }

    // R^-1 column by column, then (X'X)^-1 = R^-1 R^-T
    let mut r_inv = vec![0.0; p * p];
    for c in 0..p {
        let mut col = vec![0.0; p];
        for j in (0..=c).rev() {
            let mut s = if j == c { 1.0 } else { 0.0 };
            for k in (j + 1)..=c {
                s -= a[idx(j, k)] * col[k];
            }
            col[j] = s / a[idx(j, j)];
        }
        for j in 0..p {
            r_inv[j * p + c] = col[j];
        }
    }
    let mut xtx_inv = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..p {
                s += r_inv[i * p + k] * r_inv[j * p + k];
            }
            xtx_inv[i * p + j] = s;
        }
    }

    Ok(LeastSquares { beta, xtx_inv })
}
