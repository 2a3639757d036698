//! Independent oracles shared by the integration suites. Each one is coded
//! as a second, separate route to the same quantity: the normal equations
//! for least squares, central differences for gradients, and a direct
//! sort-and-interpolate routine for quantiles. None of them touch the
//! implementation paths they check.

use survey_transfer::matrix::Matrix;
use survey_transfer::nn::train::{loss, BatchTargets, TrainConfig};
use survey_transfer::nn::MlpModel;

/// Least squares via the raw normal equations: forms X'X and X'y and solves
/// with Gauss-Jordan elimination (partial pivoting). Returns (beta,
/// (X'X)^-1). `x` must already include the intercept column.
pub fn normal_equations(x: &Matrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows();
    let p = x.cols();
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        let row = x.row(i);
        for a in 0..p {
            xty[a] += row[a] * y[i];
            for b in 0..p {
                xtx[a * p + b] += row[a] * row[b];
            }
        }
    }
    // augmented [X'X | I], reduce to [I | (X'X)^-1]
    let mut aug = vec![0.0; p * 2 * p];
    for i in 0..p {
        for j in 0..p {
            aug[i * 2 * p + j] = xtx[i * p + j];
        }
        aug[i * 2 * p + p + i] = 1.0;
    }
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&a, &b| {
                aug[a * 2 * p + col]
                    .abs()
                    .partial_cmp(&aug[b * 2 * p + col].abs())
                    .unwrap()
            })
            .unwrap();
        if pivot != col {
            for j in 0..2 * p {
                aug.swap(col * 2 * p + j, pivot * 2 * p + j);
            }
        }
        let d = aug[col * 2 * p + col];
        assert!(d.abs() > 1e-12, "oracle: singular normal equations");
        for j in 0..2 * p {
            aug[col * 2 * p + j] /= d;
        }
        for i in 0..p {
            if i == col {
                continue;
            }
            let f = aug[i * 2 * p + col];
            if f != 0.0 {
                for j in 0..2 * p {
                    aug[i * 2 * p + j] -= f * aug[col * 2 * p + j];
                }
            }
        }
    }
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            inv[i * p + j] = aug[i * 2 * p + p + j];
        }
    }
    let beta: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|j| inv[i * p + j] * xty[j]).sum())
        .collect();
    (beta, inv)
}

/// Central finite differences of the training loss with respect to every
/// parameter, at the given step. Walks the parameters through the public
/// model structure, perturbing one at a time.
pub fn finite_difference_gradients(
    model: &MlpModel,
    x: &Matrix,
    targets: &BatchTargets,
    config: &TrainConfig,
    step: f64,
) -> Vec<f64> {
    let locations = parameter_count(model);
    let mut grads = Vec::with_capacity(locations);
    for loc in 0..locations {
        let mut plus = model.clone();
        *param_mut(&mut plus, loc) += step;
        let mut minus = model.clone();
        *param_mut(&mut minus, loc) -= step;
        let lp = loss(&plus, x, targets, config).unwrap().total;
        let lm = loss(&minus, x, targets, config).unwrap().total;
        grads.push((lp - lm) / (2.0 * step));
    }
    grads
}

pub fn parameter_count(model: &MlpModel) -> usize {
    model
        .trunk
        .iter()
        .map(|l| l.weights.len() + l.biases.len())
        .sum::<usize>()
        + model
            .heads
            .iter()
            .map(|h| h.layer.weights.len() + h.layer.biases.len())
            .sum::<usize>()
}

/// Mutable reference to the `loc`-th parameter, in the fixed order
/// trunk-layer weights, trunk-layer biases, ..., head weights, head biases.
pub fn param_mut(model: &mut MlpModel, mut loc: usize) -> &mut f64 {
    for layer in &mut model.trunk {
        if loc < layer.weights.len() {
            return &mut layer.weights[loc];
        }
        loc -= layer.weights.len();
        if loc < layer.biases.len() {
            return &mut layer.biases[loc];
        }
        loc -= layer.biases.len();
    }
    for head in &mut model.heads {
        if loc < head.layer.weights.len() {
            return &mut head.layer.weights[loc];
        }
        loc -= head.layer.weights.len();
        if loc < head.layer.biases.len() {
            return &mut head.layer.biases[loc];
        }
        loc -= head.layer.biases.len();
    }
    panic!("parameter index out of range");
}

/// Flattens analytic gradients in the same order as [`param_mut`].
pub fn flatten_gradients(grads: &survey_transfer::nn::train::Gradients) -> Vec<f64> {
    let mut out = Vec::new();
    for g in &grads.trunk {
        out.extend_from_slice(&g.weights);
        out.extend_from_slice(&g.biases);
    }
    for (_, g) in &grads.heads {
        out.extend_from_slice(&g.weights);
        out.extend_from_slice(&g.biases);
    }
    out
}

/// Quantile by explicit definition: full sort, h = (n-1)q, linear
/// interpolation between the bracketing order statistics.
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
