//! Loss, exact backpropagation, and deterministic mini-batch training.
//!
//! Per-batch gradients are accumulated over fixed row chunks and the chunk
//! sums are folded in chunk order, so results do not depend on the execution
//! mode. Frozen layers always receive zero gradients and are skipped by the
//! update step.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{SurveyDataset, TaskSpec};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::matrix::Matrix;
use crate::nn::{HeadLoss, MlpModel, Scratch};

/// Probabilities are clamped to this band before the log in the binary
/// cross-entropy, so the loss is finite for every input. Outside the band
/// the clamped loss is locally constant and the gradient is zero.
pub const BCE_CLAMP: f64 = 1e-7;

/// Mini-batch gradient descent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Per-head loss weights; heads without an entry weigh 1.0.
    #[serde(default)]
    pub loss_weights: BTreeMap<String, f64>,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            batch_size: 64,
            epochs: 100,
            loss_weights: BTreeMap::new(),
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self, model: &MlpModel) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config {
                detail: format!("learning_rate must be finite and >= 0, got {}", self.learning_rate),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::Config {
                detail: "batch_size must be at least 1".to_string(),
            });
        }
        for (name, w) in &self.loss_weights {
            if model.head(name).is_none() {
                return Err(Error::UnsupportedTask {
                    detail: format!("loss weight names unknown head {name:?}"),
                });
            }
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::Config {
                    detail: format!("loss weight for {name:?} must be finite and >= 0"),
                });
            }
        }
        Ok(())
    }

    pub fn weight_for(&self, head: &str) -> f64 {
        self.loss_weights.get(head).copied().unwrap_or(1.0)
    }
}

/// Targets for one batch, keyed by head name. A batch may carry targets for
/// a subset of heads; heads without targets contribute zero loss and zero
/// gradient.
pub type BatchTargets<'a> = BTreeMap<String, &'a [f64]>;

/// Loss value split by head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub per_head: BTreeMap<String, f64>,
}

/// Parameter-shaped gradient buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub trunk: Vec<LayerGrad>,
    pub heads: Vec<(String, LayerGrad)>,
}

impl Gradients {
    fn zeros(model: &MlpModel) -> Self {
        Gradients {
            trunk: model
                .trunk
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
            heads: model
                .heads
                .iter()
                .map(|h| {
                    (
                        h.name.clone(),
                        LayerGrad {
                            weights: vec![0.0; h.layer.weights.len()],
                            biases: vec![0.0; h.layer.biases.len()],
                        },
                    )
                })
                .collect(),
        }
    }

    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.trunk.iter_mut().zip(&other.trunk) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
        for ((_, a), (_, b)) in self.heads.iter_mut().zip(&other.heads) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }
}

fn check_targets(model: &MlpModel, x: &Matrix, targets: &BatchTargets) -> Result<()> {
    for (name, t) in targets {
        let head = model.head(name).ok_or_else(|| Error::UnsupportedTask {
            detail: format!("targets provided for unknown head {name:?}"),
        })?;
        if t.len() != x.rows() {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "targets for head {name:?} have {} rows, batch has {}",
                    t.len(),
                    x.rows()
                ),
            });
        }
        for (i, &v) in t.iter().enumerate() {
            let ok = match head.loss {
                HeadLoss::BinaryCrossEntropy => v == 0.0 || v == 1.0,
                HeadLoss::SquaredError => (0.0..=1.0).contains(&v) && v.is_finite(),
            };
            if !ok {
                return Err(Error::RangeViolation {
                    row: Some(i + 1),
                    column: name.clone(),
                    value: v,
                    expected: match head.loss {
                        HeadLoss::BinaryCrossEntropy => "binary target in {0, 1}".to_string(),
                        HeadLoss::SquaredError => "continuous target in [0, 1]".to_string(),
                    },
                });
            }
        }
    }
    Ok(())
}

fn bce_row(p: f64, y: f64) -> f64 {
    let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln())
}

/// Weighted multi-head loss: total = sum_h w_h * L_h with mean binary
/// cross-entropy for classification heads and mean squared error for
/// regression heads.
pub fn loss(
    model: &MlpModel,
    x: &Matrix,
    targets: &BatchTargets,
    config: &TrainConfig,
) -> Result<LossBreakdown> {
    config.validate(model)?;
    check_targets(model, x, targets)?;
    let outputs = model.forward_batch(x)?;
    let n = x.rows() as f64;
    let mut per_head = BTreeMap::new();
    let mut total = 0.0;
    for head in &model.heads {
        let Some(t) = targets.get(&head.name) else {
            continue;
        };
        let preds = &outputs[&head.name];
        let raw: f64 = match head.loss {
            HeadLoss::BinaryCrossEntropy => {
                preds.iter().zip(*t).map(|(&p, &y)| bce_row(p, y)).sum::<f64>() / n
            }
            HeadLoss::SquaredError => {
                preds
                    .iter()
                    .zip(*t)
                    .map(|(&p, &y)| {
                        let d = p - y;
                        d * d
                    })
                    .sum::<f64>()
                    / n
            }
        };
        total += config.weight_for(&head.name) * raw;
        per_head.insert(head.name.clone(), raw);
    }
    Ok(LossBreakdown { total, per_head })
}

/// Exact analytic gradients of the weighted total loss for all unfrozen
/// parameters; frozen layers receive zeros.
pub fn gradients(
    model: &MlpModel,
    x: &Matrix,
    targets: &BatchTargets,
    config: &TrainConfig,
) -> Result<(Gradients, LossBreakdown)> {
    gradients_with_mode(model, x, targets, config, ExecMode::auto())
}

pub fn gradients_with_mode(
    model: &MlpModel,
    x: &Matrix,
    targets: &BatchTargets,
    config: &TrainConfig,
    mode: ExecMode,
) -> Result<(Gradients, LossBreakdown)> {
    config.validate(model)?;
    check_targets(model, x, targets)?;
    if x.cols() != model.feature_order.len() {
        return Err(Error::ShapeMismatch {
            detail: format!(
                "batch has {} columns, model expects {}",
                x.cols(),
                model.feature_order.len()
            ),
        });
    }
    let n = x.rows() as f64;

    // per-chunk gradient and loss sums, folded in chunk order
    let partials = exec::map_chunks(mode, x.rows(), exec::GRAD_CHUNK, |chunk| {
        let mut grad = Gradients::zeros(model);
        let mut losses: Vec<f64> = vec![0.0; model.heads.len()];
        let mut scratch = Scratch::for_model(model);
        let n_trunk = model.trunk.len();
        let trunk_in = model.trunk_output_width();
        let mut d_trunk_out = vec![0.0; trunk_in];
        for i in chunk.start..chunk.start + chunk.len {
            let row = x.row(i);
            model.forward_row(row, &mut scratch);
            let trunk_out: &[f64] = if n_trunk == 0 {
                row
            } else {
                &scratch.trunk_post[n_trunk - 1]
            };
            d_trunk_out.iter_mut().for_each(|v| *v = 0.0);
            for (hi, head) in model.heads.iter().enumerate() {
                let Some(t) = targets.get(&head.name) else {
                    continue;
                };
                let y = t[i];
                let p = scratch.head_post[hi][0];
                let w = config.weight_for(&head.name);
                // d(total)/d(head pre-activation), including the 1/n of the mean
                let (row_loss, delta) = match head.loss {
                    HeadLoss::BinaryCrossEntropy => {
                        let l = bce_row(p, y);
                        // clamped region has zero gradient
                        let d = if p > BCE_CLAMP && p < 1.0 - BCE_CLAMP {
                            p - y
                        } else {
                            0.0
                        };
                        (l, d)
                    }
                    HeadLoss::SquaredError => {
                        let d = p - y;
                        (d * d, 2.0 * d)
                    }
                };
                losses[hi] += row_loss;
                let delta = w * delta / n;
                let hg = &mut grad.heads[hi].1;
                for (gw, a) in hg.weights.iter_mut().zip(trunk_out) {
                    *gw += delta * a;
                }
                hg.biases[0] += delta;
                for (d, wgt) in d_trunk_out.iter_mut().zip(&head.layer.weights) {
                    *d += delta * wgt;
                }
            }
            // backward through the trunk
            let mut d_out = d_trunk_out.clone();
            for l in (0..n_trunk).rev() {
                let layer = &model.trunk[l];
                let input: &[f64] = if l == 0 { row } else { &scratch.trunk_post[l - 1] };
                let wi = layer.spec.input_width;
                let mut d_in = vec![0.0; wi];
                let lg = &mut grad.trunk[l];
                for o in 0..layer.spec.output_width {
                    let dz = d_out[o] * layer.spec.activation.derivative(scratch.trunk_pre[l][o]);
                    if dz == 0.0 {
                        continue;
                    }
                    let wrow = &layer.weights[o * wi..(o + 1) * wi];
                    let grow = &mut lg.weights[o * wi..(o + 1) * wi];
                    for j in 0..wi {
                        grow[j] += dz * input[j];
                        d_in[j] += dz * wrow[j];
                    }
                    lg.biases[o] += dz;
                }
                d_out = d_in;
            }
        }
        (grad, losses)
    });

    let mut grad = Gradients::zeros(model);
    let mut loss_sums = vec![0.0; model.heads.len()];
    for (g, ls) in &partials {
        grad.add_assign(g);
        for (a, b) in loss_sums.iter_mut().zip(ls) {
            *a += b;
        }
    }

    // freeze contract: frozen layers report zero gradients
    for (layer, g) in model.trunk.iter().zip(grad.trunk.iter_mut()) {
        if layer.frozen {
            g.weights.iter_mut().for_each(|v| *v = 0.0);
            g.biases.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    for (head, (_, g)) in model.heads.iter().zip(grad.heads.iter_mut()) {
        if head.layer.frozen {
            g.weights.iter_mut().for_each(|v| *v = 0.0);
            g.biases.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    let mut per_head = BTreeMap::new();
    let mut total = 0.0;
    for (hi, head) in model.heads.iter().enumerate() {
        if targets.contains_key(&head.name) {
            let raw = loss_sums[hi] / n;
            total += config.weight_for(&head.name) * raw;
            per_head.insert(head.name.clone(), raw);
        }
    }
    Ok((grad, LossBreakdown { total, per_head }))
}

/// Per-epoch training record: mean per-row losses over the epoch's batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub total_loss: f64,
    pub per_head: BTreeMap<String, f64>,
}

/// Seeded mini-batch gradient descent over the dataset's task outcomes.
///
/// Deterministic per (model, config seed): shuffling uses its own stream and
/// every reduction is order-fixed.
pub fn train(
    model: &MlpModel,
    ds: &SurveyDataset,
    tasks: &[TaskSpec],
    config: &TrainConfig,
) -> Result<(MlpModel, Vec<EpochStats>)> {
    config.validate(model)?;
    if model.n_unfrozen() == 0 {
        return Err(Error::NoTrainableParameters);
    }
    if ds.schema().feature_names() != model.feature_order {
        return Err(Error::SchemaMismatch {
            detail: format!(
                "model expects features {:?}, dataset has {:?}",
                model.feature_order,
                ds.schema().feature_names()
            ),
        });
    }
    if tasks.is_empty() {
        return Err(Error::UnsupportedTask {
            detail: "no tasks to train on".to_string(),
        });
    }
    let x = ds.feature_matrix()?;
    let mut task_targets: Vec<(String, Vec<f64>)> = Vec::with_capacity(tasks.len());
    for t in tasks {
        if model.head(&t.outcome).is_none() {
            return Err(Error::UnsupportedTask {
                detail: format!("model has no head for task {:?}", t.outcome),
            });
        }
        task_targets.push((t.outcome.clone(), ds.outcome_vector(&t.outcome)?));
    }

    let mut current = model.clone();
    let mut history = Vec::with_capacity(config.epochs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = x.rows();
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_weighted_sum = 0.0;
        let mut head_sums: BTreeMap<String, f64> = BTreeMap::new();
        for batch_idx in order.chunks(config.batch_size) {
            let bx = x.select_rows(batch_idx);
            let gathered: Vec<(String, Vec<f64>)> = task_targets
                .iter()
                .map(|(name, col)| {
                    (
                        name.clone(),
                        batch_idx.iter().map(|&i| col[i]).collect::<Vec<f64>>(),
                    )
                })
                .collect();
            let targets: BatchTargets = gathered
                .iter()
                .map(|(name, v)| (name.clone(), v.as_slice()))
                .collect();
            let (grads, batch_loss) = gradients(&current, &bx, &targets, config)?;
            apply_step(&mut current, &grads, config.learning_rate);
            let bn = batch_idx.len() as f64;
            loss_weighted_sum += batch_loss.total * bn;
            for (name, l) in &batch_loss.per_head {
                *head_sums.entry(name.clone()).or_insert(0.0) += l * bn;
            }
        }
        let per_head = head_sums
            .into_iter()
            .map(|(k, v)| (k, v / n as f64))
            .collect();
        history.push(EpochStats {
            epoch,
            total_loss: loss_weighted_sum / n as f64,
            per_head,
        });
    }
    Ok((current, history))
}

fn apply_step(model: &mut MlpModel, grads: &Gradients, lr: f64) {
    for (layer, g) in model.trunk.iter_mut().zip(&grads.trunk) {
        if layer.frozen {
            continue;
        }
        for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
            *w -= lr * gw;
        }
        for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
            *b -= lr * gb;
        }
    }
    for (head, (_, g)) in model.heads.iter_mut().zip(&grads.heads) {
        if head.layer.frozen {
            continue;
        }
        for (w, gw) in head.layer.weights.iter_mut().zip(&g.weights) {
            *w -= lr * gw;
        }
        for (b, gb) in head.layer.biases.iter_mut().zip(&g.biases) {
            *b -= lr * gb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::builtin::canonical_schema;
    use crate::data::TaskKind;
    use rand::Rng;

    fn feature_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn model(seed: u64) -> MlpModel {
        MlpModel::for_tasks(
            feature_names(4),
            &[6],
            &[
                TaskSpec {
                    outcome: "vote".to_string(),
                    kind: TaskKind::Binary,
                },
                TaskSpec {
                    outcome: "scale".to_string(),
                    kind: TaskKind::ContinuousUnit,
                },
            ],
            seed,
        )
        .unwrap()
    }

    fn batch(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        Matrix::from_rows(&rows)
    }

    #[test]
    fn uniform_half_probabilities_cost_ln2_per_example() {
        let mut m = model(1);
        for l in m.trunk.iter_mut().chain(m.heads.iter_mut().map(|h| &mut h.layer)) {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        let x = batch(8, 2);
        let y = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let mut targets = BatchTargets::new();
        targets.insert("vote".to_string(), &y);
        let l = loss(&m, &x, &targets, &TrainConfig::default()).unwrap();
        assert!((l.per_head["vote"] - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn perfect_regression_head_has_zero_mse() {
        let m = model(1);
        let x = batch(6, 3);
        let preds = m.forward_batch(&x).unwrap();
        // targets may fall outside [0,1] for a random model; clamp inputs instead
        let y: Vec<f64> = preds["scale"].iter().map(|v| v.clamp(0.0, 1.0)).collect();
        if y.iter().zip(&preds["scale"]).all(|(a, b)| a == b) {
            let mut targets = BatchTargets::new();
            targets.insert("scale".to_string(), &y);
            let l = loss(&m, &x, &targets, &TrainConfig::default()).unwrap();
            assert_eq!(l.per_head["scale"], 0.0);
        }
    }

    #[test]
    fn near_perfect_probabilities_give_near_zero_bce() {
        let mut m = model(1);
        // saturate the vote head bias so p ~ 1
        for l in m.trunk.iter_mut().chain(m.heads.iter_mut().map(|h| &mut h.layer)) {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        m.heads[0].layer.biases[0] = 30.0;
        let x = batch(5, 4);
        let y = vec![1.0; 5];
        let mut targets = BatchTargets::new();
        targets.insert("vote".to_string(), &y);
        let l = loss(&m, &x, &targets, &TrainConfig::default()).unwrap();
        assert!(l.per_head["vote"] < 1e-6);
        assert!(l.per_head["vote"].is_finite());
    }

    #[test]
    fn out_of_range_target_errors() {
        let m = model(1);
        let x = batch(2, 5);
        let y = vec![0.0, 2.0];
        let mut targets = BatchTargets::new();
        targets.insert("vote".to_string(), &y);
        assert!(loss(&m, &x, &targets, &TrainConfig::default()).is_err());
    }

    #[test]
    fn frozen_trunk_receives_zero_gradients() {
        let m = model(2).set_frozen("trunk:*", true).unwrap();
        let x = batch(10, 6);
        let y: Vec<f64> = (0..10).map(|i| f64::from(i % 2 == 0)).collect();
        let mut targets = BatchTargets::new();
        targets.insert("vote".to_string(), &y);
        let (g, _) = gradients(&m, &x, &targets, &TrainConfig::default()).unwrap();
        for lg in &g.trunk {
            assert!(lg.weights.iter().all(|&v| v == 0.0));
            assert!(lg.biases.iter().all(|&v| v == 0.0));
        }
        // head gradients are generally nonzero
        assert!(g.heads[0].1.weights.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn zero_loss_weight_zeroes_that_heads_gradient() {
        let m = model(2);
        let x = batch(10, 6);
        let yv: Vec<f64> = (0..10).map(|i| f64::from(i % 2 == 0)).collect();
        let ys: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let mut targets = BatchTargets::new();
        targets.insert("vote".to_string(), &yv);
        targets.insert("scale".to_string(), &ys);
        let mut cfg = TrainConfig::default();
        cfg.loss_weights.insert("scale".to_string(), 0.0);
        let (g, _) = gradients(&m, &x, &targets, &cfg).unwrap();
        let scale_grad = &g.heads.iter().find(|(n, _)| n == "scale").unwrap().1;
        assert!(scale_grad.weights.iter().all(|&v| v == 0.0));
        assert!(scale_grad.biases.iter().all(|&v| v == 0.0));
    }

    fn toy_dataset(n: usize, seed: u64) -> SurveyDataset {
        // canonical schema; vote label is the separable rule 1{pid > 0.5}
        let schema = canonical_schema();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for spec in &schema.features {
            let col: Vec<f64> = (0..n)
                .map(|_| match spec.kind {
                    crate::data::Kind::Binary => f64::from(rng.random::<f64>() < 0.5),
                    _ => rng.random::<f64>(),
                })
                .collect();
            cols.push(col);
        }
        let vote: Vec<f64> = cols[0].iter().map(|&p| f64::from(p > 0.5)).collect();
        let rr: Vec<f64> = cols[0].iter().map(|&p| p).collect();
        cols.push(vote);
        cols.push(rr);
        SurveyDataset::from_columns(schema, cols, "toy", "test").unwrap()
    }

    #[test]
    fn zero_learning_rate_is_a_null_step() {
        let schema_tasks = vec![TaskSpec::binary("vote_trump")];
        let ds = toy_dataset(64, 1);
        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[6], &schema_tasks, 3).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        };
        let (trained, history) = train(&m, &ds, &schema_tasks, &cfg).unwrap();
        assert_eq!(trained, m);
        assert_eq!(history.len(), 5);
        for h in &history {
            assert!((h.total_loss - history[0].total_loss).abs() < 1e-12);
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let ds = toy_dataset(128, 2);
        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[8], &tasks, 4).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        let (a, ha) = train(&m, &ds, &tasks, &cfg).unwrap();
        let (b, hb) = train(&m, &ds, &tasks, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn separable_rule_is_learned() {
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let ds = toy_dataset(400, 3);
        // verify separability directly: the rule 1{pid > 0.5} labels the data
        let pid = ds.column("pid").unwrap();
        let vote = ds.column("vote_trump").unwrap();
        assert!(pid.iter().zip(vote).all(|(&p, &v)| v == f64::from(p > 0.5)));

        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[8], &tasks, 5).unwrap();
        let cfg = TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        };
        let (trained, _) = train(&m, &ds, &tasks, &cfg).unwrap();
        let out = trained.forward_batch(&ds.feature_matrix().unwrap()).unwrap();
        let correct = out["vote_trump"]
            .iter()
            .zip(vote)
            .filter(|(&p, &y)| f64::from(p >= 0.5) == y)
            .count();
        let acc = correct as f64 / ds.n_rows() as f64;
        assert!(acc >= 0.99, "training accuracy {acc}");
    }

    #[test]
    fn all_frozen_refuses_to_train() {
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let ds = toy_dataset(32, 4);
        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[4], &tasks, 6)
            .unwrap()
            .set_frozen("all", true)
            .unwrap();
        assert!(matches!(
            train(&m, &ds, &tasks, &TrainConfig::default()),
            Err(Error::NoTrainableParameters)
        ));
    }

    #[test]
    fn frozen_layers_are_bit_identical_after_training() {
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let ds = toy_dataset(128, 5);
        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[8, 4], &tasks, 7)
            .unwrap()
            .set_frozen("trunk:*", true)
            .unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let (trained, _) = train(&m, &ds, &tasks, &cfg).unwrap();
        for (before, after) in m.trunk.iter().zip(&trained.trunk) {
            let same = before
                .weights
                .iter()
                .zip(&after.weights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
                && before
                    .biases
                    .iter()
                    .zip(&after.biases)
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "frozen trunk changed");
        }
        // heads did move
        assert_ne!(m.heads[0].layer, trained.heads[0].layer);
    }

    #[test]
    fn head_isolation_under_zero_weight() {
        let tasks = vec![
            TaskSpec::binary("vote_trump"),
            TaskSpec::continuous("racial_resentment"),
        ];
        let ds = toy_dataset(96, 6);
        let m = MlpModel::for_tasks(ds.schema().feature_names(), &[8], &tasks, 8).unwrap();
        let mut cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        cfg.loss_weights.insert("racial_resentment".to_string(), 0.0);
        let (trained, _) = train(&m, &ds, &tasks, &cfg).unwrap();
        let before = &m.head("racial_resentment").unwrap().layer;
        let after = &trained.head("racial_resentment").unwrap().layer;
        assert_eq!(before, after);
    }
}
