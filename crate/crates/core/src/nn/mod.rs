//! From-scratch multi-head feed-forward network.
//!
//! One shared trunk feeds one scalar output head per task. Every layer
//! carries a freeze flag; frozen parameters are bit-identical before and
//! after any training step. All arithmetic is `f64` and every random draw
//! comes from an explicitly seeded generator, so training is reproducible
//! bit for bit.

pub mod io;
pub mod train;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{TaskKind, TaskSpec};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::matrix::Matrix;

pub use train::{train, EpochStats, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Rectifier,
    Identity,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative at pre-activation `z` (rectifier subgradient at 0 is 0).
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let s = Activation::Sigmoid.apply(z);
                s * (1.0 - s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_width: usize, output_width: usize, activation: Activation) -> Self {
        LayerSpec {
            input_width,
            output_width,
            activation,
        }
    }
}

/// Dense layer with row-major (output x input) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub frozen: bool,
}

impl Layer {
    fn init(spec: LayerSpec, rng: &mut ChaCha8Rng) -> Self {
        // scaled-uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases zero
        let a = (6.0 / (spec.input_width + spec.output_width) as f64).sqrt();
        let weights = (0..spec.input_width * spec.output_width)
            .map(|_| rng.random::<f64>() * 2.0 * a - a)
            .collect();
        Layer {
            spec,
            weights,
            biases: vec![0.0; spec.output_width],
            frozen: false,
        }
    }

    /// out = act(W a + b); `out` must have length `output_width`.
    fn forward_into(&self, input: &[f64], pre: &mut [f64], post: &mut [f64]) {
        let (wi, wo) = (self.spec.input_width, self.spec.output_width);
        debug_assert_eq!(input.len(), wi);
        for o in 0..wo {
            let row = &self.weights[o * wi..(o + 1) * wi];
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            pre[o] = z;
            post[o] = self.spec.activation.apply(z);
        }
    }
}

/// Loss attached to an output head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadLoss {
    BinaryCrossEntropy,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub name: String,
    pub layer: Layer,
    pub loss: HeadLoss,
}

/// Shared trunk plus one scalar head per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub trunk: Vec<Layer>,
    pub heads: Vec<Head>,
    pub seed: u64,
    /// Canonical input column order.
    pub feature_order: Vec<String>,
}

/// Declares one head for [`MlpModel::init`].
#[derive(Debug, Clone)]
pub struct HeadSpec {
    pub name: String,
    pub layer: LayerSpec,
    pub loss: HeadLoss,
}

impl MlpModel {
    /// Builds a model with seeded scaled-uniform weights and zero biases.
    /// Layer widths must chain: trunk input = feature count, each head input
    /// = trunk output, head output width = 1.
    pub fn init(
        feature_order: Vec<String>,
        trunk_specs: &[LayerSpec],
        head_specs: &[HeadSpec],
        seed: u64,
    ) -> Result<Self> {
        let n_features = feature_order.len();
        if n_features == 0 {
            return Err(Error::ShapeMismatch {
                detail: "model needs at least one input feature".to_string(),
            });
        }
        if head_specs.is_empty() {
            return Err(Error::ShapeMismatch {
                detail: "model needs at least one head".to_string(),
            });
        }
        let mut width = n_features;
        for (i, spec) in trunk_specs.iter().enumerate() {
            if spec.input_width != width || spec.output_width == 0 {
                return Err(Error::ShapeMismatch {
                    detail: format!(
                        "trunk layer {i} expects input {} but the chain provides {width}",
                        spec.input_width
                    ),
                });
            }
            width = spec.output_width;
        }
        let mut names = BTreeMap::new();
        for h in head_specs {
            if names.insert(h.name.clone(), ()).is_some() {
                return Err(Error::ShapeMismatch {
                    detail: format!("duplicate head name {:?}", h.name),
                });
            }
            if h.layer.input_width != width {
                return Err(Error::ShapeMismatch {
                    detail: format!(
                        "head {:?} expects input {} but the trunk outputs {width}",
                        h.name, h.layer.input_width
                    ),
                });
            }
            if h.layer.output_width != 1 {
                return Err(Error::ShapeMismatch {
                    detail: format!("head {:?} must have output width 1", h.name),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trunk = trunk_specs
            .iter()
            .map(|s| Layer::init(*s, &mut rng))
            .collect();
        let heads = head_specs
            .iter()
            .map(|h| Head {
                name: h.name.clone(),
                layer: Layer::init(h.layer, &mut rng),
                loss: h.loss,
            })
            .collect();
        Ok(MlpModel {
            trunk,
            heads,
            seed,
            feature_order,
        })
    }

    /// Default architecture for a task list: rectifier trunk with the given
    /// hidden widths, then a sigmoid head per binary task and an identity
    /// head per continuous task.
    pub fn for_tasks(
        feature_order: Vec<String>,
        hidden: &[usize],
        tasks: &[TaskSpec],
        seed: u64,
    ) -> Result<Self> {
        let mut trunk = Vec::with_capacity(hidden.len());
        let mut width = feature_order.len();
        for &h in hidden {
            trunk.push(LayerSpec::new(width, h, Activation::Rectifier));
            width = h;
        }
        let heads: Vec<HeadSpec> = tasks
            .iter()
            .map(|t| match t.kind {
                TaskKind::Binary => HeadSpec {
                    name: t.outcome.clone(),
                    layer: LayerSpec::new(width, 1, Activation::Sigmoid),
                    loss: HeadLoss::BinaryCrossEntropy,
                },
                TaskKind::ContinuousUnit => HeadSpec {
                    name: t.outcome.clone(),
                    layer: LayerSpec::new(width, 1, Activation::Identity),
                    loss: HeadLoss::SquaredError,
                },
            })
            .collect();
        MlpModel::init(feature_order, &trunk, &heads, seed)
    }

    pub fn head(&self, name: &str) -> Option<&Head> {
        self.heads.iter().find(|h| h.name == name)
    }

    pub fn trunk_output_width(&self) -> usize {
        self.trunk
            .last()
            .map(|l| l.spec.output_width)
            .unwrap_or(self.feature_order.len())
    }

    /// All layers, trunk first then heads, with stable labels.
    pub fn layer_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = (0..self.trunk.len()).map(|i| format!("trunk:{i}")).collect();
        out.extend(self.heads.iter().map(|h| format!("head:{}", h.name)));
        out
    }

    pub fn n_unfrozen(&self) -> usize {
        self.trunk.iter().filter(|l| !l.frozen).count()
            + self.heads.iter().filter(|h| !h.layer.frozen).count()
    }

    /// Updates freeze flags for the layers matched by the selector.
    ///
    /// Selectors: `all`, `trunk:*`, `trunk:<index>`, `head:*`, `head:<name>`.
    /// Parameters are untouched.
    pub fn set_frozen(&self, selector: &str, flag: bool) -> Result<Self> {
        let mut out = self.clone();
        match selector {
            "all" => {
                for l in &mut out.trunk {
                    l.frozen = flag;
                }
                for h in &mut out.heads {
                    h.layer.frozen = flag;
                }
            }
            "trunk:*" => {
                for l in &mut out.trunk {
                    l.frozen = flag;
                }
            }
            "head:*" => {
                for h in &mut out.heads {
                    h.layer.frozen = flag;
                }
            }
            _ => {
                if let Some(rest) = selector.strip_prefix("trunk:") {
                    let i: usize = rest.parse().map_err(|_| Error::UnknownSelector {
                        selector: selector.to_string(),
                    })?;
                    let layer = out.trunk.get_mut(i).ok_or_else(|| Error::UnknownSelector {
                        selector: selector.to_string(),
                    })?;
                    layer.frozen = flag;
                } else if let Some(name) = selector.strip_prefix("head:") {
                    let head = out
                        .heads
                        .iter_mut()
                        .find(|h| h.name == name)
                        .ok_or_else(|| Error::UnknownSelector {
                            selector: selector.to_string(),
                        })?;
                    head.layer.frozen = flag;
                } else {
                    return Err(Error::UnknownSelector {
                        selector: selector.to_string(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Applies a freeze policy: each listed selector is frozen; everything
    /// else keeps its current flag.
    pub fn apply_freeze_policy(&self, policy: &[String]) -> Result<Self> {
        let mut out = self.clone();
        for sel in policy {
            out = out.set_frozen(sel, true)?;
        }
        Ok(out)
    }

    /// Forward pass over a row batch; returns one output vector per head.
    /// Head order follows the model's head list.
    pub fn forward_batch(&self, x: &Matrix) -> Result<BTreeMap<String, Vec<f64>>> {
        self.forward_batch_with_mode(x, ExecMode::auto())
    }

    /// Forward pass with an explicit execution mode; results are identical
    /// across modes.
    pub fn forward_batch_with_mode(
        &self,
        x: &Matrix,
        mode: ExecMode,
    ) -> Result<BTreeMap<String, Vec<f64>>> {
        if x.cols() != self.feature_order.len() {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "batch has {} columns, model expects {}",
                    x.cols(),
                    self.feature_order.len()
                ),
            });
        }
        let per_chunk = exec::map_chunks(mode, x.rows(), exec::ROW_CHUNK, |chunk| {
            let mut outs: Vec<Vec<f64>> = self
                .heads
                .iter()
                .map(|_| Vec::with_capacity(chunk.len))
                .collect();
            let mut scratch = Scratch::for_model(self);
            for i in chunk.start..chunk.start + chunk.len {
                let head_vals = self.forward_row(x.row(i), &mut scratch);
                for (o, v) in outs.iter_mut().zip(&head_vals) {
                    o.push(*v);
                }
            }
            outs
        });
        let mut result: BTreeMap<String, Vec<f64>> = self
            .heads
            .iter()
            .map(|h| (h.name.clone(), Vec::with_capacity(x.rows())))
            .collect();
        for chunk_outs in per_chunk {
            for (h, vals) in self.heads.iter().zip(chunk_outs) {
                result.get_mut(&h.name).expect("head present").extend(vals);
            }
        }
        Ok(result)
    }

    /// Single-row forward through trunk and heads, filling the scratch
    /// activations; returns one scalar per head in head order.
    pub(crate) fn forward_row(&self, row: &[f64], s: &mut Scratch) -> Vec<f64> {
        for (l, layer) in self.trunk.iter().enumerate() {
            if l == 0 {
                layer.forward_into(row, &mut s.trunk_pre[0], &mut s.trunk_post[0]);
            } else {
                let (before, after) = s.trunk_post.split_at_mut(l);
                layer.forward_into(&before[l - 1], &mut s.trunk_pre[l], &mut after[0]);
            }
        }
        let n_trunk = self.trunk.len();
        let mut outs = Vec::with_capacity(self.heads.len());
        for (hi, head) in self.heads.iter().enumerate() {
            let input: &[f64] = if n_trunk == 0 {
                row
            } else {
                &s.trunk_post[n_trunk - 1]
            };
            head.layer
                .forward_into(input, &mut s.head_pre[hi], &mut s.head_post[hi]);
            outs.push(s.head_post[hi][0]);
        }
        outs
    }
}

/// Reusable per-row activation buffers.
pub(crate) struct Scratch {
    pub trunk_pre: Vec<Vec<f64>>,
    pub trunk_post: Vec<Vec<f64>>,
    pub head_pre: Vec<Vec<f64>>,
    pub head_post: Vec<Vec<f64>>,
}

impl Scratch {
    pub fn for_model(model: &MlpModel) -> Self {
        Scratch {
            trunk_pre: model
                .trunk
                .iter()
                .map(|l| vec![0.0; l.spec.output_width])
                .collect(),
            trunk_post: model
                .trunk
                .iter()
                .map(|l| vec![0.0; l.spec.output_width])
                .collect(),
            head_pre: model.heads.iter().map(|_| vec![0.0; 1]).collect(),
            head_post: model.heads.iter().map(|_| vec![0.0; 1]).collect(),
        }
    }

}
