//! The three-stage transfer workflow: pre-train on the source survey,
//! freeze-and-fine-tune on the target survey, then evaluate on held-out
//! target rows (or impute where the outcome is absent). Every experiment
//! also runs the OLS baseline so reports juxtapose the neural transfer with
//! the coefficient-consistency check.
//!
//! A single experiment is sequential and fully determined by its config:
//! the split, the model init, and both training stages draw from seeds
//! derived from `TransferConfig::seed`, and report payloads are
//! byte-reproducible. Timestamps live outside the payload.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::describe::DescriptiveStats;
use crate::data::schema::align_schemas;
use crate::data::{FeatureSpec, Kind, Role, SurveyDataset, SurveySchema, TaskKind, TaskSpec};
use crate::error::{Error, Result};
use crate::linear::{self, CoefficientComparison, OlsSummary};
use crate::metrics::{ConfusionMatrix, MetricValue};
use crate::nn::io::model_ref;
use crate::nn::{train, EpochStats, MlpModel, TrainConfig};

/// Seed streams derived from the experiment root seed.
const SPLIT_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const SCRATCH_INIT_STREAM: u64 = 3;

/// Full experiment configuration. Every random choice downstream is pinned
/// by the seeds recorded here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferConfig {
    /// Hidden trunk widths (rectifier layers).
    pub hidden: Vec<usize>,
    pub source_train: TrainConfig,
    pub finetune: TrainConfig,
    /// Layer selectors frozen before fine-tuning.
    pub freeze_policy: Vec<String>,
    pub test_fraction: f64,
    pub eval_tasks: Vec<TaskSpec>,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            hidden: vec![16, 8],
            source_train: TrainConfig::default(),
            // fine-tuning takes smaller steps than pre-training
            finetune: TrainConfig {
                learning_rate: 0.025,
                ..TrainConfig::default()
            },
            freeze_policy: vec!["trunk:*".to_string()],
            test_fraction: 0.2,
            eval_tasks: vec![
                TaskSpec::binary("vote_trump"),
                TaskSpec::continuous("racial_resentment"),
            ],
            seed: 0,
        }
    }
}

impl TransferConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: TransferConfig = toml::from_str(text).map_err(|e| Error::Config {
            detail: format!("experiment config: {e}"),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config {
                detail: format!("test_fraction must lie in (0, 1), got {}", self.test_fraction),
            });
        }
        if self.eval_tasks.is_empty() {
            return Err(Error::Config {
                detail: "eval_tasks must name at least one outcome".to_string(),
            });
        }
        Ok(())
    }

    pub fn split_seed(&self) -> u64 {
        crate::exec::derive_seed(self.seed, SPLIT_STREAM)
    }

    pub fn init_seed(&self) -> u64 {
        crate::exec::derive_seed(self.seed, INIT_STREAM)
    }

    /// The deterministic target split shared by the library pipeline and the
    /// stage commands, so chained stages reproduce `run_experiment` exactly.
    pub fn split_target(&self, target: &SurveyDataset) -> Result<(SurveyDataset, SurveyDataset)> {
        target.split_train_test(self.test_fraction, self.split_seed())
    }

    /// Hash of the canonical config serialization; recorded in provenance.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Builds the default multi-head model for a feature layout and task list.
pub fn build_model(
    schema: &SurveySchema,
    tasks: &[TaskSpec],
    hidden: &[usize],
    seed: u64,
) -> Result<MlpModel> {
    MlpModel::for_tasks(schema.feature_names(), hidden, tasks, seed)
}

/// Pre-trains a fresh model on the source survey (all layers trainable).
pub fn pretrain(
    source: &SurveyDataset,
    tasks: &[TaskSpec],
    config: &TransferConfig,
) -> Result<(MlpModel, Vec<EpochStats>)> {
    config.validate()?;
    for t in tasks {
        if !source.has_column(&t.outcome) {
            return Err(Error::TaskMissing {
                outcome: t.outcome.clone(),
            });
        }
    }
    let model = build_model(source.schema(), tasks, &config.hidden, config.init_seed())?;
    train(&model, source, tasks, &config.source_train)
}

/// Applies the freeze policy and continues training on target rows.
///
/// The returned model's frozen layers are bit-identical to the input's;
/// only trainable layers move, and only on the supplied target rows.
pub fn finetune(
    model: &MlpModel,
    target_train: &SurveyDataset,
    tasks: &[TaskSpec],
    config: &TransferConfig,
) -> Result<(MlpModel, Vec<EpochStats>)> {
    config.validate()?;
    let frozen = model.apply_freeze_policy(&config.freeze_policy)?;
    if frozen.n_unfrozen() == 0 {
        return Err(Error::NoTrainableParameters);
    }
    if config.finetune.epochs == 0 {
        return Ok((frozen, Vec::new()));
    }
    train(&frozen, target_train, tasks, &config.finetune)
}

/// Per-task evaluation on held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskEval {
    Binary {
        confusion: ConfusionMatrix,
        accuracy: f64,
        precision: MetricValue,
        recall: MetricValue,
        f1: MetricValue,
    },
    Continuous {
        rmse: f64,
        mae: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tasks: BTreeMap<String, TaskEval>,
    pub n_rows: usize,
}

/// Classification threshold: the positive class is predicted when p >= 0.5.
pub const CLASS_THRESHOLD: f64 = 0.5;

/// Evaluates the model on a complete test set. Binary heads are thresholded
/// at [`CLASS_THRESHOLD`]; continuous heads are scored unclipped.
pub fn evaluate(
    model: &MlpModel,
    target_test: &SurveyDataset,
    tasks: &[TaskSpec],
) -> Result<EvalReport> {
    let x = target_test.feature_matrix()?;
    if target_test.schema().feature_names() != model.feature_order {
        return Err(Error::SchemaMismatch {
            detail: "test set features do not match the model's feature order".to_string(),
        });
    }
    let outputs = model.forward_batch(&x)?;
    let mut report = BTreeMap::new();
    for task in tasks {
        let labels = target_test.outcome_vector(&task.outcome)?;
        let preds = outputs.get(&task.outcome).ok_or_else(|| Error::UnsupportedTask {
            detail: format!("model has no head for task {:?}", task.outcome),
        })?;
        let eval = match task.kind {
            TaskKind::Binary => {
                let hard: Vec<f64> = preds
                    .iter()
                    .map(|&p| f64::from(p >= CLASS_THRESHOLD))
                    .collect();
                let cm = ConfusionMatrix::from_labels(&labels, &hard)?;
                TaskEval::Binary {
                    confusion: cm,
                    accuracy: cm.accuracy(),
                    precision: cm.precision(),
                    recall: cm.recall(),
                    f1: cm.f1(),
                }
            }
            TaskKind::ContinuousUnit => TaskEval::Continuous {
                rmse: crate::metrics::rmse(&labels, preds)?,
                mae: crate::metrics::mae(&labels, preds)?,
            },
        };
        report.insert(task.outcome.clone(), eval);
    }
    Ok(EvalReport {
        tasks: report,
        n_rows: target_test.n_rows(),
    })
}

/// Fills in a missing outcome: appends `<task>_imputed` (binary heads also
/// get `<task>_prob`) plus a provenance flag column marking the rows as
/// imputed. Continuous imputations are clipped to [0, 1].
pub fn impute(model: &MlpModel, target: &SurveyDataset, task: &TaskSpec) -> Result<SurveyDataset> {
    if target.schema().feature_names() != model.feature_order {
        return Err(Error::SchemaMismatch {
            detail: "target features do not match the model's feature order".to_string(),
        });
    }
    let x = target.feature_matrix()?;
    let outputs = model.forward_batch(&x)?;
    let preds = outputs.get(&task.outcome).ok_or_else(|| Error::UnsupportedTask {
        detail: format!("model has no head for task {:?}", task.outcome),
    })?;
    let mut out = target.clone();
    match task.kind {
        TaskKind::Binary => {
            let labels: Vec<f64> = preds
                .iter()
                .map(|&p| f64::from(p >= CLASS_THRESHOLD))
                .collect();
            out = out.with_outcome_column(
                FeatureSpec::new(
                    &format!("{}_imputed", task.outcome),
                    Role::Outcome,
                    Kind::Binary,
                    "imputed label, positive when probability >= 0.5",
                ),
                labels,
            )?;
            out = out.with_outcome_column(
                FeatureSpec::new(
                    &format!("{}_prob", task.outcome),
                    Role::Outcome,
                    Kind::ContinuousUnit,
                    "model probability behind the imputed label",
                ),
                preds.clone(),
            )?;
        }
        TaskKind::ContinuousUnit => {
            let values: Vec<f64> = preds.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
            out = out.with_outcome_column(
                FeatureSpec::new(
                    &format!("{}_imputed", task.outcome),
                    Role::Outcome,
                    Kind::ContinuousUnit,
                    "imputed value, clipped to [0, 1]",
                ),
                values,
            )?;
        }
    }
    out = out.with_outcome_column(
        FeatureSpec::new(
            &format!("{}_imputed_flag", task.outcome),
            Role::Outcome,
            Kind::Binary,
            "1 = value produced by imputation",
        ),
        vec![1.0; target.n_rows()],
    )?;
    Ok(out)
}

/// OLS baseline artifacts for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub source_fit: OlsSummary,
    /// Refit of the transferred predictions on the target features.
    pub transfer_refit: OlsSummary,
    pub target_fit: Option<OlsSummary>,
    pub comparison: Option<CoefficientComparison>,
}

/// Deterministic split bookkeeping recorded in the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_index_hash: String,
    pub test_index_hash: String,
}

/// Everything a run produces, minus wall-clock timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPayload {
    pub config_hash: String,
    pub source_label: String,
    pub target_label: String,
    pub shared_features: Vec<String>,
    pub split: SplitRecord,
    pub pretrained_model_ref: String,
    pub finetuned_model_ref: String,
    pub pretrain_history: Vec<EpochStats>,
    pub finetune_history: Vec<EpochStats>,
    pub eval: EvalReport,
    pub baseline: BTreeMap<String, BaselineRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub payload: ExperimentPayload,
    /// Segregated from the payload so determinism checks hash clean.
    pub timing: Timing,
}

impl ExperimentResult {
    /// Canonical payload bytes; identical across reruns with equal seeds.
    pub fn payload_json(&self) -> String {
        serde_json::to_string_pretty(&self.payload).expect("payload serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let p = &self.payload;
        let mut out = String::new();
        out.push_str("experiment report\n=================\n");
        out.push_str(&format!("source: {}\n", p.source_label));
        out.push_str(&format!(
            "target: {} (train {} rows, test {} rows)\n",
            p.target_label, p.split.train_rows, p.split.test_rows
        ));
        out.push_str(&format!("shared features: {}\n", p.shared_features.join(", ")));
        out.push_str(&format!("pretrained model: {}\n", &p.pretrained_model_ref[..16]));
        out.push_str(&format!("finetuned model:  {}\n", &p.finetuned_model_ref[..16]));
        for (task, eval) in &p.eval.tasks {
            out.push('\n');
            match eval {
                TaskEval::Binary {
                    confusion,
                    accuracy,
                    precision,
                    recall,
                    f1,
                } => {
                    out.push_str(&format!("[{task}] binary head\n"));
                    out.push_str(&format!("  accuracy  {:.4}\n", accuracy));
                    out.push_str(&format!(
                        "  precision {:.4}{}\n",
                        precision.value,
                        if precision.defined { "" } else { " (undefined)" }
                    ));
                    out.push_str(&format!(
                        "  recall    {:.4}{}\n",
                        recall.value,
                        if recall.defined { "" } else { " (undefined)" }
                    ));
                    out.push_str(&format!(
                        "  F1        {:.4}{}\n",
                        f1.value,
                        if f1.defined { "" } else { " (undefined)" }
                    ));
                    out.push_str(&format!(
                        "  confusion tp={} fp={} tn={} fn={}\n",
                        confusion.true_pos,
                        confusion.false_pos,
                        confusion.true_neg,
                        confusion.false_neg
                    ));
                }
                TaskEval::Continuous { rmse, mae } => {
                    out.push_str(&format!("[{task}] continuous head\n"));
                    out.push_str(&format!("  rmse {rmse:.4}\n"));
                    out.push_str(&format!("  mae  {mae:.4}\n"));
                }
            }
        }
        for (task, baseline) in &p.baseline {
            out.push('\n');
            out.push_str(&format!("OLS baseline [{task}]\n"));
            out.push_str(&linear::summarize(&baseline.source_fit));
            if let Some(cmp) = &baseline.comparison {
                out.push('\n');
                out.push_str(&linear::render_comparison(cmp));
            }
        }
        out
    }
}

fn index_hash(idx: &[usize]) -> String {
    let mut hasher = Sha256::new();
    for i in idx {
        hasher.update((*i as u64).to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Runs the full workflow: align schemas, split the target, pre-train,
/// fine-tune, evaluate on held-out rows, and fit the OLS baselines. Fully
/// deterministic per config; errors propagate and no partial result is
/// returned.
pub fn run_experiment(
    source: &SurveyDataset,
    target: &SurveyDataset,
    config: &TransferConfig,
) -> Result<ExperimentResult> {
    let started = now_ms();
    config.validate()?;
    let shared = align_schemas(source.schema(), target.schema())?;
    if shared.features.is_empty() {
        return Err(Error::SchemaMismatch {
            detail: "source and target share no features".to_string(),
        });
    }
    for task in &config.eval_tasks {
        if shared.column(&task.outcome).is_none() {
            return Err(Error::TaskMissing {
                outcome: task.outcome.clone(),
            });
        }
    }
    let source_p = source.project(&shared)?;
    let target_p = target.project(&shared)?;

    let (train_idx, test_idx) =
        crate::data::split_indices(target_p.n_rows(), config.test_fraction, config.split_seed())?;
    debug_assert!(train_idx.iter().all(|i| !test_idx.contains(i)));
    let target_train = target_p.select_rows(&train_idx);
    let target_test = target_p.select_rows(&test_idx);

    let (pretrained, pretrain_history) = pretrain(&source_p, &config.eval_tasks, config)?;
    let (finetuned, finetune_history) =
        finetune(&pretrained, &target_train, &config.eval_tasks, config)?;
    let eval = evaluate(&finetuned, &target_test, &config.eval_tasks)?;

    let mut baseline = BTreeMap::new();
    for task in &config.eval_tasks {
        let source_fit = linear::fit_ols(&source_p, task)?.summary();
        let transfer = linear::transfer_ols(&source_fit, &target_p, task)?;
        baseline.insert(
            task.outcome.clone(),
            BaselineRecord {
                source_fit,
                transfer_refit: transfer.refit.summary(),
                target_fit: transfer.target_fit.as_ref().map(|f| f.summary()),
                comparison: transfer.comparison,
            },
        );
    }

    let payload = ExperimentPayload {
        config_hash: config.config_hash(),
        source_label: source.label().to_string(),
        target_label: target.label().to_string(),
        shared_features: shared.feature_names(),
        split: SplitRecord {
            train_rows: train_idx.len(),
            test_rows: test_idx.len(),
            train_index_hash: index_hash(&train_idx),
            test_index_hash: index_hash(&test_idx),
        },
        pretrained_model_ref: model_ref(&pretrained),
        finetuned_model_ref: model_ref(&finetuned),
        pretrain_history,
        finetune_history,
        eval,
        baseline,
    };
    Ok(ExperimentResult {
        payload,
        timing: Timing {
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        },
    })
}

/// Trains the same architecture from scratch on the target training rows:
/// the comparison arm for the transfer-benefit check. The scratch model gets
/// the fine-tune epoch budget but trains all layers at the pre-train rate.
pub fn train_from_scratch(
    target_train: &SurveyDataset,
    tasks: &[TaskSpec],
    config: &TransferConfig,
) -> Result<MlpModel> {
    let seed = crate::exec::derive_seed(config.seed, SCRATCH_INIT_STREAM);
    let model = build_model(target_train.schema(), tasks, &config.hidden, seed)?;
    let cfg = TrainConfig {
        learning_rate: config.source_train.learning_rate,
        epochs: config.finetune.epochs,
        ..config.finetune.clone()
    };
    let (trained, _) = train(&model, target_train, tasks, &cfg)?;
    Ok(trained)
}

/// Describe helper surfaced for the CLI: stats of a complete dataset.
pub fn describe_dataset(ds: &SurveyDataset) -> Result<DescriptiveStats> {
    crate::data::describe(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::builtin::{anes_2020_spec, ces_2020_spec};
    use crate::synth::generate;

    fn small_config() -> TransferConfig {
        TransferConfig {
            source_train: TrainConfig {
                epochs: 8,
                ..TrainConfig::default()
            },
            finetune: TrainConfig {
                learning_rate: 0.025,
                epochs: 8,
                ..TrainConfig::default()
            },
            seed: 11,
            ..TransferConfig::default()
        }
    }

    #[test]
    fn single_epoch_pretrain_has_one_history_entry() {
        let source = generate(&ces_2020_spec(), 600).unwrap();
        let mut cfg = small_config();
        cfg.source_train.epochs = 1;
        let (_, history) = pretrain(&source, &cfg.eval_tasks.clone(), &cfg).unwrap();
        assert_eq!(history.len(), 1);
    }

    #[test]
    fn pretrain_rejects_absent_task() {
        let source = generate(&ces_2020_spec(), 100).unwrap();
        let cfg = small_config();
        let tasks = vec![TaskSpec::binary("not_a_column")];
        assert!(matches!(
            pretrain(&source, &tasks, &cfg),
            Err(Error::TaskMissing { .. })
        ));
    }

    #[test]
    fn zero_epoch_finetune_only_applies_the_freeze_policy() {
        let source = generate(&ces_2020_spec(), 400).unwrap();
        let target = generate(&anes_2020_spec(), 200).unwrap();
        let mut cfg = small_config();
        cfg.finetune.epochs = 0;
        let tasks = cfg.eval_tasks.clone();
        let (model, _) = pretrain(&source, &tasks, &cfg).unwrap();
        let (tuned, history) = finetune(&model, &target, &tasks, &cfg).unwrap();
        assert!(history.is_empty());
        let expected = model.apply_freeze_policy(&cfg.freeze_policy).unwrap();
        assert_eq!(tuned, expected);
    }

    #[test]
    fn default_policy_keeps_trunk_bit_identical() {
        let source = generate(&ces_2020_spec(), 800).unwrap();
        let target = generate(&anes_2020_spec(), 300).unwrap();
        let cfg = small_config();
        let tasks = cfg.eval_tasks.clone();
        let (model, _) = pretrain(&source, &tasks, &cfg).unwrap();
        let (tuned, _) = finetune(&model, &target, &tasks, &cfg).unwrap();
        for (a, b) in model.trunk.iter().zip(&tuned.trunk) {
            assert!(a
                .weights
                .iter()
                .zip(&b.weights)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
            assert!(a
                .biases
                .iter()
                .zip(&b.biases)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn all_frozen_policy_is_rejected() {
        let source = generate(&ces_2020_spec(), 400).unwrap();
        let target = generate(&anes_2020_spec(), 200).unwrap();
        let mut cfg = small_config();
        cfg.freeze_policy = vec!["all".to_string()];
        let tasks = cfg.eval_tasks.clone();
        let (model, _) = pretrain(&source, &tasks, &cfg).unwrap();
        assert!(matches!(
            finetune(&model, &target, &tasks, &cfg),
            Err(Error::NoTrainableParameters)
        ));
    }

    #[test]
    fn shifted_intercept_target_moves_the_head_bias_toward_the_shift() {
        use crate::synth::OutcomeModel;
        let source_spec = ces_2020_spec();
        let mut target_spec = ces_2020_spec();
        target_spec.seed = 777;
        // shift the vote model intercept upward: more positive labels
        if let OutcomeModel::Binary { intercept, .. } = &mut target_spec.outcomes[0].model {
            *intercept += 0.25;
        }
        let source = generate(&source_spec, 4000).unwrap();
        let target = generate(&target_spec, 1500).unwrap();
        let mut cfg = small_config();
        cfg.source_train.epochs = 25;
        cfg.finetune.epochs = 25;
        cfg.eval_tasks = vec![TaskSpec::binary("vote_trump")];
        let tasks = cfg.eval_tasks.clone();
        let (model, _) = pretrain(&source, &tasks, &cfg).unwrap();
        let (tuned, _) = finetune(&model, &target, &tasks, &cfg).unwrap();
        let before = model.head("vote_trump").unwrap().layer.biases[0];
        let after = tuned.head("vote_trump").unwrap().layer.biases[0];
        assert!(
            after > before,
            "head bias should move toward the positive shift: {before} -> {after}"
        );
        // trunk parameters untouched under the default policy
        for (a, b) in model.trunk.iter().zip(&tuned.trunk) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn perfect_and_degenerate_predictors_evaluate_cleanly() {
        let target = generate(&anes_2020_spec(), 300).unwrap();
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let mut model = build_model(target.schema(), &tasks, &[4], 1).unwrap();
        // zero everything: p = 0.5 exactly, thresholded to all-positive
        for l in model
            .trunk
            .iter_mut()
            .chain(model.heads.iter_mut().map(|h| &mut h.layer))
        {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        // all-negative predictor: recall 0, precision undefined -> 0 + flag
        let mut neg = model.clone();
        neg.heads[0].layer.biases[0] = -30.0;
        let report = evaluate(&neg, &target, &tasks).unwrap();
        match &report.tasks["vote_trump"] {
            TaskEval::Binary {
                precision, recall, ..
            } => {
                assert_eq!(recall.value, 0.0);
                assert!(recall.defined);
                assert_eq!(precision.value, 0.0);
                assert!(!precision.defined);
            }
            other => panic!("expected binary eval, got {other:?}"),
        }

        // a predictor that reads off the label is perfect; emulate by
        // evaluating on a dataset whose labels equal the thresholded output
        let all_pos = evaluate(&model, &target, &tasks).unwrap();
        match &all_pos.tasks["vote_trump"] {
            TaskEval::Binary { confusion, .. } => {
                assert_eq!(confusion.false_neg, 0); // every prediction is 1
            }
            other => panic!("expected binary eval, got {other:?}"),
        }
    }

    #[test]
    fn impute_emits_labels_probabilities_and_flags() {
        let target = generate(&anes_2020_spec(), 120).unwrap();
        let tasks = vec![TaskSpec::binary("vote_trump")];
        let mut model = build_model(target.schema(), &tasks, &[4], 1).unwrap();
        for l in model
            .trunk
            .iter_mut()
            .chain(model.heads.iter_mut().map(|h| &mut h.layer))
        {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        let imputed = impute(&model, &target, &tasks[0]).unwrap();
        let labels = imputed.column("vote_trump_imputed").unwrap();
        let probs = imputed.column("vote_trump_prob").unwrap();
        let flags = imputed.column("vote_trump_imputed_flag").unwrap();
        assert_eq!(labels.len(), 120);
        // zero-weight model: p = 0.5 exactly, labeled 1 under the >= rule
        assert!(probs.iter().all(|&p| p == 0.5));
        assert!(labels.iter().all(|&l| l == 1.0));
        assert!(flags.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn run_experiment_is_deterministic() {
        let source = generate(&ces_2020_spec(), 1200).unwrap();
        let target = generate(&anes_2020_spec(), 500).unwrap();
        let cfg = small_config();
        let a = run_experiment(&source, &target, &cfg).unwrap();
        let b = run_experiment(&source, &target, &cfg).unwrap();
        assert_eq!(a.payload_json(), b.payload_json());
    }

    #[test]
    fn split_sizes_follow_the_fraction() {
        let target = generate(&anes_2020_spec(), 4740).unwrap();
        let cfg = small_config();
        let (train, test) = cfg.split_target(&target).unwrap();
        assert_eq!(test.n_rows(), 948);
        assert_eq!(train.n_rows(), 4740 - 948);
    }

    #[test]
    fn no_leakage_between_finetune_and_eval_rows() {
        let cfg = small_config();
        let (train_idx, test_idx) =
            crate::data::split_indices(1000, cfg.test_fraction, cfg.split_seed()).unwrap();
        let overlap = train_idx.iter().filter(|i| test_idx.contains(i)).count();
        assert_eq!(overlap, 0);
        let mut all: Vec<usize> = train_idx.iter().chain(&test_idx).copied().collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..1000).collect();
        assert_eq!(all, expected);
    }
}
