//! Brute-force Bayes-optimal accuracy under a generative spec.
//!
//! For a binary outcome the optimal classifier predicts the likelier class
//! at each feature point, so its accuracy is E[max(p(x), 1 - p(x))]. With
//! independent discrete marginals and a small enough state space this
//! expectation is enumerated exactly; otherwise it is estimated by Monte
//! Carlo with a reported standard error. The report is the ceiling every
//! trained classifier is checked against.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, derive_seed, ExecMode};
use crate::synth::{CompiledOutcomeKind, GenerativeSpec};

/// State-count ceiling for exact enumeration: 2^20, i.e. 20 binary-equivalent
/// dimensions.
pub const ENUM_STATE_LIMIT: u128 = 1 << 20;

/// Default Monte Carlo sample count.
pub const DEFAULT_MC_SAMPLES: usize = 200_000;

/// RNG stream tag separating oracle draws from generation draws.
const ORACLE_STREAM: u64 = 0x0AC1_E000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub bayes_accuracy: f64,
    pub method: OracleMethod,
    /// 0 for exact enumeration.
    pub mc_samples: usize,
    /// 0 for exact enumeration.
    pub mc_std_error: f64,
}

/// Bayes-optimal accuracy for a binary outcome, enumerated exactly when all
/// features are independent and discrete with at most [`ENUM_STATE_LIMIT`]
/// joint states, Monte Carlo otherwise.
pub fn bayes_accuracy(spec: &GenerativeSpec, outcome: &str) -> Result<OracleReport> {
    let compiled = spec.compile()?;
    let outcome_idx = find_binary_outcome(spec, outcome)?;

    let independent = compiled.chol.is_none();
    let supports: Option<Vec<Vec<(f64, f64)>>> = spec
        .features
        .iter()
        .map(|f| f.marginal.support())
        .collect();
    if independent {
        if let Some(supports) = supports {
            let states: u128 = supports.iter().map(|s| s.len() as u128).product();
            if states <= ENUM_STATE_LIMIT {
                let co = &compiled.outcomes[outcome_idx];
                let link = match &co.kind {
                    CompiledOutcomeKind::Binary(link) => *link,
                    CompiledOutcomeKind::Continuous { .. } => unreachable!("checked binary"),
                };
                let p = supports.len();
                let mut idx = vec![0usize; p];
                let mut acc = 0.0;
                loop {
                    let mut prob = 1.0;
                    let mut z = co.intercept;
                    for (j, s) in supports.iter().enumerate() {
                        let (v, pv) = s[idx[j]];
                        prob *= pv;
                        z += co.slopes[j] * v;
                    }
                    let p1 = link.prob(z);
                    acc += prob * p1.max(1.0 - p1);
                    // odometer over the joint support
                    let mut j = 0;
                    loop {
                        if j == p {
                            return Ok(OracleReport {
                                bayes_accuracy: acc,
                                method: OracleMethod::ExactEnumeration,
                                mc_samples: 0,
                                mc_std_error: 0.0,
                            });
                        }
                        idx[j] += 1;
                        if idx[j] < supports[j].len() {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                }
            }
        }
    }
    bayes_accuracy_mc(spec, outcome, DEFAULT_MC_SAMPLES)
}

/// Monte Carlo estimate of the Bayes accuracy with its standard error.
pub fn bayes_accuracy_mc(
    spec: &GenerativeSpec,
    outcome: &str,
    samples: usize,
) -> Result<OracleReport> {
    bayes_accuracy_mc_with_mode(spec, outcome, samples, ExecMode::auto())
}

pub fn bayes_accuracy_mc_with_mode(
    spec: &GenerativeSpec,
    outcome: &str,
    samples: usize,
    mode: ExecMode,
) -> Result<OracleReport> {
    if samples < 2 {
        return Err(Error::Config {
            detail: "monte carlo oracle needs at least 2 samples".to_string(),
        });
    }
    let compiled = spec.compile()?;
    let outcome_idx = find_binary_outcome(spec, outcome)?;
    let co = &compiled.outcomes[outcome_idx];
    let link = match &co.kind {
        CompiledOutcomeKind::Binary(link) => *link,
        CompiledOutcomeKind::Continuous { .. } => unreachable!("checked binary"),
    };

    let root = derive_seed(spec.seed, ORACLE_STREAM);
    let partials = exec::map_chunks(mode, samples, exec::ROW_CHUNK, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, chunk.index as u64));
        let mut x = vec![0.0; compiled.n_features];
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..chunk.len {
            compiled.sample_features(&mut rng, &mut x);
            let p1 = link.prob(co.index(&x));
            let m = p1.max(1.0 - p1);
            sum += m;
            sum_sq += m * m;
        }
        (sum, sum_sq)
    });
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (s, q) in partials {
        sum += s;
        sum_sq += q;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(OracleReport {
        bayes_accuracy: mean,
        method: OracleMethod::MonteCarlo,
        mc_samples: samples,
        mc_std_error: (var / n).sqrt(),
    })
}

fn find_binary_outcome(spec: &GenerativeSpec, outcome: &str) -> Result<usize> {
    let idx = spec
        .outcomes
        .iter()
        .position(|o| o.name == outcome)
        .ok_or_else(|| Error::TaskMissing {
            outcome: outcome.to_string(),
        })?;
    if !spec.outcomes[idx].model.is_binary() {
        return Err(Error::UnsupportedTask {
            detail: format!("oracle supports binary outcomes; {outcome:?} is continuous"),
        });
    }
    Ok(idx)
}
