//! Calibrated synthetic survey data.
//!
//! A [`GenerativeSpec`] pins per-feature marginals, an optional
//! Gaussian-copula dependence layer, and per-outcome linear-index models.
//! Everything downstream (generation, the Bayes oracle) is a pure function
//! of (spec, seed): per-chunk RNG streams derive deterministically from the
//! root seed, so generation is reproducible bit for bit in any execution
//! mode.

pub mod builtin;
pub mod calibrate;
pub mod marginal;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::schema::{FeatureSpec, Kind, Role, SurveySchema};
use crate::data::SurveyDataset;
use crate::error::{Error, Result};
use crate::exec::{self, derive_seed, ExecMode};

pub use calibrate::calibrate_to_moments;
pub use marginal::Marginal;
pub use oracle::{bayes_accuracy, bayes_accuracy_mc, OracleMethod, OracleReport};

use marginal::Sampler;

/// One synthetic feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGen {
    pub name: String,
    /// Role in the harmonized layout; inferred from canonical names when
    /// omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    pub kind: Kind,
    pub marginal: Marginal,
}

impl FeatureGen {
    pub fn new(name: &str, kind: Kind, marginal: Marginal) -> Self {
        FeatureGen {
            name: name.to_string(),
            role: None,
            kind,
            marginal,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = Some(role);
        self
    }

    fn resolved_role(&self) -> Result<Role> {
        if let Some(r) = self.role {
            return Ok(r);
        }
        let inferred = match self.name.as_str() {
            "pid" => Role::Pid,
            "sex" => Role::Sex,
            "south" => Role::South,
            "edu_binary" => Role::EduBinary,
            "age" => Role::Age,
            "white" => Role::White,
            "inc" => Role::Inc,
            "ideo" => Role::Ideo,
            _ => {
                return Err(Error::InvalidSpec {
                    detail: format!(
                        "feature {:?} has no role and its name is not canonical",
                        self.name
                    ),
                })
            }
        };
        Ok(inferred)
    }
}

/// Link mapping the linear index to a class-1 probability.
///
/// The linear index plays the role of a predicted probability, so both links
/// pivot at the probability midpoint 0.5: `Logistic` applies a sigmoid to
/// (z - 0.5) / temperature, and `Threshold` is the deterministic rule
/// 1{z >= 0.5}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Link {
    Logistic { temperature: f64 },
    Threshold,
}

impl Link {
    pub fn prob(&self, z: f64) -> f64 {
        match *self {
            Link::Logistic { temperature } => 1.0 / (1.0 + (-(z - 0.5) / temperature).exp()),
            Link::Threshold => {
                if z >= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Outcome model: a coefficient vector (intercept + one slope per feature)
/// plus a link (binary) or a noise scale (continuous).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeModel {
    Binary {
        link: Link,
        intercept: f64,
        slopes: BTreeMap<String, f64>,
    },
    /// y = z + e clipped to [0, 1], with e uniform on
    /// [-noise_std * sqrt(3), +noise_std * sqrt(3)] so its standard
    /// deviation is exactly `noise_std`.
    Continuous {
        noise_std: f64,
        intercept: f64,
        slopes: BTreeMap<String, f64>,
    },
}

impl OutcomeModel {
    pub fn intercept(&self) -> f64 {
        match self {
            OutcomeModel::Binary { intercept, .. } => *intercept,
            OutcomeModel::Continuous { intercept, .. } => *intercept,
        }
    }

    pub fn slopes(&self) -> &BTreeMap<String, f64> {
        match self {
            OutcomeModel::Binary { slopes, .. } => slopes,
            OutcomeModel::Continuous { slopes, .. } => slopes,
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, OutcomeModel::Binary { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeGen {
    pub name: String,
    pub model: OutcomeModel,
}

/// Pairwise latent correlations for the optional Gaussian copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    /// (feature a, feature b, correlation) triples; unlisted pairs are 0.
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeSpec {
    pub seed: u64,
    #[serde(rename = "feature")]
    pub features: Vec<FeatureGen>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSpec>,
    #[serde(rename = "outcome", default)]
    pub outcomes: Vec<OutcomeGen>,
}

impl GenerativeSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: GenerativeSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec {
            detail: format!("spec file: {e}"),
        })?;
        spec.compile()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("spec serializes")
    }

    pub fn outcome(&self, name: &str) -> Option<&OutcomeGen> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    /// Schema the generated datasets carry.
    pub fn schema(&self) -> Result<SurveySchema> {
        let mut features = Vec::with_capacity(self.features.len());
        for f in &self.features {
            features.push(FeatureSpec {
                name: f.name.clone(),
                role: f.resolved_role()?,
                kind: f.kind,
                coding_note: "synthetic".to_string(),
                bounds: None,
            });
        }
        let outcomes = self
            .outcomes
            .iter()
            .map(|o| FeatureSpec {
                name: o.name.clone(),
                role: Role::Outcome,
                kind: if o.model.is_binary() {
                    Kind::Binary
                } else {
                    Kind::ContinuousUnit
                },
                coding_note: "synthetic".to_string(),
                bounds: None,
            })
            .collect();
        SurveySchema::new(features, outcomes)
    }

    /// Full validation; errors before any sampling happens.
    pub(crate) fn compile(&self) -> Result<CompiledSpec> {
        if self.features.is_empty() {
            return Err(Error::InvalidSpec {
                detail: "spec declares no features".to_string(),
            });
        }
        let mut names = BTreeMap::new();
        let mut samplers = Vec::with_capacity(self.features.len());
        for f in &self.features {
            if names.insert(f.name.clone(), ()).is_some() {
                return Err(Error::InvalidSpec {
                    detail: format!("duplicate feature {:?}", f.name),
                });
            }
            f.resolved_role()?;
            if f.kind == Kind::Binary && !f.marginal.is_discrete() {
                return Err(Error::InvalidSpec {
                    detail: format!("binary feature {:?} needs a discrete marginal", f.name),
                });
            }
            samplers.push(f.marginal.compile(&f.name)?);
        }
        let mut outcomes = Vec::with_capacity(self.outcomes.len());
        for o in &self.outcomes {
            if names.insert(o.name.clone(), ()).is_some() {
                return Err(Error::InvalidSpec {
                    detail: format!("outcome {:?} duplicates another column", o.name),
                });
            }
            let slopes = o.model.slopes();
            let mut aligned = Vec::with_capacity(self.features.len());
            for f in &self.features {
                let beta = slopes.get(&f.name).ok_or_else(|| Error::InvalidSpec {
                    detail: format!("outcome {:?} lacks a slope for feature {:?}", o.name, f.name),
                })?;
                aligned.push(*beta);
            }
            for key in slopes.keys() {
                if !self.features.iter().any(|f| &f.name == key) {
                    return Err(Error::InvalidSpec {
                        detail: format!("outcome {:?} names unknown feature {key:?}", o.name),
                    });
                }
            }
            let kind = match &o.model {
                OutcomeModel::Binary { link, .. } => {
                    if let Link::Logistic { temperature } = link {
                        if !(*temperature > 0.0) {
                            return Err(Error::InvalidSpec {
                                detail: format!(
                                    "outcome {:?}: temperature must be positive",
                                    o.name
                                ),
                            });
                        }
                    }
                    CompiledOutcomeKind::Binary(*link)
                }
                OutcomeModel::Continuous { noise_std, .. } => {
                    if !(*noise_std >= 0.0) || !noise_std.is_finite() {
                        return Err(Error::InvalidSpec {
                            detail: format!("outcome {:?}: noise_std must be >= 0", o.name),
                        });
                    }
                    CompiledOutcomeKind::Continuous {
                        half_width: *noise_std * 3.0_f64.sqrt(),
                    }
                }
            };
            outcomes.push(CompiledOutcome {
                intercept: o.model.intercept(),
                slopes: aligned,
                kind,
            });
        }
        let chol = match &self.correlation {
            None => None,
            Some(c) if c.pairs.is_empty() => None,
            Some(c) => Some(self.build_cholesky(c)?),
        };
        Ok(CompiledSpec {
            samplers,
            chol,
            outcomes,
            n_features: self.features.len(),
        })
    }

    fn build_cholesky(&self, c: &CorrelationSpec) -> Result<Vec<f64>> {
        let p = self.features.len();
        let pos = |name: &str| -> Result<usize> {
            self.features
                .iter()
                .position(|f| f.name == name)
                .ok_or_else(|| Error::InvalidSpec {
                    detail: format!("correlation names unknown feature {name:?}"),
                })
        };
        let mut sigma = vec![0.0; p * p];
        for i in 0..p {
            sigma[i * p + i] = 1.0;
        }
        for (a, b, rho) in &c.pairs {
            if !(-1.0..=1.0).contains(rho) {
                return Err(Error::InvalidSpec {
                    detail: format!("correlation ({a}, {b}) = {rho} outside [-1, 1]"),
                });
            }
            let (i, j) = (pos(a)?, pos(b)?);
            if i == j {
                return Err(Error::InvalidSpec {
                    detail: format!("correlation pairs feature {a:?} with itself"),
                });
            }
            sigma[i * p + j] = *rho;
            sigma[j * p + i] = *rho;
        }
        // Cholesky; failure means the pair matrix is not positive definite.
        let mut l = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let mut s = sigma[i * p + j];
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::InvalidSpec {
                            detail: "correlation matrix is not positive definite".to_string(),
                        });
                    }
                    l[i * p + j] = s.sqrt();
                } else {
                    l[i * p + j] = s / l[j * p + j];
                }
            }
        }
        Ok(l)
    }
}

pub(crate) enum CompiledOutcomeKind {
    Binary(Link),
    Continuous { half_width: f64 },
}

pub(crate) struct CompiledOutcome {
    pub intercept: f64,
    pub slopes: Vec<f64>,
    pub kind: CompiledOutcomeKind,
}

impl CompiledOutcome {
    pub fn index(&self, x: &[f64]) -> f64 {
        let mut z = self.intercept;
        for (b, v) in self.slopes.iter().zip(x) {
            z += b * v;
        }
        z
    }
}

pub(crate) struct CompiledSpec {
    pub samplers: Vec<Sampler>,
    pub chol: Option<Vec<f64>>,
    pub outcomes: Vec<CompiledOutcome>,
    pub n_features: usize,
}

impl CompiledSpec {
    /// Draws one feature row into `out` (length = feature count).
    pub fn sample_features(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match &self.chol {
            None => {
                for (s, o) in self.samplers.iter().zip(out.iter_mut()) {
                    let u: f64 = rng.random();
                    *o = s.quantile(u);
                }
            }
            Some(l) => {
                let p = self.n_features;
                let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
                let phi = Normal::new(0.0, 1.0).expect("standard normal");
                for (i, (s, o)) in self.samplers.iter().zip(out.iter_mut()).enumerate() {
                    let mut w = 0.0;
                    for (k, zk) in z.iter().enumerate().take(i + 1) {
                        w += l[i * p + k] * zk;
                    }
                    *o = s.quantile(phi.cdf(w));
                }
            }
        }
    }

    /// Draws the outcome columns for one feature row.
    pub fn sample_outcomes(&self, rng: &mut ChaCha8Rng, x: &[f64], out: &mut [f64]) {
        for (c, o) in self.outcomes.iter().zip(out.iter_mut()) {
            let z = c.index(x);
            *o = match &c.kind {
                CompiledOutcomeKind::Binary(link) => {
                    let p = link.prob(z);
                    f64::from(rng.random::<f64>() < p)
                }
                CompiledOutcomeKind::Continuous { half_width } => {
                    let e = (rng.random::<f64>() * 2.0 - 1.0) * half_width;
                    (z + e).clamp(0.0, 1.0)
                }
            };
        }
    }
}

/// Generates `n` complete rows from the spec, deterministically per
/// `spec.seed`.
pub fn generate(spec: &GenerativeSpec, n: usize) -> Result<SurveyDataset> {
    generate_with_mode(spec, n, ExecMode::auto())
}

/// Generation with an explicit execution mode; output is identical across
/// modes because every chunk draws from its own derived RNG stream.
pub fn generate_with_mode(spec: &GenerativeSpec, n: usize, mode: ExecMode) -> Result<SurveyDataset> {
    if n == 0 {
        return Err(Error::InvalidSpec {
            detail: "cannot generate 0 rows".to_string(),
        });
    }
    let compiled = spec.compile()?;
    let schema = spec.schema()?;
    let n_features = compiled.n_features;
    let n_cols = n_features + compiled.outcomes.len();

    let blocks = exec::map_chunks(mode, n, exec::ROW_CHUNK, |chunk| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, chunk.index as u64));
        let mut block = vec![0.0; chunk.len * n_cols];
        for r in 0..chunk.len {
            let row = &mut block[r * n_cols..(r + 1) * n_cols];
            let (features, outcomes) = row.split_at_mut(n_features);
            compiled.sample_features(&mut rng, features);
            compiled.sample_outcomes(&mut rng, features, outcomes);
        }
        block
    });

    let mut columns: Vec<Vec<f64>> = (0..n_cols).map(|_| Vec::with_capacity(n)).collect();
    for block in blocks {
        for row in block.chunks_exact(n_cols) {
            for (c, v) in row.iter().enumerate() {
                columns[c].push(*v);
            }
        }
    }
    SurveyDataset::from_columns(schema, columns, "synthetic", "synthetic")
}
