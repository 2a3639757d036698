//! Marginal distributions for synthetic feature columns.
//!
//! Every marginal exposes a quantile function, so both the independent
//! sampler (u ~ U(0,1)) and the Gaussian-copula sampler (u = Phi(w)) draw
//! through the same transform.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Marginal {
    /// 0/1 draw with success probability `p`.
    Bernoulli { p: f64 },
    /// Continuous Beta(alpha, beta) on [0, 1].
    UnitBeta { alpha: f64, beta: f64 },
    /// Beta draw rounded to the nearest of `levels` equally spaced points
    /// on [0, 1]; matches ordinal scales reported on a k-point grid.
    UnitBetaGrid { alpha: f64, beta: f64, levels: usize },
    /// Degenerate point mass.
    Point { value: f64 },
}

/// Precompiled sampler for one marginal.
pub(crate) enum Sampler {
    Bernoulli { p: f64 },
    Beta { dist: Beta },
    BetaGrid { dist: Beta, m: f64 },
    Point { value: f64 },
}

impl Marginal {
    pub fn validate(&self, column: &str) -> Result<()> {
        let bad = |detail: String| Error::InvalidSpec { detail };
        match *self {
            Marginal::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(bad(format!("column {column:?}: bernoulli p {p} not in [0, 1]")));
                }
            }
            Marginal::UnitBeta { alpha, beta } | Marginal::UnitBetaGrid { alpha, beta, .. } => {
                if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
                    return Err(bad(format!(
                        "column {column:?}: beta shapes ({alpha}, {beta}) must be positive"
                    )));
                }
                if let Marginal::UnitBetaGrid { levels, .. } = self {
                    if *levels < 2 {
                        return Err(bad(format!(
                            "column {column:?}: grid needs at least 2 levels"
                        )));
                    }
                }
            }
            Marginal::Point { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(bad(format!(
                        "column {column:?}: point mass {value} not in [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Analytic mean.
    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Bernoulli { p } => p,
            Marginal::UnitBeta { alpha, beta } => alpha / (alpha + beta),
            Marginal::UnitBetaGrid { .. } => self
                .support()
                .expect("grid is discrete")
                .iter()
                .map(|(v, p)| v * p)
                .sum(),
            Marginal::Point { value } => value,
        }
    }

    /// Analytic standard deviation.
    pub fn std(&self) -> f64 {
        match *self {
            Marginal::Bernoulli { p } => (p * (1.0 - p)).sqrt(),
            Marginal::UnitBeta { alpha, beta } => {
                let s = alpha + beta;
                (alpha * beta / (s * s * (s + 1.0))).sqrt()
            }
            Marginal::UnitBetaGrid { .. } => {
                let support = self.support().expect("grid is discrete");
                let mean: f64 = support.iter().map(|(v, p)| v * p).sum();
                support
                    .iter()
                    .map(|(v, p)| (v - mean) * (v - mean) * p)
                    .sum::<f64>()
                    .sqrt()
            }
            Marginal::Point { .. } => 0.0,
        }
    }

    /// Discrete support with probabilities, when enumerable.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            Marginal::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, p)]),
            Marginal::Point { value } => Some(vec![(value, 1.0)]),
            Marginal::UnitBetaGrid { alpha, beta, levels } => {
                let dist = Beta::new(alpha, beta).ok()?;
                let m = (levels - 1) as f64;
                let mut out = Vec::with_capacity(levels);
                let mut prev = 0.0;
                for k in 0..levels {
                    let upper = if k == levels - 1 {
                        1.0
                    } else {
                        dist.cdf((k as f64 + 0.5) / m)
                    };
                    out.push((k as f64 / m, upper - prev));
                    prev = upper;
                }
                Some(out)
            }
            Marginal::UnitBeta { .. } => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Marginal::UnitBeta { .. })
    }

    pub(crate) fn compile(&self, column: &str) -> Result<Sampler> {
        self.validate(column)?;
        Ok(match *self {
            Marginal::Bernoulli { p } => Sampler::Bernoulli { p },
            Marginal::UnitBeta { alpha, beta } => Sampler::Beta {
                dist: Beta::new(alpha, beta).map_err(|e| Error::InvalidSpec {
                    detail: format!("column {column:?}: {e}"),
                })?,
            },
            Marginal::UnitBetaGrid { alpha, beta, levels } => Sampler::BetaGrid {
                dist: Beta::new(alpha, beta).map_err(|e| Error::InvalidSpec {
                    detail: format!("column {column:?}: {e}"),
                })?,
                m: (levels - 1) as f64,
            },
            Marginal::Point { value } => Sampler::Point { value },
        })
    }
}

impl Sampler {
    /// Quantile transform of u in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Sampler::Bernoulli { p } => {
                if u > 1.0 - p {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Beta { dist } => dist.inverse_cdf(u),
            Sampler::BetaGrid { dist, m } => (dist.inverse_cdf(u) * m).round() / m,
            Sampler::Point { value } => *value,
        }
    }
}
