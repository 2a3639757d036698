//! Moment calibration: build feature marginals whose analytic means and
//! standard deviations match a published statistics table.

use crate::data::describe::DescriptiveStats;
use crate::data::schema::{Kind, SurveySchema};
use crate::error::{Error, Result};
use crate::synth::{FeatureGen, GenerativeSpec, Marginal};

/// Std targets below this are treated as a point mass.
const POINT_MASS_STD: f64 = 1e-9;

/// Builds a generative spec whose feature marginals reproduce the target
/// moments: exactly for binary columns (a Bernoulli is pinned by its mean),
/// and by Beta moment-matching for unit-interval columns (analytic mean and
/// std equal the targets; the distribution shape beyond two moments is the
/// Beta family's). Outcome models are not derivable from marginal moments
/// and are left empty for the caller to attach.
pub fn calibrate_to_moments(
    schema: &SurveySchema,
    targets: &DescriptiveStats,
) -> Result<GenerativeSpec> {
    let mut features = Vec::with_capacity(schema.features.len());
    for spec in &schema.features {
        let stats = targets
            .column(&spec.name)
            .ok_or_else(|| Error::Config {
                detail: format!("moment targets lack column {:?}", spec.name),
            })?;
        let marginal = marginal_from_moments(&spec.name, spec.kind, stats.mean, stats.std)?;
        features.push(
            FeatureGen::new(&spec.name, spec.kind, marginal).with_role(spec.role),
        );
    }
    Ok(GenerativeSpec {
        seed: 0,
        features,
        correlation: None,
        outcomes: Vec::new(),
    })
}

pub fn marginal_from_moments(name: &str, kind: Kind, mean: f64, std: f64) -> Result<Marginal> {
    if !(0.0..=1.0).contains(&mean) || std < 0.0 || !mean.is_finite() || !std.is_finite() {
        return Err(Error::InfeasibleMoments {
            column: name.to_string(),
            mean,
            std,
        });
    }
    if kind == Kind::Binary {
        // the Bernoulli std is implied by the mean; the reported std is not
        // a free parameter
        return Ok(Marginal::Bernoulli { p: mean });
    }
    if std <= POINT_MASS_STD {
        return Ok(Marginal::Point { value: mean });
    }
    let var = std * std;
    let bound = mean * (1.0 - mean);
    if var >= bound {
        // on [0, 1] the variance cannot reach mean*(1-mean)
        return Err(Error::InfeasibleMoments {
            column: name.to_string(),
            mean,
            std,
        });
    }
    let nu = bound / var - 1.0;
    Ok(Marginal::UnitBeta {
        alpha: mean * nu,
        beta: (1.0 - mean) * nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::builtin::canonical_schema;
    use crate::synth::builtin::ces_2020_stats;

    #[test]
    fn binary_target_becomes_bernoulli_of_the_mean() {
        let m = marginal_from_moments("vote_trump", Kind::Binary, 0.4272, 0.4947).unwrap();
        assert_eq!(m, Marginal::Bernoulli { p: 0.4272 });
    }

    #[test]
    fn zero_mean_is_a_point_mass() {
        let m = marginal_from_moments("x", Kind::ContinuousUnit, 0.0, 0.0).unwrap();
        assert_eq!(m, Marginal::Point { value: 0.0 });
    }

    #[test]
    fn variance_beyond_the_unit_interval_bound_is_infeasible() {
        match marginal_from_moments("x", Kind::ContinuousUnit, 0.5, 0.6) {
            Err(Error::InfeasibleMoments { column, .. }) => assert_eq!(column, "x"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn calibrated_marginals_have_exact_analytic_moments() {
        let spec = calibrate_to_moments(&canonical_schema(), &ces_2020_stats()).unwrap();
        let stats = ces_2020_stats();
        for f in &spec.features {
            let target = stats.column(&f.name).unwrap();
            assert!(
                (f.marginal.mean() - target.mean).abs() < 1e-12,
                "{}: mean {} vs {}",
                f.name,
                f.marginal.mean(),
                target.mean
            );
            if !matches!(f.marginal, Marginal::Bernoulli { .. }) {
                assert!(
                    (f.marginal.std() - target.std).abs() < 1e-12,
                    "{}: std {} vs {}",
                    f.name,
                    f.marginal.std(),
                    target.std
                );
            }
        }
    }

    #[test]
    fn missing_target_column_is_reported() {
        let schema = canonical_schema();
        let mut stats = ces_2020_stats();
        stats.columns.retain(|c| c.name != "ideo");
        assert!(calibrate_to_moments(&schema, &stats).is_err());
    }
}
