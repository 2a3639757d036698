//! The canonical harmonized schema shared by the source and target surveys.

use crate::data::schema::{FeatureSpec, Kind, Role, SurveySchema};

/// Canonical 8-feature layout plus the two shared outcomes. Feature order is
/// the model input order everywhere in this crate.
pub fn canonical_schema() -> SurveySchema {
    let features = vec![
        FeatureSpec::new(
            "pid",
            Role::Pid,
            Kind::OrdinalUnit,
            "party identification, 0 = strong Democrat, 1 = strong Republican",
        ),
        FeatureSpec::new("sex", Role::Sex, Kind::Binary, "male = 1"),
        FeatureSpec::new("south", Role::South, Kind::Binary, "south = 1"),
        FeatureSpec::new("edu_binary", Role::EduBinary, Kind::Binary, "college degree = 1"),
        FeatureSpec::new("age", Role::Age, Kind::ContinuousUnit, "age, min-max scaled"),
        FeatureSpec::new("white", Role::White, Kind::Binary, "white = 1"),
        FeatureSpec::new("inc", Role::Inc, Kind::ContinuousUnit, "household income, scaled"),
        FeatureSpec::new(
            "ideo",
            Role::Ideo,
            Kind::OrdinalUnit,
            "ideology, 0 = very liberal, 1 = very conservative",
        ),
    ];
    let outcomes = vec![
        FeatureSpec::new("vote_trump", Role::Outcome, Kind::Binary, "voted for Trump = 1"),
        FeatureSpec::new(
            "racial_resentment",
            Role::Outcome,
            Kind::OrdinalUnit,
            "racial resentment scale on [0, 1]",
        ),
    ];
    SurveySchema::new(features, outcomes).expect("canonical schema is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_matches_model_input_convention() {
        let schema = canonical_schema();
        assert_eq!(
            schema.feature_names(),
            vec!["pid", "sex", "south", "edu_binary", "age", "white", "inc", "ideo"]
        );
    }
}
