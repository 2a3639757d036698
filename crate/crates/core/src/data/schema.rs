//! Survey schema: column declarations, task declarations, schema alignment,
//! and the structured-text schema file format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::frame::RecodeRule;
use crate::error::{Error, Result};

/// Substantive role a column plays in the harmonized layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Pid,
    Sex,
    South,
    EduBinary,
    Age,
    White,
    Inc,
    Ideo,
    Outcome,
}

/// Value constraint for a column.
///
/// `Binary` columns hold values in {0, 1}; both unit kinds hold values in
/// [0, 1] once normalized. A unit-kind column may declare raw `bounds`
/// (lo, hi) in its [`FeatureSpec`], in which case values are validated
/// against that raw range until [`normalize_minmax`] maps them to [0, 1].
///
/// [`normalize_minmax`]: crate::data::SurveyDataset::normalize_minmax
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Binary,
    OrdinalUnit,
    ContinuousUnit,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Binary => "binary",
            Kind::OrdinalUnit => "ordinal_unit",
            Kind::ContinuousUnit => "continuous_unit",
        };
        f.write_str(s)
    }
}

/// One column declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub role: Role,
    pub kind: Kind,
    /// Free text documenting the 0/1 convention, e.g. "male = 1".
    #[serde(default)]
    pub coding_note: String,
    /// Raw value range for a not-yet-normalized unit-kind column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

impl FeatureSpec {
    pub fn new(name: &str, role: Role, kind: Kind, coding_note: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            role,
            kind,
            coding_note: coding_note.to_string(),
            bounds: None,
        }
    }

    /// Human-readable description of the admissible range.
    pub fn expected(&self) -> String {
        match (self.kind, self.bounds) {
            (Kind::Binary, _) => format!("{} (values in {{0, 1}})", self.kind),
            (_, Some((lo, hi))) => format!("{} with declared bounds [{lo}, {hi}]", self.kind),
            (_, None) => format!("{} (values in [0, 1])", self.kind),
        }
    }

    /// Checks one observed (non-missing) value against the declared constraint.
    pub fn check_value(&self, v: f64, row: Option<usize>) -> Result<()> {
        let ok = match (self.kind, self.bounds) {
            (Kind::Binary, _) => v == 0.0 || v == 1.0,
            (_, Some((lo, hi))) => v >= lo && v <= hi,
            (_, None) => (0.0..=1.0).contains(&v),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RangeViolation {
                row,
                column: self.name.clone(),
                value: v,
                expected: self.expected(),
            })
        }
    }
}

/// Ordered feature and outcome declarations. Feature order is the canonical
/// model input order and is preserved through persistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySchema {
    pub features: Vec<FeatureSpec>,
    pub outcomes: Vec<FeatureSpec>,
}

impl SurveySchema {
    pub fn new(features: Vec<FeatureSpec>, outcomes: Vec<FeatureSpec>) -> Result<Self> {
        let schema = SurveySchema { features, outcomes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Config {
                detail: "schema declares no features".to_string(),
            });
        }
        let mut seen = BTreeMap::new();
        for spec in self.columns() {
            if seen.insert(spec.name.clone(), ()).is_some() {
                return Err(Error::Config {
                    detail: format!("column name {:?} declared more than once", spec.name),
                });
            }
            if let Some((lo, hi)) = spec.bounds {
                if !(hi > lo) {
                    return Err(Error::DegenerateBounds {
                        column: spec.name.clone(),
                        lo,
                        hi,
                    });
                }
                if spec.kind == Kind::Binary {
                    return Err(Error::Config {
                        detail: format!("binary column {:?} cannot declare bounds", spec.name),
                    });
                }
            }
        }
        for o in &self.outcomes {
            if o.role != Role::Outcome {
                return Err(Error::Config {
                    detail: format!("outcome column {:?} must have role \"outcome\"", o.name),
                });
            }
        }
        Ok(())
    }

    /// Features followed by outcomes.
    pub fn columns(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.features.iter().chain(self.outcomes.iter())
    }

    pub fn column(&self, name: &str) -> Option<&FeatureSpec> {
        self.columns().find(|c| c.name == name)
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn n_columns(&self) -> usize {
        self.features.len() + self.outcomes.len()
    }
}

/// Ordered intersection of two schemas: columns whose name, role, and kind
/// all match, in `a`'s order. A shared name with a conflicting role or kind
/// is an error naming the column.
pub fn align_schemas(a: &SurveySchema, b: &SurveySchema) -> Result<SurveySchema> {
    let pick = |list_a: &[FeatureSpec]| -> Result<Vec<FeatureSpec>> {
        let mut out = Vec::new();
        for fa in list_a {
            if let Some(fb) = b.column(&fa.name) {
                if fa.kind != fb.kind {
                    return Err(Error::SchemaConflict {
                        column: fa.name.clone(),
                        detail: format!("kind {} vs {}", fa.kind, fb.kind),
                    });
                }
                if fa.role != fb.role {
                    return Err(Error::SchemaConflict {
                        column: fa.name.clone(),
                        detail: format!("role {:?} vs {:?}", fa.role, fb.role),
                    });
                }
                out.push(fa.clone());
            }
        }
        Ok(out)
    };
    let features = pick(&a.features)?;
    let outcomes = pick(&a.outcomes)?;
    if features.is_empty() && outcomes.is_empty() {
        return Ok(SurveySchema {
            features,
            outcomes,
        });
    }
    Ok(SurveySchema { features, outcomes })
}

/// Names an outcome column and how its task is modeled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub outcome: String,
    pub kind: TaskKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Binary,
    ContinuousUnit,
}

impl TaskSpec {
    pub fn binary(outcome: &str) -> Self {
        TaskSpec {
            outcome: outcome.to_string(),
            kind: TaskKind::Binary,
        }
    }

    pub fn continuous(outcome: &str) -> Self {
        TaskSpec {
            outcome: outcome.to_string(),
            kind: TaskKind::ContinuousUnit,
        }
    }
}

/// Parsed schema file: the schema plus optional recode rules applied at
/// ingest time.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaFile {
    pub schema: SurveySchema,
    pub recodes: Vec<RecodeRule>,
}

#[derive(Deserialize)]
struct SchemaDoc {
    #[serde(default)]
    feature: Vec<FeatureDoc>,
    #[serde(default)]
    outcome: Vec<OutcomeDoc>,
    #[serde(default)]
    recode: Vec<RecodeDoc>,
}

#[derive(Deserialize)]
struct FeatureDoc {
    name: String,
    role: Role,
    kind: Kind,
    #[serde(default)]
    coding_note: String,
    #[serde(default)]
    bounds: Option<[f64; 2]>,
}

#[derive(Deserialize)]
struct OutcomeDoc {
    name: String,
    kind: Kind,
    #[serde(default)]
    coding_note: String,
}

#[derive(Deserialize)]
struct RecodeDoc {
    column: String,
    map: BTreeMap<String, String>,
}

impl SchemaFile {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: SchemaDoc = toml::from_str(text).map_err(|e| Error::Config {
            detail: format!("schema file: {e}"),
        })?;
        let features = doc
            .feature
            .into_iter()
            .map(|f| FeatureSpec {
                name: f.name,
                role: f.role,
                kind: f.kind,
                coding_note: f.coding_note,
                bounds: f.bounds.map(|[lo, hi]| (lo, hi)),
            })
            .collect();
        let outcomes = doc
            .outcome
            .into_iter()
            .map(|o| FeatureSpec {
                name: o.name,
                role: Role::Outcome,
                kind: o.kind,
                coding_note: o.coding_note,
                bounds: None,
            })
            .collect();
        let schema = SurveySchema::new(features, outcomes)?;
        let recodes = doc
            .recode
            .into_iter()
            .map(|r| RecodeRule::new(&r.column, r.map))
            .collect::<Result<Vec<_>>>()?;
        Ok(SchemaFile { schema, recodes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
