//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::{ActionDescriptor, IsometricAction};
use crate::error::{Error, Result};
use crate::group::{GeneratingSet, Group, Limits};
use crate::measure::{parse_weight, DriftMode, Measure, MeasureDescriptor, Weight};
use crate::space::{Point, Space, SpaceDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Exact,
    MonteCarlo,
}

/// Numeric parameters. Every field is optional; each command documents the
/// defaults it applies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ModeName,
    pub samples: Option<usize>,
    pub max_support: Option<usize>,
    pub limits: Option<Limits>,
    /// Convex-combination coefficients `a_1, a_2, ...` as numbers or `"p/q"`.
    pub coefficients: Option<Vec<Value>>,
    #[serde(default)]
    pub renormalize: bool,
    pub max_iter: Option<usize>,
    pub theta: Option<f64>,
    #[serde(default)]
    pub record_trace: bool,
    pub starts: Option<usize>,
    pub ball_samples: Option<usize>,
    pub budget: Option<usize>,
    pub max_stages: Option<usize>,
    pub radius: Option<usize>,
    pub order_cap: Option<u64>,
    pub random_elements: Option<usize>,
    pub random_word_length: Option<usize>,
    pub triples: Option<usize>,
    pub scale: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for the JSON record and CSV series.
    pub dir: Option<PathBuf>,
    /// Write CSV series next to the record. Defaults to true.
    pub csv: Option<bool>,
    /// Ball cache directory; overrides `CAT0LAB_CACHE_DIR`.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub operation: Option<String>,
    pub group: Option<Group>,
    /// Generating set; its symmetric closure is used. Defaults to the standard one.
    pub generators: Option<Vec<Value>>,
    /// Defaults to uniform on the generating set.
    pub measure: Option<MeasureDescriptor>,
    pub space: Option<SpaceDescriptor>,
    pub action: Option<ActionDescriptor>,
    /// Start point in the space's JSON form.
    pub start: Option<Value>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn group(&self) -> Result<&Group> {
        let g = self
            .group
            .as_ref()
            .ok_or_else(|| Error::Schema("config needs a \"group\"".into()))?;
        g.validate().map_err(schema)?;
        Ok(g)
    }

    pub fn generating_set(&self) -> Result<GeneratingSet> {
        let group = self.group()?;
        match &self.generators {
            None => Ok(group.generators()),
            Some(vs) => {
                let els = vs
                    .iter()
                    .map(|v| group.element_from_json(v))
                    .collect::<Result<Vec<_>>>()?;
                GeneratingSet::symmetric_closure(group, els).map_err(schema)
            }
        }
    }

    pub fn measure(&self) -> Result<Measure> {
        let group = self.group()?;
        match &self.measure {
            Some(d) => Measure::from_descriptor(group, d),
            None => Measure::uniform(group, self.generating_set()?.elements(), true).map_err(schema),
        }
    }

    pub fn space(&self) -> Result<Space> {
        let d = self
            .space
            .as_ref()
            .ok_or_else(|| Error::Schema("config needs a \"space\"".into()))?;
        Space::from_descriptor(d).map_err(schema)
    }

    pub fn action(&self) -> Result<IsometricAction> {
        let d = self
            .action
            .as_ref()
            .ok_or_else(|| Error::Schema("config needs an \"action\"".into()))?;
        IsometricAction::from_descriptor(self.group()?.clone(), self.space()?, d)
    }

    /// The configured start, or a canonical point of the space.
    pub fn start(&self, space: &Space) -> Result<Point> {
        match &self.start {
            Some(v) => space.point_from_json(v),
            None => default_point(space),
        }
    }

    pub fn drift_mode(&self) -> Result<DriftMode> {
        Ok(match self.params.mode {
            ModeName::Exact => DriftMode::Exact,
            ModeName::MonteCarlo => DriftMode::MonteCarlo {
                samples: self.params.samples.unwrap_or(10_000),
                seed: self.params.seed,
            },
        })
    }

    pub fn coefficients(&self) -> Result<Vec<Weight>> {
        match &self.params.coefficients {
            None => Err(Error::Schema("params.coefficients is required".into())),
            Some(vs) => vs.iter().map(parse_weight).collect(),
        }
    }

    /// Rejects an `operation` that names a different command.
    pub fn check_operation(&self, command: &str) -> Result<()> {
        match &self.operation {
            Some(op) if op.replace('_', "-") != command => Err(Error::Schema(format!(
                "config is for {op:?}, not {command:?}"
            ))),
            _ => Ok(()),
        }
    }
}

fn schema(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Schema(m),
        other => other,
    }
}

/// Origin of Euclidean factors, `i` in the hyperbolic plane, vertex 0 of trees.
pub fn default_point(space: &Space) -> Result<Point> {
    Ok(match space {
        Space::Euclidean { dim } => Point::Euclidean(vec![0.0; *dim]),
        Space::HyperbolicPlane => Point::hyperbolic(0.0, 1.0),
        Space::Tree(t) => Point::Tree(t.vertex(0)?),
        Space::Product(fs) => Point::Product(fs.iter().map(default_point).collect::<Result<_>>()?),
        Space::Rescaled { base, .. } => default_point(base)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"group": {"kind": "free", "rank": 2}, "colour": 1}"#);
        assert!(matches!(err, Err(Error::Schema(_))));
        let err = ExperimentConfig::from_json(r#"{"params": {"n_maxx": 3}}"#);
        assert!(matches!(err, Err(Error::Schema(_))));
    }

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"group": {"kind": "lattice", "rank": 1}}"#).unwrap();
        assert_eq!(c.measure().unwrap().support_size(), 2);
        assert_eq!(c.drift_mode().unwrap(), DriftMode::Exact);
        assert!(c.check_operation("drift").is_ok());
    }

    #[test]
    fn empty_support_is_a_schema_error() {
        let c = ExperimentConfig::from_json(
            r#"{"group": {"kind": "lattice", "rank": 1}, "measure": {"support": []}}"#,
        )
        .unwrap();
        assert!(matches!(c.measure(), Err(Error::Schema(_))));
    }
}
