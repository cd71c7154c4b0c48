//! JSON instance document.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    cost_present_value, return_present_value, validate_instance, DependencyEdge, DependencyMode,
    Instance, ModelError, Project,
};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("project {id}: {msg}")]
    Project { id: usize, msg: String },
    #[error("project {id}: {source}")]
    Discount {
        id: usize,
        #[source]
        source: ModelError,
    },
    #[error("invalid instance:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    pub n_p: usize,
    #[serde(rename = "N")]
    pub n_periods: usize,
    #[serde(default)]
    pub rate: f64,
    pub budgets: Vec<f64>,
    pub q_min: Vec<usize>,
    pub q_max: Vec<usize>,
    #[serde(default)]
    pub total_dependency_mode: DependencyMode,
    pub projects: Vec<ProjectDocument>,
    #[serde(default)]
    pub edges: Vec<DependencyEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectDocument {
    pub id: usize,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_pv: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_pv: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_stream: Option<Vec<f64>>,
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance document serializes")
    }

    /// Builds the instance, deriving missing present-value tables from raw
    /// inputs. Does not validate.
    pub fn to_instance(&self) -> Result<Instance, DocumentError> {
        let periods = self.n_periods;
        let projects = self
            .projects
            .iter()
            .map(|p| {
                let discount = |source| DocumentError::Discount { id: p.id, source };
                let cost_pv = match (&p.cost_pv, p.raw_cost) {
                    (Some(v), _) => v.clone(),
                    (None, Some(raw)) => (1..=periods)
                        .map(|k| cost_present_value(raw, self.rate, k))
                        .collect::<Result<_, _>>()
                        .map_err(discount)?,
                    (None, None) => {
                        return Err(DocumentError::Project {
                            id: p.id,
                            msg: "needs cost_pv or raw_cost".into(),
                        })
                    }
                };
                let return_pv = match (&p.return_pv, &p.return_stream) {
                    (Some(v), _) => v.clone(),
                    (None, Some(stream)) => (1..=periods)
                        .map(|k| return_present_value(stream, self.rate, k))
                        .collect::<Result<_, _>>()
                        .map_err(discount)?,
                    (None, None) => {
                        return Err(DocumentError::Project {
                            id: p.id,
                            msg: "needs return_pv or return_stream".into(),
                        })
                    }
                };
                Ok(Project {
                    id: p.id,
                    label: p.label.clone(),
                    cost_pv,
                    return_pv,
                    raw_cost: p.raw_cost,
                    return_stream: p.return_stream.clone(),
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;

        Ok(Instance::with_declared_sizes(
            self.n_p,
            periods,
            projects,
            self.edges.clone(),
            self.budgets.clone(),
            self.q_min.clone(),
            self.q_max.clone(),
        )
        .with_rate(self.rate)
        .with_mode(self.total_dependency_mode)
        .with_comment(self.comment.clone()))
    }

    /// [`InstanceDocument::to_instance`] followed by validation; violations
    /// come back verbatim.
    pub fn to_valid_instance(&self) -> Result<Instance, DocumentError> {
        let inst = self.to_instance()?;
        let violations = validate_instance(&inst);
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(DocumentError::Invalid(violations))
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        Self {
            comment: inst.comment().map(str::to_owned),
            n_p: inst.n_projects(),
            n_periods: inst.n_periods(),
            rate: inst.rate(),
            budgets: inst.budgets().to_vec(),
            q_min: inst.q_min().to_vec(),
            q_max: inst.q_max().to_vec(),
            total_dependency_mode: inst.mode(),
            projects: inst
                .projects()
                .iter()
                .map(|p| ProjectDocument {
                    id: p.id,
                    label: p.label.clone(),
                    cost_pv: Some(p.cost_pv.clone()),
                    raw_cost: p.raw_cost,
                    return_pv: Some(p.return_pv.clone()),
                    return_stream: p.return_stream.clone(),
                })
                .collect(),
            edges: inst.edges().to_vec(),
        }
    }
}

/// Parses and validates an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<Instance, DocumentError> {
    InstanceDocument::from_json(text)?.to_valid_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    InstanceDocument::from_instance(inst).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAW: &str = r#"{
        "n_p": 1, "N": 2, "rate": 0.1,
        "budgets": [200, 200], "q_min": [0, 0], "q_max": [1, 1],
        "projects": [{"id": 1, "label": "crm", "raw_cost": 110, "return_stream": [110]}]
    }"#;

    #[test]
    fn raw_inputs_are_discounted() {
        let inst = parse_instance(RAW).unwrap();
        let p = &inst.projects()[0];
        assert_eq!(p.cost_pv[0], 110.0);
        assert!((p.cost_pv[1] - 100.0).abs() < 1e-9);
        assert!((p.return_pv[0] - 100.0).abs() < 1e-9);
        assert!((p.return_pv[1] - 1000.0 / 11.0).abs() < 1e-9);
        assert_eq!(inst.mode(), DependencyMode::Hard);
    }

    #[test]
    fn raw_round_trip() {
        let inst = parse_instance(RAW).unwrap();
        let again = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn missing_cost_is_an_error() {
        let text = RAW.replace(r#""raw_cost": 110, "#, "");
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("cost_pv or raw_cost"), "{err}");
    }

    #[test]
    fn violations_surface_verbatim() {
        let text = RAW.replace(r#""q_max": [1, 1]"#, r#""q_max": [0, 0]"#);
        let err = parse_instance(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sum of q_max (0) < n_p (1)"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = RAW.replace(r#""rate": 0.1"#, r#""rate": 0.1, "bogus": 1"#);
        assert!(matches!(parse_instance(&text), Err(DocumentError::Json(_))));
    }
}
