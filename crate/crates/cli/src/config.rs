//! JSON model files.
//!
//! ```json
//! {
//!   "name": "cchp",
//!   "structure": "series",
//!   "components": [{ "label": "G", "lambda": 0.004, "mu": 0.03, "law": "lindley" }],
//!   "analysis": { "tStart": 0, "tStop": 500, "points": 501, "logSpacing": false }
//! }
//! ```

use serde_json::{Map, Value};
use thiserror::Error;

use phavail_core::availability::ComponentParams;
use phavail_core::system::{Component, SystemError, SystemModel};
use phavail_core::{Law, Structure};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("`{path}` must be {expected}")]
    WrongType { path: String, expected: &'static str },
    #[error("components[{component}].{field}: invalid rate {value}")]
    InvalidRate {
        component: usize,
        field: &'static str,
        value: String,
    },
    #[error("components[{component}].law: unknown law {value} (expected \"lindley\" or \"exponential\")")]
    UnknownLaw { component: usize, value: String },
    #[error("structure: unknown value {0} (expected \"single\", \"series\" or \"parallel\")")]
    UnknownStructure(String),
    #[error("components[{component}].label: {reason}")]
    InvalidLabel { component: usize, reason: &'static str },
    #[error("analysis.{field}: {reason}")]
    InvalidAnalysis { field: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] SystemError),
}

/// Time-grid settings from the optional `analysis` block.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisConfig {
    pub t_start: Option<f64>,
    pub t_stop: Option<f64>,
    pub points: Option<usize>,
    pub log_spacing: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub model: SystemModel<f64>,
    pub analysis: AnalysisConfig,
}

pub fn parse_model_config(text: &str) -> Result<ModelConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = as_object(&root, "<root>")?;
    reject_unknown(root, &["name", "structure", "components", "analysis"], "")?;

    let name = as_str(required(root, "name", "")?, "name")?.to_owned();
    let structure = as_str(required(root, "structure", "")?, "structure")?;
    let structure: Structure = structure
        .parse()
        .map_err(|_| ConfigError::UnknownStructure(format!("{:?}", structure)))?;

    let list = required(root, "components", "")?
        .as_array()
        .ok_or_else(|| wrong_type("components", "an array"))?;
    let components = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_component(i, v))
        .collect::<Result<Vec<_>, _>>()?;

    let analysis = match root.get("analysis") {
        Some(v) => parse_analysis(v)?,
        None => AnalysisConfig::default(),
    };

    Ok(ModelConfig {
        model: SystemModel::new(name, structure, components)?,
        analysis,
    })
}

fn parse_component(index: usize, value: &Value) -> Result<Component<f64>, ConfigError> {
    let path = format!("components[{index}]");
    let obj = as_object(value, &path)?;
    reject_unknown(obj, &["label", "lambda", "mu", "law"], &path)?;

    let label = as_str(required(obj, "label", &path)?, &format!("{path}.label"))?;
    if label.is_empty() {
        return Err(ConfigError::InvalidLabel {
            component: index,
            reason: "must not be empty",
        });
    }
    if label.contains([',', '"', '\n', '\r']) {
        return Err(ConfigError::InvalidLabel {
            component: index,
            reason: "must not contain commas, quotes or line breaks",
        });
    }

    let rate = |field: &'static str| -> Result<f64, ConfigError> {
        let raw = required(obj, field, &path)?;
        let invalid = || ConfigError::InvalidRate {
            component: index,
            field,
            value: raw.to_string(),
        };
        let x = raw.as_f64().ok_or_else(invalid)?;
        let ok = x.is_finite() && if field == "mu" { x >= 0.0 } else { x > 0.0 };
        if ok {
            Ok(x)
        } else {
            Err(invalid())
        }
    };
    let lambda = rate("lambda")?;
    let mu = rate("mu")?;

    let law = match required(obj, "law", &path)? {
        Value::String(s) if s == "lindley" => Law::Lindley,
        Value::String(s) if s == "exponential" => Law::Exponential,
        other => {
            return Err(ConfigError::UnknownLaw {
                component: index,
                value: other.to_string(),
            })
        }
    };

    let params = ComponentParams::new(lambda, mu, law).map_err(SystemError::from)?;
    Ok(Component {
        label: label.to_owned(),
        params,
    })
}

fn parse_analysis(value: &Value) -> Result<AnalysisConfig, ConfigError> {
    let obj = as_object(value, "analysis")?;
    reject_unknown(obj, &["tStart", "tStop", "points", "logSpacing"], "analysis")?;
    let time = |field: &'static str| -> Result<Option<f64>, ConfigError> {
        match obj.get(field) {
            None => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x >= 0.0 && x.is_finite() => Ok(Some(x)),
                _ => Err(ConfigError::InvalidAnalysis {
                    field,
                    reason: format!("expected a non-negative number, got {v}"),
                }),
            },
        }
    };
    let points = match obj.get("points") {
        None => None,
        Some(v) => match v.as_u64() {
            Some(n) if n >= 2 => Some(n as usize),
            _ => {
                return Err(ConfigError::InvalidAnalysis {
                    field: "points",
                    reason: format!("expected an integer of at least 2, got {v}"),
                })
            }
        },
    };
    let log_spacing = match obj.get("logSpacing") {
        None => None,
        Some(Value::Bool(b)) => Some(*b),
        Some(_) => return Err(wrong_type("analysis.logSpacing", "a boolean")),
    };
    Ok(AnalysisConfig {
        t_start: time("tStart")?,
        t_stop: time("tStop")?,
        points,
        log_spacing,
    })
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_owned()
    } else {
        format!("{prefix}.{key}")
    }
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<(), ConfigError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::UnknownField(join(prefix, k))),
        None => Ok(()),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, prefix: &str) -> Result<&'a Value, ConfigError> {
    obj.get(key)
        .ok_or_else(|| ConfigError::MissingField(join(prefix, key)))
}

fn wrong_type(path: &str, expected: &'static str) -> ConfigError {
    ConfigError::WrongType {
        path: path.to_owned(),
        expected,
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ConfigError> {
    v.as_object().ok_or_else(|| wrong_type(path, "an object"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| wrong_type(path, "a string"))
}
