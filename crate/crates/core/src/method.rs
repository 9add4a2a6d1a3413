//! Default-parameter diffing, precision features and method merging.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::entity::document::{pointer_segment, read_parameter_value, DocumentError};
use crate::entity::{Extras, Method, MethodData, MethodParameter, ParameterValue, ValueKind};

/// Default input variables of one flavor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlavorDefaults {
    pub flavor_id: String,
    pub defaults: BTreeMap<String, ParameterValue>,
}

impl FlavorDefaults {
    pub fn new(flavor_id: impl Into<String>) -> Self {
        Self {
            flavor_id: flavor_id.into(),
            defaults: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<ParameterValue>) -> Self {
        self.defaults.insert(key.into(), value.into());
        self
    }
}

/// Reads a `{flavorId: {key: value}}` file.
pub fn parse_flavor_defaults(raw: &str) -> Result<BTreeMap<String, FlavorDefaults>, DocumentError> {
    let root: Value = serde_json::from_str(raw).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let schema = |path: String, message: &str| DocumentError::Schema {
        path,
        message: message.to_string(),
    };
    let Value::Object(flavors) = root else {
        return Err(schema(String::new(), "expected an object keyed by flavor id"));
    };
    let mut out = BTreeMap::new();
    for (flavor, entries) in flavors {
        let at = format!("/{}", pointer_segment(&flavor));
        let Value::Object(entries) = entries else {
            return Err(schema(at, "expected an object of default values"));
        };
        let mut fd = FlavorDefaults::new(flavor.clone());
        for (key, value) in entries {
            let v = read_parameter_value(value, &format!("{at}/{}", pointer_segment(&key)))?;
            fd.defaults.insert(key, v);
        }
        out.insert(flavor, fd);
    }
    Ok(out)
}

fn equal_values(a: &ParameterValue, b: &ParameterValue) -> bool {
    match (a, b) {
        (ParameterValue::Number(_), ParameterValue::Number(_)) | (ParameterValue::List(_), ParameterValue::List(_)) => {
            a.same_value(b)
        }
        _ => a == b,
    }
}

/// Parameters that deviate from the flavor defaults or have none, in input
/// order. Numbers compare by value without tolerance.
pub fn diff_against_defaults(parameters: &[MethodParameter], defaults: &FlavorDefaults) -> Vec<MethodParameter> {
    parameters
        .iter()
        .filter(|p| match defaults.defaults.get(&p.key) {
            Some(d) => !equal_values(&p.value, d),
            None => true,
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionFeature {
    pub key: String,
    pub value: f64,
    pub unit: Option<String>,
}

/// Numeric precision parameters sorted by key.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecisionFeatureVector {
    pub entries: Vec<PrecisionFeature>,
}

impl PrecisionFeatureVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&PrecisionFeature> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedParameter {
    pub key: String,
    /// `None` when the name has no matching parameter.
    pub kind: Option<ValueKind>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecisionExtraction {
    pub features: PrecisionFeatureVector,
    pub excluded: Vec<ExcludedParameter>,
}

/// Splits the precision list into scalar numeric features and everything
/// else. Lists of numbers are excluded: a feature is one number.
pub fn extract_precision_features(m: &Method) -> PrecisionExtraction {
    let mut out = PrecisionExtraction::default();
    for key in &m.precision {
        match m.parameter(key) {
            Some(p) => match p.value.as_f64() {
                Some(value) => out.features.entries.push(PrecisionFeature {
                    key: key.clone(),
                    value,
                    unit: p.unit.clone(),
                }),
                None => out.excluded.push(ExcludedParameter {
                    key: key.clone(),
                    kind: Some(p.value.kind()),
                }),
            },
            None => out.excluded.push(ExcludedParameter {
                key: key.clone(),
                kind: None,
            }),
        }
    }
    out.features.entries.sort_by(|a, b| a.key.cmp(&b.key));
    out.excluded.sort_by(|a, b| a.key.cmp(&b.key));
    out
}

/// Maps precision features to a single score.
pub trait PrecisionScorer {
    fn score(&self, features: &PrecisionFeatureVector) -> f64;
}

/// Returns one feature's value unchanged, NaN when it is absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleFeature(pub String);

impl PrecisionScorer for SingleFeature {
    fn score(&self, features: &PrecisionFeatureVector) -> f64 {
        features.get(&self.0).map_or(f64::NAN, |f| f.value)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("parameter `{key}` is a {global} globally but a {local} locally")]
    TypeMismatch {
        key: String,
        global: ValueKind,
        local: ValueKind,
    },
}

fn union(first: &[String], second: &[String]) -> Vec<String> {
    let mut out = first.to_vec();
    for s in second {
        if !out.contains(s) {
            out.push(s.clone());
        }
    }
    out
}

fn merge_maps(global: &Extras, local: &Extras) -> Extras {
    let mut out = global.clone();
    out.extend(local.iter().map(|(k, v)| (k.clone(), v.clone())));
    out
}

/// Layers a unit's method over the compound's global method.
///
/// Local values win. Parameter categories and precision lists are unioned,
/// local entries first, so `merge_methods(m, m) == m`. Integers and floats
/// count as the same kind.
pub fn merge_methods(global: &Method, local: &Method) -> Result<Method, MergeError> {
    let mut parameters = Vec::with_capacity(local.parameters.len() + global.parameters.len());
    for lp in &local.parameters {
        let merged = match global.parameter(&lp.key) {
            None => lp.clone(),
            Some(gp) => {
                if gp.value.kind() != lp.value.kind() {
                    return Err(MergeError::TypeMismatch {
                        key: lp.key.clone(),
                        global: gp.value.kind(),
                        local: lp.value.kind(),
                    });
                }
                MethodParameter {
                    key: lp.key.clone(),
                    value: lp.value.clone(),
                    categories: union(&lp.categories, &gp.categories),
                    unit: lp.unit.clone().or_else(|| gp.unit.clone()),
                    extras: merge_maps(&gp.extras, &lp.extras),
                }
            }
        };
        parameters.push(merged);
    }
    for gp in &global.parameters {
        if local.parameter(&gp.key).is_none() {
            parameters.push(gp.clone());
        }
    }
    let mut precision = union(&local.precision, &global.precision);
    for p in &parameters {
        if p.is_precision() && !precision.contains(&p.key) {
            precision.push(p.key.clone());
        }
    }
    Ok(Method {
        method_type: local.method_type.clone(),
        subtype: local.subtype.clone(),
        parameters,
        precision,
        data: MethodData {
            search_text: local.data.search_text.clone().or_else(|| global.data.search_text.clone()),
            entries: merge_maps(&global.data.entries, &local.data.entries),
        },
        extras: merge_maps(&global.extras, &local.extras),
    })
}
