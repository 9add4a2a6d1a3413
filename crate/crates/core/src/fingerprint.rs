//! Content fingerprints for duplicate detection.
//!
//! Generated identifiers do not count: flowchartIds and workflowUnitIds are
//! replaced by ordinals before hashing, so two structurally identical models
//! collide on purpose.

use std::collections::BTreeMap;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::entity::document::{compound_model_value, method_value, unit_model_value};
use crate::entity::{CompoundModel, Entity, UnitModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    /// Lowercase hex SHA-256 of `canonical_form`.
    pub digest: String,
    pub canonical_form: Vec<u8>,
}

impl Fingerprint {
    fn of(canonical_form: Vec<u8>) -> Self {
        let digest = hex::encode(Sha256::digest(&canonical_form));
        Self { digest, canonical_form }
    }
}

impl std::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.digest)
    }
}

fn unit_value_with_ordinal(u: &UnitModel, ordinal: usize) -> Value {
    let mut u = u.clone();
    u.flowchart_id = ordinal.to_string();
    unit_model_value(&u)
}

/// Chain order when the graph is a valid chain, declaration order otherwise.
fn node_order(cm: &CompoundModel) -> Vec<usize> {
    match cm.chain() {
        Some(chain) => chain
            .iter()
            .map(|n| {
                cm.model_graph
                    .iter()
                    .position(|m| m.flowchart_id == n.flowchart_id)
                    .expect("chain nodes come from the graph")
            })
            .collect(),
        None => (0..cm.model_graph.len()).collect(),
    }
}

fn compound_canonical(cm: &CompoundModel) -> Value {
    let order = node_order(cm);
    let fid_ordinal: BTreeMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(ord, &i)| (cm.model_graph[i].flowchart_id.as_str(), ord))
        .collect();
    let mut wu_ordinal: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in &order {
        let next = wu_ordinal.len();
        wu_ordinal.entry(cm.model_graph[i].workflow_unit_id.as_str()).or_insert(next);
    }

    let mut renamed = cm.clone();
    renamed.model_graph = order
        .iter()
        .map(|&i| {
            let mut n = cm.model_graph[i].clone();
            n.flowchart_id = fid_ordinal[n.flowchart_id.as_str()].to_string();
            n.workflow_unit_id = wu_ordinal[n.workflow_unit_id.as_str()].to_string();
            n.next = n.next.as_deref().map(|next| match fid_ordinal.get(next) {
                Some(o) => o.to_string(),
                None => format!("?{next}"),
            });
            n
        })
        .collect();
    renamed.units.clear();
    let mut value = compound_model_value(&renamed);

    let units: Vec<Value> = order
        .iter()
        .enumerate()
        .filter_map(|(ord, &i)| cm.units.get(&cm.model_graph[i].flowchart_id).map(|u| unit_value_with_ordinal(u, ord)))
        .collect();
    if let Value::Object(map) = &mut value {
        map.insert("units".into(), Value::Array(units));
    }
    value
}

/// The bytes a fingerprint is computed from.
pub fn canonical_form(entity: &Entity, material: Option<&str>) -> Vec<u8> {
    let body = match entity {
        Entity::Unit(u) => unit_value_with_ordinal(u, 0),
        Entity::Compound(c) => compound_canonical(c),
        Entity::Method(m) => method_value(m),
    };
    let mut root = Map::new();
    root.insert("kind".into(), Value::from(entity.kind().as_str()));
    root.insert("entity".into(), body);
    if let Some(m) = material {
        root.insert("material".into(), Value::from(m));
    }
    serde_json::to_vec(&Value::Object(root)).expect("values always serialize")
}

pub fn fingerprint(entity: &Entity, material: Option<&str>) -> Fingerprint {
    Fingerprint::of(canonical_form(entity, material))
}
