//! Binding compound models to workflow units and tracking where properties
//! come from along the chain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::validate_compound_model;
use crate::entity::validate::Violation;
use crate::entity::{CompoundModel, PropertyKind, PropertyRecord, WorkflowUnitStub};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteropError {
    #[error("node `{flowchart_id}` refers to workflow unit `{workflow_unit_id}`, which is not supplied")]
    MissingWorkflowUnit {
        flowchart_id: String,
        workflow_unit_id: String,
    },
    #[error("workflow unit `{0}` is supplied more than once")]
    DuplicateWorkflowUnit(String),
    #[error("no node with flowchartId `{0}`")]
    UnknownNode(String),
    #[error("compound model is not a valid chain: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidGraph(Vec<Violation>),
    #[error("record of `{name}` at `{flowchart_id}` has order {found}, the node sits at {expected}")]
    OrderMismatch {
        name: String,
        flowchart_id: String,
        found: usize,
        expected: usize,
    },
}

/// A compound model attached to the workflow units that run it, with the
/// properties recorded so far. Updates return a new binding.
#[derive(Debug, Clone, PartialEq)]
pub struct InteropBinding {
    compound_model: CompoundModel,
    workflow_units: Vec<WorkflowUnitStub>,
    properties: Vec<PropertyRecord>,
}

/// On-disk form of a binding; the compound model is referenced, not embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BindingDocument {
    pub compound_model_ref: String,
    pub workflow_units: Vec<WorkflowUnitStub>,
    #[serde(default)]
    pub properties: Vec<PropertyRecord>,
}

pub fn bind(cm: CompoundModel, wus: Vec<WorkflowUnitStub>) -> Result<InteropBinding, InteropError> {
    let violations = validate_compound_model(&cm);
    if !violations.is_empty() {
        return Err(InteropError::InvalidGraph(violations));
    }
    for (i, wu) in wus.iter().enumerate() {
        if wus[..i].iter().any(|w| w.id == wu.id) {
            return Err(InteropError::DuplicateWorkflowUnit(wu.id.clone()));
        }
    }
    for node in &cm.model_graph {
        if !wus.iter().any(|w| w.id == node.workflow_unit_id) {
            return Err(InteropError::MissingWorkflowUnit {
                flowchart_id: node.flowchart_id.clone(),
                workflow_unit_id: node.workflow_unit_id.clone(),
            });
        }
    }
    Ok(InteropBinding {
        compound_model: cm,
        workflow_units: wus,
        properties: Vec::new(),
    })
}

impl InteropBinding {
    pub fn compound_model(&self) -> &CompoundModel {
        &self.compound_model
    }

    pub fn workflow_units(&self) -> &[WorkflowUnitStub] {
        &self.workflow_units
    }

    pub fn properties(&self) -> &[PropertyRecord] {
        &self.properties
    }

    pub fn workflow_unit(&self, id: &str) -> Option<&WorkflowUnitStub> {
        self.workflow_units.iter().find(|w| w.id == id)
    }

    /// Unit-model nodes driven by one workflow unit, in chain order.
    pub fn nodes_of(&self, workflow_unit_id: &str) -> Vec<&str> {
        self.chain()
            .into_iter()
            .filter(|(_, wu)| *wu == workflow_unit_id)
            .map(|(fid, _)| fid)
            .collect()
    }

    fn chain(&self) -> Vec<(&str, &str)> {
        self.compound_model
            .chain()
            .expect("bound graphs are valid chains")
            .into_iter()
            .map(|n| (n.flowchart_id.as_str(), n.workflow_unit_id.as_str()))
            .collect()
    }

    pub fn record_property(&self, name: impl Into<String>, flowchart_id: &str) -> Result<InteropBinding, InteropError> {
        self.record_property_as(name, flowchart_id, PropertyKind::APosteriori)
    }

    pub fn record_property_as(
        &self,
        name: impl Into<String>,
        flowchart_id: &str,
        kind: PropertyKind,
    ) -> Result<InteropBinding, InteropError> {
        let (order, (_, wu)) = self
            .chain()
            .into_iter()
            .enumerate()
            .find(|(_, (fid, _))| *fid == flowchart_id)
            .ok_or_else(|| InteropError::UnknownNode(flowchart_id.to_string()))?;
        let mut next = self.clone();
        next.properties.push(PropertyRecord {
            name: name.into(),
            source_flowchart_id: flowchart_id.to_string(),
            source_workflow_unit_id: wu.to_string(),
            order,
            kind,
        });
        Ok(next)
    }

    /// Records of `name` in ascending chain order; records at the same node
    /// keep insertion order.
    pub fn property_trace(&self, name: &str) -> Vec<&PropertyRecord> {
        let mut out: Vec<&PropertyRecord> = self.properties.iter().filter(|p| p.name == name).collect();
        out.sort_by_key(|p| p.order);
        out
    }

    pub fn last_occurrence(&self, name: &str) -> Option<&PropertyRecord> {
        self.property_trace(name).pop()
    }

    pub fn to_document(&self, compound_model_ref: impl Into<String>) -> BindingDocument {
        BindingDocument {
            compound_model_ref: compound_model_ref.into(),
            workflow_units: self.workflow_units.clone(),
            properties: self.properties.clone(),
        }
    }

    /// Rebuilds a binding from its document and the referenced compound
    /// model, re-deriving every record's source.
    pub fn from_document(doc: BindingDocument, cm: CompoundModel) -> Result<InteropBinding, InteropError> {
        let mut b = bind(cm, doc.workflow_units)?;
        for p in doc.properties {
            b = b.record_property_as(p.name.clone(), &p.source_flowchart_id, p.kind)?;
            let recorded = b.properties.last().expect("just recorded");
            if recorded.order != p.order || recorded.source_workflow_unit_id != p.source_workflow_unit_id {
                return Err(InteropError::OrderMismatch {
                    name: p.name,
                    flowchart_id: p.source_flowchart_id,
                    found: p.order,
                    expected: recorded.order,
                });
            }
        }
        Ok(b)
    }
}
