//! Construction and validation of unit and compound models.

pub mod fixtures;
mod functionals;

pub use functionals::{functional_library, library_functional, FunctionalLibraryEntry, HSE06_SCREENING};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::entity::document::pointer_segment;
use crate::entity::validate::{Rule, Validator, Violation};
use crate::entity::{
    is_slug, CategoryPath, CompoundModel, Entity, Extras, Functional, Method, ModelGraphNode, UnitModel,
};
use crate::taxonomy::{validate_tags, TaxonomyError, TaxonomyTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error(transparent)]
    UnknownCategory(#[from] TaxonomyError),
    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),
    #[error("tags not applicable at this category: {}", summarize(.0))]
    TagScope(Vec<Violation>),
    #[error("model violates invariants: {}", summarize(.0))]
    Invalid(Vec<Violation>),
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalChoice {
    /// Slug of a [`functional_library`] entry.
    Library(String),
    Explicit(Functional),
}

/// Optional parts of a unit model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildOptions {
    pub functional: Option<FunctionalChoice>,
    pub tags: Vec<String>,
    pub augmentations: Vec<String>,
    pub modifiers: Vec<String>,
    pub references: Vec<String>,
    pub method: Option<Method>,
    pub extras: Extras,
}

impl BuildOptions {
    pub fn functional(mut self, slug: impl Into<String>) -> Self {
        self.functional = Some(FunctionalChoice::Library(slug.into()));
        self
    }

    pub fn explicit_functional(mut self, f: Functional) -> Self {
        self.functional = Some(FunctionalChoice::Explicit(f));
        self
    }

    pub fn tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn augmentation(mut self, a: impl Into<String>) -> Self {
        self.augmentations.push(a.into());
        self
    }

    pub fn modifier(mut self, m: impl Into<String>) -> Self {
        self.modifiers.push(m.into());
        self
    }

    pub fn reference(mut self, r: impl Into<String>) -> Self {
        self.references.push(r.into());
        self
    }

    pub fn method(mut self, m: Method) -> Self {
        self.method = Some(m);
        self
    }
}

/// Builds a unit model whose categories carry the registered names and which
/// passes every validator.
pub fn build_unit_model(
    tree: &TaxonomyTree,
    path: &CategoryPath,
    name: impl Into<String>,
    slug: impl Into<String>,
    flowchart_id: impl Into<String>,
    options: BuildOptions,
) -> Result<UnitModel, BuildError> {
    let categories = tree.resolve(path)?;
    let functional = match options.functional {
        Some(FunctionalChoice::Library(slug)) => {
            Some(library_functional(&slug).ok_or(BuildError::UnknownFunctional(slug))?)
        }
        Some(FunctionalChoice::Explicit(f)) => Some(f),
        None => None,
    };
    let model = UnitModel {
        categories,
        name: name.into(),
        slug: slug.into(),
        flowchart_id: flowchart_id.into(),
        tags: options.tags,
        augmentations: options.augmentations,
        modifiers: options.modifiers,
        references: options.references,
        functional,
        method: options.method,
        extras: options.extras,
    };
    let tag_violations = validate_tags(&model);
    if !tag_violations.is_empty() {
        return Err(BuildError::TagScope(tag_violations));
    }
    let violations = Validator::new(tree).validate(&Entity::Unit(model.clone()));
    if !violations.is_empty() {
        return Err(BuildError::Invalid(violations));
    }
    Ok(model)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("a compound model needs at least one unit model")]
    Empty,
    #[error("flowchartId `{0}` is used by more than one unit model")]
    DuplicateFlowchartId(String),
    #[error("unit model `{0}` has no workflow unit")]
    UnmappedUnit(String),
    #[error("mapping names `{0}`, which is not among the unit models")]
    UnknownMappedUnit(String),
    #[error("unit model `{0}` is mapped to more than one workflow unit")]
    ConflictingMapping(String),
}

/// Chains unit models in list order and attaches each to its workflow unit.
///
/// Several unit models may share one workflow unit; one unit model never
/// maps to two.
pub fn compose_compound_model<I, K, V>(
    units: Vec<UnitModel>,
    workflow_mapping: I,
    global_method: Method,
) -> Result<CompoundModel, ComposeError>
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<String>,
{
    if units.is_empty() {
        return Err(ComposeError::Empty);
    }
    let mut seen = BTreeSet::new();
    for u in &units {
        if !seen.insert(u.flowchart_id.clone()) {
            return Err(ComposeError::DuplicateFlowchartId(u.flowchart_id.clone()));
        }
    }
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    for (fid, wu) in workflow_mapping {
        let (fid, wu) = (fid.into(), wu.into());
        if !seen.contains(&fid) {
            return Err(ComposeError::UnknownMappedUnit(fid));
        }
        if let Some(prev) = mapping.insert(fid.clone(), wu.clone()) {
            if prev != wu {
                return Err(ComposeError::ConflictingMapping(fid));
            }
        }
    }
    let mut model_graph = Vec::with_capacity(units.len());
    for (i, u) in units.iter().enumerate() {
        let workflow_unit_id = mapping
            .get(&u.flowchart_id)
            .cloned()
            .ok_or_else(|| ComposeError::UnmappedUnit(u.flowchart_id.clone()))?;
        model_graph.push(ModelGraphNode {
            flowchart_id: u.flowchart_id.clone(),
            name: u.name.clone(),
            slug: u.slug.clone(),
            head: i == 0,
            next: units.get(i + 1).map(|n| n.flowchart_id.clone()),
            workflow_unit_id,
            extras: Extras::new(),
        });
    }
    Ok(CompoundModel {
        model_graph,
        method: global_method,
        units: units.into_iter().map(|u| (u.flowchart_id.clone(), u)).collect(),
        extras: Extras::new(),
    })
}

/// Graph-level checks: a single head, a cycle-free chain over every node,
/// resolvable `next` targets, and a unit model for every node.
pub fn validate_compound_model(cm: &CompoundModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let node_path = |i: usize, key: &str| format!("/modelGraph/{i}/{key}");

    let heads: Vec<usize> = cm
        .model_graph
        .iter()
        .enumerate()
        .filter(|(_, n)| n.head)
        .map(|(i, _)| i)
        .collect();
    match heads.len() {
        0 => out.push(Violation::new("/modelGraph", Rule::NoHead, "no node is marked as head")),
        1 => {}
        _ => out.push(Violation::new(
            "/modelGraph",
            Rule::MultipleHeads,
            format!(
                "multiple heads at positions {}",
                heads.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
            ),
        )),
    }

    let mut ids = BTreeSet::new();
    for (i, n) in cm.model_graph.iter().enumerate() {
        if n.flowchart_id.trim().is_empty() {
            out.push(Violation::new(
                node_path(i, "flowchartId"),
                Rule::FlowchartIdEmpty,
                "flowchartId must not be empty",
            ));
        } else if !ids.insert(n.flowchart_id.as_str()) {
            out.push(Violation::new(
                node_path(i, "flowchartId"),
                Rule::DuplicateFlowchartId,
                format!("flowchartId `{}` is repeated", n.flowchart_id),
            ));
        }
        if !is_slug(&n.slug) {
            out.push(Violation::new(
                node_path(i, "slug"),
                Rule::SlugFormat,
                format!("`{}` is not a slug ([a-z0-9-]+)", n.slug),
            ));
        }
        if n.workflow_unit_id.trim().is_empty() {
            out.push(Violation::new(
                node_path(i, "workflowUnitId"),
                Rule::WorkflowUnitIdEmpty,
                "workflowUnitId must not be empty",
            ));
        }
        if let Some(next) = &n.next {
            if next == &n.flowchart_id {
                out.push(Violation::new(
                    node_path(i, "next"),
                    Rule::SelfCycle,
                    format!("node `{next}` points to itself"),
                ));
            } else if cm.node(next).is_none() {
                out.push(Violation::new(
                    node_path(i, "next"),
                    Rule::DanglingNext,
                    format!("next `{next}` names no node"),
                ));
            }
        }
        if !cm.units.contains_key(&n.flowchart_id) {
            out.push(Violation::new(
                node_path(i, "flowchartId"),
                Rule::UnmappedNode,
                format!("node `{}` has no unit model", n.flowchart_id),
            ));
        }
    }

    if let [head] = heads.as_slice() {
        let mut visited = BTreeSet::new();
        let mut cur = *head;
        visited.insert(cur);
        loop {
            let node = &cm.model_graph[cur];
            let Some(next) = &node.next else { break };
            if next == &node.flowchart_id {
                break;
            }
            let Some(j) = cm.model_graph.iter().position(|n| &n.flowchart_id == next) else {
                break;
            };
            if !visited.insert(j) {
                out.push(Violation::new(
                    node_path(cur, "next"),
                    Rule::Cycle,
                    format!("following next from the head revisits `{next}`"),
                ));
                break;
            }
            cur = j;
        }
        for (i, n) in cm.model_graph.iter().enumerate() {
            if !visited.contains(&i) {
                out.push(Violation::new(
                    node_path(i, "flowchartId"),
                    Rule::UnreachableNode,
                    format!("node `{}` is not reachable from the head", n.flowchart_id),
                ));
            }
        }
    }

    for (key, unit) in &cm.units {
        let at = format!("/units/{}", pointer_segment(key));
        if !ids.contains(key.as_str()) {
            out.push(Violation::new(
                at.clone(),
                Rule::UnitNotInGraph,
                format!("unit model `{key}` is not referenced by any node"),
            ));
        }
        if &unit.flowchart_id != key {
            out.push(Violation::new(
                format!("{at}/flowchartId"),
                Rule::UnitIdMismatch,
                format!("unit keyed `{key}` declares flowchartId `{}`", unit.flowchart_id),
            ));
        }
    }
    out
}
