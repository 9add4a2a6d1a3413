//! Invariant checks over parsed entities. Violations are data, never errors.

use std::collections::BTreeSet;
use std::fmt;

use super::document::pointer_segment;
use super::{is_slug, CompoundModel, Entity, Functional, Method, RangeKind, UnitModel, LEVEL_KEYS};
use crate::taxonomy::{tags::validate_tags_at, TaxonomyTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    SlugFormat,
    UnknownCategory,
    FlowchartIdEmpty,
    FunctionalRequiresDft,
    FunctionalEmpty,
    DuplicateComponentSlug,
    FractionRange,
    ScreeningParameter,
    TagScope,
    TagParameter,
    ParameterKeyEmpty,
    DuplicateParameter,
    ParameterUnit,
    PrecisionConsistency,
    NoHead,
    MultipleHeads,
    SelfCycle,
    DanglingNext,
    Cycle,
    UnreachableNode,
    DuplicateFlowchartId,
    UnmappedNode,
    UnitNotInGraph,
    UnitIdMismatch,
    WorkflowUnitIdEmpty,
    ClassificationRule,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::SlugFormat => "slug-format",
            Rule::UnknownCategory => "unknown-category",
            Rule::FlowchartIdEmpty => "flowchart-id-empty",
            Rule::FunctionalRequiresDft => "functional-requires-dft",
            Rule::FunctionalEmpty => "functional-empty",
            Rule::DuplicateComponentSlug => "duplicate-component-slug",
            Rule::FractionRange => "fraction-range",
            Rule::ScreeningParameter => "screening-parameter",
            Rule::TagScope => "tag-scope",
            Rule::TagParameter => "tag-parameter",
            Rule::ParameterKeyEmpty => "parameter-key-empty",
            Rule::DuplicateParameter => "duplicate-parameter",
            Rule::ParameterUnit => "parameter-unit",
            Rule::PrecisionConsistency => "precision-consistency",
            Rule::NoHead => "no-head",
            Rule::MultipleHeads => "multiple-heads",
            Rule::SelfCycle => "self-cycle",
            Rule::DanglingNext => "dangling-next",
            Rule::Cycle => "cycle",
            Rule::UnreachableNode => "unreachable-node",
            Rule::DuplicateFlowchartId => "duplicate-flowchart-id",
            Rule::UnmappedNode => "unmapped-node",
            Rule::UnitNotInGraph => "unit-not-in-graph",
            Rule::UnitIdMismatch => "unit-id-mismatch",
            Rule::WorkflowUnitIdEmpty => "workflow-unit-id-empty",
            Rule::ClassificationRule => "classification-rule",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A broken invariant, located by JSON pointer into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub rule: Rule,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, rule: Rule, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{path}: {}: {}", self.rule, self.message)
    }
}

/// Range accepted for functional component fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FractionProfile {
    /// Fractions within `[0, 1]`.
    #[default]
    Strict,
    /// Any finite fraction.
    Permissive,
}

#[derive(Debug, Clone)]
pub struct Validator<'t> {
    taxonomy: &'t TaxonomyTree,
    profile: FractionProfile,
}

/// Validates against the built-in taxonomy with strict fractions.
pub fn validate_entity(entity: &Entity) -> Vec<Violation> {
    Validator::new(&TaxonomyTree::builtin()).validate(entity)
}

impl<'t> Validator<'t> {
    pub fn new(taxonomy: &'t TaxonomyTree) -> Self {
        Self {
            taxonomy,
            profile: FractionProfile::Strict,
        }
    }

    pub fn with_profile(mut self, profile: FractionProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn taxonomy(&self) -> &TaxonomyTree {
        self.taxonomy
    }

    pub fn validate(&self, entity: &Entity) -> Vec<Violation> {
        let mut out = Vec::new();
        match entity {
            Entity::Unit(u) => self.unit_model(u, "", &mut out),
            Entity::Compound(c) => self.compound_model(c, &mut out),
            Entity::Method(m) => method(m, "", &mut out),
        }
        out
    }

    pub fn validate_unit_model(&self, model: &UnitModel) -> Vec<Violation> {
        let mut out = Vec::new();
        self.unit_model(model, "", &mut out);
        out
    }

    fn unit_model(&self, u: &UnitModel, base: &str, out: &mut Vec<Violation>) {
        slug(&u.slug, &format!("{base}/slug"), out);
        if u.flowchart_id.trim().is_empty() {
            out.push(Violation::new(
                format!("{base}/flowchartId"),
                Rule::FlowchartIdEmpty,
                "flowchartId must not be empty",
            ));
        }
        for (key, level) in LEVEL_KEYS.iter().zip(u.categories.levels()) {
            slug(&level.slug, &format!("{base}/categories/{key}/slug"), out);
        }
        if let Some(level) = self.taxonomy.first_unknown(&u.categories) {
            let prefix = u.categories.prefix(level).expect("level within depth");
            out.push(Violation::new(
                format!("{base}/categories/{}", LEVEL_KEYS[level - 1]),
                Rule::UnknownCategory,
                format!("`{prefix}` is not a registered category"),
            ));
        }
        if let Some(f) = &u.functional {
            if u.categories.slug_at(3) != Some("dft") {
                out.push(Violation::new(
                    format!("{base}/functional"),
                    Rule::FunctionalRequiresDft,
                    format!(
                        "a functional requires tier3 `dft`, model is categorized as {}",
                        u.categories
                    ),
                ));
            }
            self.functional(f, &format!("{base}/functional"), out);
        }
        out.extend(validate_tags_at(u, base));
        if let Some(m) = &u.method {
            method(m, &format!("{base}/method"), out);
        }
    }

    fn functional(&self, f: &Functional, base: &str, out: &mut Vec<Violation>) {
        slug(&f.slug, &format!("{base}/slug"), out);
        if f.components.is_empty() {
            out.push(Violation::new(
                format!("{base}/components"),
                Rule::FunctionalEmpty,
                "a functional needs at least one component",
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in f.components.iter().enumerate() {
            let at = format!("{base}/components/{i}");
            slug(&c.slug, &format!("{at}/slug"), out);
            if !seen.insert(c.slug.as_str()) {
                out.push(Violation::new(
                    format!("{at}/slug"),
                    Rule::DuplicateComponentSlug,
                    format!("component slug `{}` is repeated", c.slug),
                ));
            }
            let in_range = match self.profile {
                FractionProfile::Strict => (0.0..=1.0).contains(&c.fraction),
                FractionProfile::Permissive => c.fraction.is_finite(),
            };
            if !in_range {
                out.push(Violation::new(
                    format!("{at}/fraction"),
                    Rule::FractionRange,
                    match self.profile {
                        FractionProfile::Strict => format!("fraction {} outside [0, 1]", c.fraction),
                        FractionProfile::Permissive => format!("fraction {} is not finite", c.fraction),
                    },
                ));
            }
            let separated = matches!(c.range_kind, Some(RangeKind::ShortRange | RangeKind::LongRange));
            match c.screening_parameter {
                Some(w) if !(w.is_finite() && w > 0.0) => out.push(Violation::new(
                    format!("{at}/screeningParameter"),
                    Rule::ScreeningParameter,
                    format!("screening parameter {w} must be positive and finite"),
                )),
                None if separated => out.push(Violation::new(
                    format!("{at}/screeningParameter"),
                    Rule::ScreeningParameter,
                    "range-separated component requires a screening parameter",
                )),
                _ => {}
            }
        }
    }

    fn compound_model(&self, c: &CompoundModel, out: &mut Vec<Violation>) {
        out.extend(crate::builder::validate_compound_model(c));
        method(&c.method, "/method", out);
        for (key, unit) in &c.units {
            self.unit_model(unit, &format!("/units/{}", pointer_segment(key)), out);
        }
    }
}

fn slug(value: &str, path: &str, out: &mut Vec<Violation>) {
    if !is_slug(value) {
        out.push(Violation::new(
            path,
            Rule::SlugFormat,
            format!("`{value}` is not a slug ([a-z0-9-]+)"),
        ));
    }
}

/// Parameter annotations and precision bookkeeping of a method.
pub fn validate_method(m: &Method) -> Vec<Violation> {
    let mut out = Vec::new();
    method(m, "", &mut out);
    out
}

fn method(m: &Method, base: &str, out: &mut Vec<Violation>) {
    slug(&m.method_type, &format!("{base}/type"), out);
    slug(&m.subtype, &format!("{base}/subtype"), out);
    let mut keys = BTreeSet::new();
    for (i, p) in m.parameters.iter().enumerate() {
        let at = format!("{base}/parameters/{i}");
        if p.key.trim().is_empty() {
            out.push(Violation::new(
                format!("{at}/key"),
                Rule::ParameterKeyEmpty,
                "parameter key must not be empty",
            ));
        } else if !keys.insert(p.key.as_str()) {
            out.push(Violation::new(
                format!("{at}/key"),
                Rule::DuplicateParameter,
                format!("parameter `{}` is repeated", p.key),
            ));
        }
        if p.unit.is_some() && !p.value.is_numeric() {
            out.push(Violation::new(
                format!("{at}/unit"),
                Rule::ParameterUnit,
                format!("unit given for non-numeric ({}) value", p.value.kind()),
            ));
        }
        if p.is_precision() && !m.precision.contains(&p.key) {
            out.push(Violation::new(
                format!("{at}/categories"),
                Rule::PrecisionConsistency,
                format!("precision parameter `{}` is missing from the precision list", p.key),
            ));
        }
    }
    for (i, name) in m.precision.iter().enumerate() {
        let listed = m.parameters.iter().any(|p| &p.key == name && p.is_precision());
        if !listed {
            let message = if m.parameter(name).is_some() {
                format!("`{name}` is listed as precision but its parameter lacks the precision category")
            } else {
                format!("`{name}` is listed as precision but no parameter has that key")
            };
            out.push(Violation::new(
                format!("{base}/precision/{i}"),
                Rule::PrecisionConsistency,
                message,
            ));
        }
    }
}
