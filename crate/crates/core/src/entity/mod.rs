//! Domain types for unit models, compound models and methods.
//!
//! Every entity is a plain immutable value. Parsing and canonical
//! serialization live in [`document`]; structural checks in [`validate`].

pub mod document;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Keys that are not part of the schema, kept verbatim and emitted in
/// lexicographic order.
pub type Extras = BTreeMap<String, Value>;

/// Document keys for the five categorization levels, outermost first.
pub const LEVEL_KEYS: [&str; 5] = ["tier1", "tier2", "tier3", "type", "subtype"];

/// Returns true for machine tokens matching `[a-z0-9-]+`.
pub fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("category path must have between 1 and 5 levels, got {0}")]
    Depth(usize),
    #[error("empty segment in category path `{0}`")]
    EmptySegment(String),
}

/// One categorization level: a human-readable name and a machine token.
#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub name: String,
    pub slug: String,
    pub extras: Extras,
}

impl Category {
    pub fn new(name: impl Into<String>, slug: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            slug: slug.into(),
            extras: Extras::new(),
        }
    }
}

/// Ordered taxonomy coordinates `tier1/tier2/tier3/type/subtype`.
///
/// The level of each entry is its position, so a path is prefix-contiguous
/// by construction. Coordinate comparisons ([`CategoryPath::key`],
/// [`CategoryPath::is_prefix_of`]) look at slugs only; derived equality
/// also compares the human-readable names.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryPath {
    levels: Vec<Category>,
}

impl CategoryPath {
    pub fn new(levels: Vec<Category>) -> Result<Self, PathError> {
        if levels.is_empty() || levels.len() > LEVEL_KEYS.len() {
            return Err(PathError::Depth(levels.len()));
        }
        Ok(Self { levels })
    }

    /// Builds a path whose names equal the slugs. Use
    /// [`crate::taxonomy::TaxonomyTree::resolve`] to attach registered names.
    pub fn from_slugs<I, S>(slugs: I) -> Result<Self, PathError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let levels = slugs
            .into_iter()
            .map(|s| Category::new(s.as_ref(), s.as_ref()))
            .collect();
        Self::new(levels)
    }

    /// Parses a slash-joined path such as `pb/qm/dft`.
    pub fn parse(s: &str) -> Result<Self, PathError> {
        let parts: Vec<&str> = s.trim_matches('/').split('/').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(PathError::EmptySegment(s.to_string()));
        }
        Self::from_slugs(parts)
    }

    pub fn levels(&self) -> &[Category] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn slugs(&self) -> impl Iterator<Item = &str> + '_ {
        self.levels.iter().map(|c| c.slug.as_str())
    }

    /// Slug at a 1-based level (1 = tier1, 5 = subtype).
    pub fn slug_at(&self, level: usize) -> Option<&str> {
        level
            .checked_sub(1)
            .and_then(|i| self.levels.get(i))
            .map(|c| c.slug.as_str())
    }

    pub fn last_slug(&self) -> &str {
        &self.levels[self.levels.len() - 1].slug
    }

    /// Slash-joined slugs, e.g. `pb/qm/dft`.
    pub fn key(&self) -> String {
        self.slugs().collect::<Vec<_>>().join("/")
    }

    pub fn is_prefix_of(&self, other: &CategoryPath) -> bool {
        self.depth() <= other.depth() && self.slugs().zip(other.slugs()).all(|(a, b)| a == b)
    }

    /// The first `depth` levels, or `None` when `depth` is 0 or too large.
    pub fn prefix(&self, depth: usize) -> Option<CategoryPath> {
        if depth == 0 || depth > self.depth() {
            return None;
        }
        Some(CategoryPath {
            levels: self.levels[..depth].to_vec(),
        })
    }

    pub fn parent(&self) -> Option<CategoryPath> {
        self.prefix(self.depth() - 1)
    }

    /// Every non-empty prefix, shortest first (including the path itself).
    pub fn prefixes(&self) -> impl Iterator<Item = CategoryPath> + '_ {
        (1..=self.depth()).filter_map(move |d| self.prefix(d))
    }

    pub fn child(&self, category: Category) -> Result<CategoryPath, PathError> {
        let mut levels = self.levels.clone();
        levels.push(category);
        Self::new(levels)
    }
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagKind {
    Attribute,
    Modifier,
    Augmentation,
    User,
}

/// Where in the tree a tag becomes applicable.
#[derive(Debug, Clone, PartialEq)]
pub enum TagScope {
    Universal,
    Path(CategoryPath),
}

impl TagScope {
    pub fn admits(&self, path: &CategoryPath) -> bool {
        match self {
            TagScope::Universal => true,
            TagScope::Path(scope) => scope.is_prefix_of(path),
        }
    }
}

impl fmt::Display for TagScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagScope::Universal => f.write_str("*"),
            TagScope::Path(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagDescriptor {
    pub label: String,
    pub scope: TagScope,
    pub kind: TagKind,
    /// The `n` of a `scaling-power:n` label.
    pub parameter: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentType {
    Exchange,
    Correlation,
    ExchangeCorrelation,
    Kinetic,
    NonLocalCorrelation,
}

impl ComponentType {
    pub const ALL: [ComponentType; 5] = [
        ComponentType::Exchange,
        ComponentType::Correlation,
        ComponentType::ExchangeCorrelation,
        ComponentType::Kinetic,
        ComponentType::NonLocalCorrelation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentType::Exchange => "exchange",
            ComponentType::Correlation => "correlation",
            ComponentType::ExchangeCorrelation => "exchange-correlation",
            ComponentType::Kinetic => "kinetic",
            ComponentType::NonLocalCorrelation => "non-local-correlation",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

/// Range separation of a functional component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RangeKind {
    Full,
    ShortRange,
    LongRange,
}

impl RangeKind {
    pub const ALL: [RangeKind; 3] = [RangeKind::Full, RangeKind::ShortRange, RangeKind::LongRange];

    pub fn as_str(self) -> &'static str {
        match self {
            RangeKind::Full => "full",
            RangeKind::ShortRange => "short-range",
            RangeKind::LongRange => "long-range",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

/// A unit functional and the weight with which it enters the functional.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalComponent {
    pub name: String,
    pub slug: String,
    pub component_type: ComponentType,
    pub fraction: f64,
    pub range_kind: Option<RangeKind>,
    /// Range-separation parameter in inverse bohr.
    pub screening_parameter: Option<f64>,
    pub extras: Extras,
}

impl FunctionalComponent {
    pub fn new(
        name: impl Into<String>,
        slug: impl Into<String>,
        component_type: ComponentType,
        fraction: f64,
    ) -> Self {
        Self {
            name: name.into(),
            slug: slug.into(),
            component_type,
            fraction,
            range_kind: None,
            screening_parameter: None,
            extras: Extras::new(),
        }
    }

    pub fn range_separated(mut self, kind: RangeKind, screening: f64) -> Self {
        self.range_kind = Some(kind);
        self.screening_parameter = Some(screening);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub name: String,
    pub slug: String,
    pub components: Vec<FunctionalComponent>,
    pub extras: Extras,
}

/// A numeric scalar as written in the document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Int(i) => i as f64,
            Scalar::Float(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueKind {
    Number,
    Text,
    Bool,
    List,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Number => "number",
            ValueKind::Text => "string",
            ValueKind::Bool => "boolean",
            ValueKind::List => "list",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParameterValue {
    Number(Scalar),
    Text(String),
    Bool(bool),
    List(Vec<Scalar>),
}

impl ParameterValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            ParameterValue::Number(_) => ValueKind::Number,
            ParameterValue::Text(_) => ValueKind::Text,
            ParameterValue::Bool(_) => ValueKind::Bool,
            ParameterValue::List(_) => ValueKind::List,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ParameterValue::Number(_) | ParameterValue::List(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParameterValue::Number(s) => Some(s.as_f64()),
            _ => None,
        }
    }

    /// Exact value comparison; `40` and `40.0` are the same number.
    pub fn same_value(&self, other: &ParameterValue) -> bool {
        match (self, other) {
            (ParameterValue::Number(a), ParameterValue::Number(b)) => a.as_f64() == b.as_f64(),
            (ParameterValue::List(a), ParameterValue::List(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.as_f64() == y.as_f64())
            }
            (ParameterValue::Text(a), ParameterValue::Text(b)) => a == b,
            (ParameterValue::Bool(a), ParameterValue::Bool(b)) => a == b,
            _ => false,
        }
    }
}

impl From<i64> for ParameterValue {
    fn from(v: i64) -> Self {
        ParameterValue::Number(Scalar::Int(v))
    }
}

impl From<f64> for ParameterValue {
    fn from(v: f64) -> Self {
        ParameterValue::Number(Scalar::Float(v))
    }
}

impl From<&str> for ParameterValue {
    fn from(v: &str) -> Self {
        ParameterValue::Text(v.to_string())
    }
}

impl From<bool> for ParameterValue {
    fn from(v: bool) -> Self {
        ParameterValue::Bool(v)
    }
}

/// Category keyword marking parameters that influence precision.
pub const PRECISION_CATEGORY: &str = "precision";

#[derive(Debug, Clone, PartialEq)]
pub struct MethodParameter {
    pub key: String,
    pub value: ParameterValue,
    pub categories: Vec<String>,
    pub unit: Option<String>,
    pub extras: Extras,
}

impl MethodParameter {
    pub fn new(key: impl Into<String>, value: impl Into<ParameterValue>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
            categories: Vec::new(),
            unit: None,
            extras: Extras::new(),
        }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.categories.push(category.into());
        self
    }

    pub fn precision(self) -> Self {
        self.with_category(PRECISION_CATEGORY)
    }

    pub fn is_precision(&self) -> bool {
        self.categories.iter().any(|c| c == PRECISION_CATEGORY)
    }
}

/// Auxiliary method data; `searchText` is the filter keyword, the rest is
/// opaque (pseudopotential references, basis-set names, ...).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MethodData {
    pub search_text: Option<String>,
    pub entries: Extras,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub method_type: String,
    pub subtype: String,
    pub parameters: Vec<MethodParameter>,
    pub precision: Vec<String>,
    pub data: MethodData,
    pub extras: Extras,
}

impl Method {
    pub fn new(method_type: impl Into<String>, subtype: impl Into<String>) -> Self {
        Self {
            method_type: method_type.into(),
            subtype: subtype.into(),
            parameters: Vec::new(),
            precision: Vec::new(),
            data: MethodData::default(),
            extras: Extras::new(),
        }
    }

    /// Appends a parameter, listing it under `precision` when it carries the
    /// precision category.
    pub fn with_parameter(mut self, parameter: MethodParameter) -> Self {
        if parameter.is_precision() && !self.precision.contains(&parameter.key) {
            self.precision.push(parameter.key.clone());
        }
        self.parameters.push(parameter);
        self
    }

    pub fn with_search_text(mut self, text: impl Into<String>) -> Self {
        self.data.search_text = Some(text.into());
        self
    }

    pub fn with_data(mut self, key: impl Into<String>, value: Value) -> Self {
        self.data.entries.insert(key.into(), value);
        self
    }

    pub fn parameter(&self, key: &str) -> Option<&MethodParameter> {
        self.parameters.iter().find(|p| p.key == key)
    }
}

/// The smallest logically consistent model unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitModel {
    pub categories: CategoryPath,
    pub name: String,
    pub slug: String,
    pub flowchart_id: String,
    pub tags: Vec<String>,
    pub augmentations: Vec<String>,
    pub modifiers: Vec<String>,
    pub references: Vec<String>,
    pub functional: Option<Functional>,
    pub method: Option<Method>,
    pub extras: Extras,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraphNode {
    pub flowchart_id: String,
    pub name: String,
    pub slug: String,
    pub head: bool,
    pub next: Option<String>,
    pub workflow_unit_id: String,
    pub extras: Extras,
}

/// Unit models arranged as a head-linked chain plus a global method.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundModel {
    pub model_graph: Vec<ModelGraphNode>,
    pub method: Method,
    pub units: BTreeMap<String, UnitModel>,
    pub extras: Extras,
}

impl CompoundModel {
    pub fn node(&self, flowchart_id: &str) -> Option<&ModelGraphNode> {
        self.model_graph.iter().find(|n| n.flowchart_id == flowchart_id)
    }

    /// Nodes in chain order, following `next` from the unique head.
    ///
    /// Returns `None` when the graph is not a single acyclic chain covering
    /// every node.
    pub fn chain(&self) -> Option<Vec<&ModelGraphNode>> {
        let mut heads = self.model_graph.iter().filter(|n| n.head);
        let head = heads.next()?;
        if heads.next().is_some() {
            return None;
        }
        let mut out = vec![head];
        let mut cur = head;
        while let Some(next) = &cur.next {
            if out.len() > self.model_graph.len() {
                return None;
            }
            cur = self.node(next)?;
            if out.iter().any(|n| n.flowchart_id == cur.flowchart_id) {
                return None;
            }
            out.push(cur);
        }
        (out.len() == self.model_graph.len()).then_some(out)
    }

    /// Zero-based chain position of a node.
    pub fn position(&self, flowchart_id: &str) -> Option<usize> {
        self.chain()?
            .iter()
            .position(|n| n.flowchart_id == flowchart_id)
    }

    /// Unit models in chain order.
    pub fn units_in_order(&self) -> Option<Vec<&UnitModel>> {
        self.chain()?
            .into_iter()
            .map(|n| self.units.get(&n.flowchart_id))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    UnitModel,
    CompoundModel,
    Method,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::UnitModel => "unit-model",
            EntityKind::CompoundModel => "compound-model",
            EntityKind::Method => "method",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        [EntityKind::UnitModel, EntityKind::CompoundModel, EntityKind::Method]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Entity {
    Unit(UnitModel),
    Compound(CompoundModel),
    Method(Method),
}

impl Entity {
    pub fn kind(&self) -> EntityKind {
        match self {
            Entity::Unit(_) => EntityKind::UnitModel,
            Entity::Compound(_) => EntityKind::CompoundModel,
            Entity::Method(_) => EntityKind::Method,
        }
    }

    /// Every method carried by the entity: the embedded one for unit models,
    /// the global one followed by per-unit methods for compound models.
    pub fn methods(&self) -> Vec<&Method> {
        match self {
            Entity::Unit(u) => u.method.iter().collect(),
            Entity::Compound(c) => std::iter::once(&c.method)
                .chain(c.units.values().filter_map(|u| u.method.as_ref()))
                .collect(),
            Entity::Method(m) => vec![m],
        }
    }

    /// Unit models contained in the entity.
    pub fn unit_models(&self) -> Vec<&UnitModel> {
        match self {
            Entity::Unit(u) => vec![u],
            Entity::Compound(c) => c.units.values().collect(),
            Entity::Method(_) => Vec::new(),
        }
    }
}

impl From<UnitModel> for Entity {
    fn from(u: UnitModel) -> Self {
        Entity::Unit(u)
    }
}

impl From<CompoundModel> for Entity {
    fn from(c: CompoundModel) -> Self {
        Entity::Compound(c)
    }
}

impl From<Method> for Entity {
    fn from(m: Method) -> Self {
        Entity::Method(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkflowUnitType {
    Execution,
    Io,
    Conditional,
    Other,
}

/// The part of a workflow unit that model interoperation needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WorkflowUnitStub {
    pub id: String,
    #[serde(rename = "type")]
    pub unit_type: WorkflowUnitType,
    pub application: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flavor_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    APriori,
    #[default]
    APosteriori,
}

/// A property produced by one node of a compound model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropertyRecord {
    pub name: String,
    pub source_flowchart_id: String,
    pub source_workflow_unit_id: String,
    pub order: usize,
    #[serde(default)]
    pub kind: PropertyKind,
}
