//! JSON document format: parsing into typed entities and canonical output.
//!
//! Canonical output lists schema keys in a fixed order followed by extras in
//! lexicographic order, without insignificant whitespace. Optional keys are
//! omitted rather than written as `null`; `_id` is accepted on input and
//! never written.

use serde_json::{Map, Number, Value};
use thiserror::Error;

use super::{
    Category, CategoryPath, ComponentType, CompoundModel, Entity, EntityKind, Extras, Functional,
    FunctionalComponent, Method, MethodData, MethodParameter, ModelGraphNode, ParameterValue,
    RangeKind, Scalar, UnitModel, LEVEL_KEYS,
};

/// Database key that is not part of the data structure.
pub const RESERVED_ID_KEY: &str = "_id";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocumentError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

impl DocumentError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocumentError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            DocumentError::Schema { path, .. } => Some(path),
            DocumentError::Syntax { .. } => None,
        }
    }
}

type Result<T> = std::result::Result<T, DocumentError>;

/// Escapes a key for use as a JSON pointer segment.
pub fn pointer_segment(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn join(path: &str, key: &str) -> String {
    format!("{path}/{}", pointer_segment(key))
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Recursively sorts object keys so that extras serialize canonically.
pub fn canonicalize_value(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(
                entries
                    .into_iter()
                    .map(|(k, v)| (k, canonicalize_value(v)))
                    .collect(),
            )
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize_value).collect()),
        other => other,
    }
}

/// Consumes keys of one JSON object, tracking the pointer path for errors.
struct Reader {
    map: Map<String, Value>,
    path: String,
}

impl Reader {
    fn new(value: Value, path: &str) -> Result<Self> {
        match value {
            Value::Object(map) => Ok(Self {
                map,
                path: path.to_string(),
            }),
            other => Err(DocumentError::schema(
                if path.is_empty() { "/" } else { path },
                format!("expected object, found {}", kind_name(&other)),
            )),
        }
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn take(&mut self, key: &str) -> Result<Option<Value>> {
        match self.map.shift_remove(key) {
            Some(Value::Null) => Err(DocumentError::schema(
                self.at(key),
                "null is not permitted; omit the key instead",
            )),
            other => Ok(other),
        }
    }

    fn require(&mut self, key: &str) -> Result<Value> {
        self.take(key)?
            .ok_or_else(|| DocumentError::schema(self.at(key), "missing required field"))
    }

    fn string(&mut self, key: &str) -> Result<String> {
        let v = self.require(key)?;
        self.as_string(key, v)
    }

    fn opt_string(&mut self, key: &str) -> Result<Option<String>> {
        self.take(key)?.map(|v| self.as_string(key, v)).transpose()
    }

    fn as_string(&self, key: &str, v: Value) -> Result<String> {
        match v {
            Value::String(s) => Ok(s),
            other => Err(DocumentError::schema(
                self.at(key),
                format!("expected string, found {}", kind_name(&other)),
            )),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<bool> {
        match self.require(key)? {
            Value::Bool(b) => Ok(b),
            other => Err(DocumentError::schema(
                self.at(key),
                format!("expected boolean, found {}", kind_name(&other)),
            )),
        }
    }

    fn number(&self, key: &str, v: Value) -> Result<f64> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| DocumentError::schema(self.at(key), "number out of range")),
            other => Err(DocumentError::schema(
                self.at(key),
                format!("expected number, found {}", kind_name(&other)),
            )),
        }
    }

    fn string_list(&mut self, key: &str) -> Result<Vec<String>> {
        let Some(v) = self.take(key)? else {
            return Ok(Vec::new());
        };
        let path = self.at(key);
        match v {
            Value::Array(items) => items
                .into_iter()
                .enumerate()
                .map(|(i, item)| match item {
                    Value::String(s) => Ok(s),
                    other => Err(DocumentError::schema(
                        format!("{path}/{i}"),
                        format!("expected string, found {}", kind_name(&other)),
                    )),
                })
                .collect(),
            other => Err(DocumentError::schema(
                path,
                format!("expected array, found {}", kind_name(&other)),
            )),
        }
    }

    fn array(&mut self, key: &str) -> Result<Vec<Value>> {
        match self.require(key)? {
            Value::Array(items) => Ok(items),
            other => Err(DocumentError::schema(
                self.at(key),
                format!("expected array, found {}", kind_name(&other)),
            )),
        }
    }

    fn object(&mut self, key: &str) -> Result<Reader> {
        let v = self.require(key)?;
        Reader::new(v, &self.at(key))
    }

    fn opt_object(&mut self, key: &str) -> Result<Option<Reader>> {
        let path = self.at(key);
        self.take(key)?.map(|v| Reader::new(v, &path)).transpose()
    }

    fn discard_id(&mut self) {
        self.map.shift_remove(RESERVED_ID_KEY);
    }

    /// Whatever was not consumed becomes extras.
    fn finish(self) -> Extras {
        self.map
            .into_iter()
            .map(|(k, v)| (k, canonicalize_value(v)))
            .collect()
    }
}

/// Parses raw bytes into the requested entity kind.
pub fn parse_document(raw: &[u8], kind: EntityKind) -> Result<Entity> {
    let value = parse_json(raw)?;
    entity_from_value(value, kind)
}

/// Parses raw bytes, inferring the entity kind from the top-level keys.
pub fn parse_any(raw: &[u8]) -> Result<Entity> {
    let value = parse_json(raw)?;
    let kind = detect_kind(&value)?;
    entity_from_value(value, kind)
}

pub fn parse_unit_model(raw: &[u8]) -> Result<UnitModel> {
    match parse_document(raw, EntityKind::UnitModel)? {
        Entity::Unit(u) => Ok(u),
        _ => unreachable!(),
    }
}

pub fn parse_compound_model(raw: &[u8]) -> Result<CompoundModel> {
    match parse_document(raw, EntityKind::CompoundModel)? {
        Entity::Compound(c) => Ok(c),
        _ => unreachable!(),
    }
}

pub fn parse_method(raw: &[u8]) -> Result<Method> {
    match parse_document(raw, EntityKind::Method)? {
        Entity::Method(m) => Ok(m),
        _ => unreachable!(),
    }
}

fn parse_json(raw: &[u8]) -> Result<Value> {
    serde_json::from_slice(raw).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Infers the entity kind: `modelGraph` marks a compound model,
/// `categories` a unit model, `type` + `subtype` a method.
pub fn detect_kind(value: &Value) -> Result<EntityKind> {
    let Value::Object(map) = value else {
        return Err(DocumentError::schema(
            "/",
            format!("expected object, found {}", kind_name(value)),
        ));
    };
    if map.contains_key("modelGraph") {
        Ok(EntityKind::CompoundModel)
    } else if map.contains_key("categories") {
        Ok(EntityKind::UnitModel)
    } else if map.contains_key("type") && map.contains_key("subtype") {
        Ok(EntityKind::Method)
    } else {
        Err(DocumentError::schema(
            "/",
            "cannot determine entity kind (expected `modelGraph`, `categories` or `type`/`subtype`)",
        ))
    }
}

pub fn entity_from_value(value: Value, kind: EntityKind) -> Result<Entity> {
    Ok(match kind {
        EntityKind::UnitModel => Entity::Unit(read_unit_model(Reader::new(value, "")?)?),
        EntityKind::CompoundModel => {
            Entity::Compound(read_compound_model(Reader::new(value, "")?)?)
        }
        EntityKind::Method => Entity::Method(read_method(Reader::new(value, "")?)?),
    })
}

fn read_category(mut r: Reader) -> Result<Category> {
    Ok(Category {
        name: r.string("name")?,
        slug: r.string("slug")?,
        extras: r.finish(),
    })
}

fn read_categories(mut r: Reader) -> Result<CategoryPath> {
    let mut levels = Vec::new();
    let mut gap: Option<&str> = None;
    for key in LEVEL_KEYS {
        match r.opt_object(key)? {
            Some(level) => {
                if let Some(missing) = gap {
                    return Err(DocumentError::schema(
                        r.at(key),
                        format!("`{key}` present without `{missing}`"),
                    ));
                }
                levels.push(read_category(level)?);
            }
            None => {
                gap.get_or_insert(key);
            }
        }
    }
    if levels.is_empty() {
        return Err(DocumentError::schema(r.at("tier1"), "missing required field"));
    }
    if let Some(extra) = r.map.keys().next() {
        return Err(DocumentError::schema(
            r.at(extra),
            "unknown categorization level",
        ));
    }
    CategoryPath::new(levels).map_err(|e| DocumentError::schema(r.path.clone(), e.to_string()))
}

fn read_component(mut r: Reader) -> Result<FunctionalComponent> {
    let name = r.string("name")?;
    let slug = r.string("slug")?;
    let type_token = r.string("type")?;
    let component_type = ComponentType::from_token(&type_token).ok_or_else(|| {
        DocumentError::schema(
            r.at("type"),
            format!("unknown functional component type `{type_token}`"),
        )
    })?;
    let fraction = {
        let v = r.require("fraction")?;
        r.number("fraction", v)?
    };
    let range_kind = match r.opt_string("rangeKind")? {
        Some(token) => Some(RangeKind::from_token(&token).ok_or_else(|| {
            DocumentError::schema(r.at("rangeKind"), format!("unknown range kind `{token}`"))
        })?),
        None => None,
    };
    let screening_parameter = r
        .take("screeningParameter")?
        .map(|v| r.number("screeningParameter", v))
        .transpose()?;
    Ok(FunctionalComponent {
        name,
        slug,
        component_type,
        fraction,
        range_kind,
        screening_parameter,
        extras: r.finish(),
    })
}

fn read_functional(mut r: Reader) -> Result<Functional> {
    let name = r.string("name")?;
    let slug = r.string("slug")?;
    let components_path = r.at("components");
    let components = r
        .array("components")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| read_component(Reader::new(v, &format!("{components_path}/{i}"))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Functional {
        name,
        slug,
        components,
        extras: r.finish(),
    })
}

fn read_scalar(v: &Value) -> Option<Scalar> {
    let Value::Number(n) = v else { return None };
    if let Some(i) = n.as_i64() {
        Some(Scalar::Int(i))
    } else {
        n.as_f64().map(Scalar::Float)
    }
}

pub(crate) fn read_parameter_value(v: Value, path: &str) -> Result<ParameterValue> {
    match v {
        Value::Number(_) => Ok(ParameterValue::Number(read_scalar(&v).ok_or_else(|| {
            DocumentError::schema(path, "number out of range")
        })?)),
        Value::String(s) => Ok(ParameterValue::Text(s)),
        Value::Bool(b) => Ok(ParameterValue::Bool(b)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                read_scalar(item).ok_or_else(|| {
                    DocumentError::schema(
                        format!("{path}/{i}"),
                        format!("expected number in list, found {}", kind_name(item)),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(ParameterValue::List),
        other => Err(DocumentError::schema(
            path,
            format!(
                "expected number, string, boolean or list of numbers, found {}",
                kind_name(&other)
            ),
        )),
    }
}

fn read_parameter(mut r: Reader) -> Result<MethodParameter> {
    let key = r.string("key")?;
    let value_path = r.at("value");
    let value = read_parameter_value(r.require("value")?, &value_path)?;
    Ok(MethodParameter {
        key,
        value,
        categories: r.string_list("categories")?,
        unit: r.opt_string("unit")?,
        extras: r.finish(),
    })
}

fn read_method(mut r: Reader) -> Result<Method> {
    r.discard_id();
    let method_type = r.string("type")?;
    let subtype = r.string("subtype")?;
    let parameters = match r.take("parameters")? {
        Some(v) => {
            let path = r.at("parameters");
            match v {
                Value::Array(items) => items
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| read_parameter(Reader::new(v, &format!("{path}/{i}"))?))
                    .collect::<Result<Vec<_>>>()?,
                other => {
                    return Err(DocumentError::schema(
                        path,
                        format!("expected array, found {}", kind_name(&other)),
                    ))
                }
            }
        }
        None => Vec::new(),
    };
    let precision = r.string_list("precision")?;
    let data = match r.opt_object("data")? {
        Some(mut d) => MethodData {
            search_text: d.opt_string("searchText")?,
            entries: d.finish(),
        },
        None => MethodData::default(),
    };
    Ok(Method {
        method_type,
        subtype,
        parameters,
        precision,
        data,
        extras: r.finish(),
    })
}

fn read_unit_model(mut r: Reader) -> Result<UnitModel> {
    r.discard_id();
    let categories = read_categories(r.object("categories")?)?;
    let name = r.string("name")?;
    let slug = r.string("slug")?;
    let flowchart_id = r.string("flowchartId")?;
    let tags = r.string_list("tags")?;
    let augmentations = r.string_list("augmentations")?;
    let modifiers = r.string_list("modifiers")?;
    let references = r.string_list("references")?;
    let functional = r.opt_object("functional")?.map(read_functional).transpose()?;
    let method = r.opt_object("method")?.map(read_method).transpose()?;
    Ok(UnitModel {
        categories,
        name,
        slug,
        flowchart_id,
        tags,
        augmentations,
        modifiers,
        references,
        functional,
        method,
        extras: r.finish(),
    })
}

fn read_node(mut r: Reader) -> Result<ModelGraphNode> {
    Ok(ModelGraphNode {
        flowchart_id: r.string("flowchartId")?,
        name: r.string("name")?,
        slug: r.string("slug")?,
        head: r.boolean("head")?,
        next: r.opt_string("next")?,
        workflow_unit_id: r.string("workflowUnitId")?,
        extras: r.finish(),
    })
}

fn read_compound_model(mut r: Reader) -> Result<CompoundModel> {
    r.discard_id();
    let graph_path = r.at("modelGraph");
    let model_graph = r
        .array("modelGraph")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| read_node(Reader::new(v, &format!("{graph_path}/{i}"))?))
        .collect::<Result<Vec<_>>>()?;
    let method = read_method(r.object("method")?)?;
    let mut units_reader = r.object("units")?;
    let keys: Vec<String> = units_reader.map.keys().cloned().collect();
    let mut units = std::collections::BTreeMap::new();
    for key in keys {
        let unit = read_unit_model(units_reader.object(&key)?)?;
        units.insert(key, unit);
    }
    Ok(CompoundModel {
        model_graph,
        method,
        units,
        extras: r.finish(),
    })
}

/// Canonical bytes of an entity.
pub fn serialize_document(entity: &Entity) -> Vec<u8> {
    serde_json::to_vec(&to_value(entity)).expect("serializing a JSON value cannot fail")
}

/// Indented rendering with the same key order as the canonical form.
pub fn serialize_pretty(entity: &Entity) -> String {
    serde_json::to_string_pretty(&to_value(entity)).expect("serializing a JSON value cannot fail")
}

pub fn to_value(entity: &Entity) -> Value {
    match entity {
        Entity::Unit(u) => unit_model_value(u),
        Entity::Compound(c) => compound_model_value(c),
        Entity::Method(m) => method_value(m),
    }
}

fn string_list(items: &[String]) -> Value {
    Value::Array(items.iter().cloned().map(Value::String).collect())
}

fn append_extras(map: &mut Map<String, Value>, extras: &Extras) {
    for (k, v) in extras {
        map.insert(k.clone(), v.clone());
    }
}

pub(crate) fn f64_value(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn scalar_value(s: Scalar) -> Value {
    match s {
        Scalar::Int(i) => Value::from(i),
        Scalar::Float(f) => f64_value(f),
    }
}

pub(crate) fn parameter_value(v: &ParameterValue) -> Value {
    match v {
        ParameterValue::Number(s) => scalar_value(*s),
        ParameterValue::Text(s) => Value::String(s.clone()),
        ParameterValue::Bool(b) => Value::Bool(*b),
        ParameterValue::List(items) => Value::Array(items.iter().copied().map(scalar_value).collect()),
    }
}

fn category_value(c: &Category) -> Value {
    let mut map = Map::new();
    map.insert("name".into(), Value::String(c.name.clone()));
    map.insert("slug".into(), Value::String(c.slug.clone()));
    append_extras(&mut map, &c.extras);
    Value::Object(map)
}

fn categories_value(path: &CategoryPath) -> Value {
    let map = LEVEL_KEYS
        .iter()
        .zip(path.levels())
        .map(|(k, c)| (k.to_string(), category_value(c)))
        .collect();
    Value::Object(map)
}

fn component_value(c: &FunctionalComponent) -> Value {
    let mut map = Map::new();
    map.insert("name".into(), Value::String(c.name.clone()));
    map.insert("slug".into(), Value::String(c.slug.clone()));
    map.insert("type".into(), Value::String(c.component_type.as_str().into()));
    map.insert("fraction".into(), f64_value(c.fraction));
    if let Some(kind) = c.range_kind {
        map.insert("rangeKind".into(), Value::String(kind.as_str().into()));
    }
    if let Some(w) = c.screening_parameter {
        map.insert("screeningParameter".into(), f64_value(w));
    }
    append_extras(&mut map, &c.extras);
    Value::Object(map)
}

fn functional_value(f: &Functional) -> Value {
    let mut map = Map::new();
    map.insert("name".into(), Value::String(f.name.clone()));
    map.insert("slug".into(), Value::String(f.slug.clone()));
    map.insert(
        "components".into(),
        Value::Array(f.components.iter().map(component_value).collect()),
    );
    append_extras(&mut map, &f.extras);
    Value::Object(map)
}

fn parameter_object(p: &MethodParameter) -> Value {
    let mut map = Map::new();
    map.insert("key".into(), Value::String(p.key.clone()));
    map.insert("value".into(), parameter_value(&p.value));
    map.insert("categories".into(), string_list(&p.categories));
    if let Some(unit) = &p.unit {
        map.insert("unit".into(), Value::String(unit.clone()));
    }
    append_extras(&mut map, &p.extras);
    Value::Object(map)
}

pub fn method_value(m: &Method) -> Value {
    let mut map = Map::new();
    map.insert("type".into(), Value::String(m.method_type.clone()));
    map.insert("subtype".into(), Value::String(m.subtype.clone()));
    map.insert(
        "parameters".into(),
        Value::Array(m.parameters.iter().map(parameter_object).collect()),
    );
    map.insert("precision".into(), string_list(&m.precision));
    let mut data = Map::new();
    if let Some(text) = &m.data.search_text {
        data.insert("searchText".into(), Value::String(text.clone()));
    }
    append_extras(&mut data, &m.data.entries);
    map.insert("data".into(), Value::Object(data));
    append_extras(&mut map, &m.extras);
    Value::Object(map)
}

pub fn unit_model_value(u: &UnitModel) -> Value {
    let mut map = Map::new();
    map.insert("categories".into(), categories_value(&u.categories));
    map.insert("name".into(), Value::String(u.name.clone()));
    map.insert("slug".into(), Value::String(u.slug.clone()));
    map.insert("flowchartId".into(), Value::String(u.flowchart_id.clone()));
    map.insert("tags".into(), string_list(&u.tags));
    map.insert("augmentations".into(), string_list(&u.augmentations));
    map.insert("modifiers".into(), string_list(&u.modifiers));
    map.insert("references".into(), string_list(&u.references));
    if let Some(f) = &u.functional {
        map.insert("functional".into(), functional_value(f));
    }
    if let Some(m) = &u.method {
        map.insert("method".into(), method_value(m));
    }
    append_extras(&mut map, &u.extras);
    Value::Object(map)
}

fn node_value(n: &ModelGraphNode) -> Value {
    let mut map = Map::new();
    map.insert("flowchartId".into(), Value::String(n.flowchart_id.clone()));
    map.insert("name".into(), Value::String(n.name.clone()));
    map.insert("slug".into(), Value::String(n.slug.clone()));
    map.insert("head".into(), Value::Bool(n.head));
    if let Some(next) = &n.next {
        map.insert("next".into(), Value::String(next.clone()));
    }
    map.insert(
        "workflowUnitId".into(),
        Value::String(n.workflow_unit_id.clone()),
    );
    append_extras(&mut map, &n.extras);
    Value::Object(map)
}

pub fn compound_model_value(c: &CompoundModel) -> Value {
    let mut map = Map::new();
    map.insert(
        "modelGraph".into(),
        Value::Array(c.model_graph.iter().map(node_value).collect()),
    );
    map.insert("method".into(), method_value(&c.method));
    let units = c
        .units
        .iter()
        .map(|(k, u)| (k.clone(), unit_model_value(u)))
        .collect();
    map.insert("units".into(), Value::Object(units));
    append_extras(&mut map, &c.extras);
    Value::Object(map)
}
