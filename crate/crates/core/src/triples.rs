//! Export of entity documents as RDF triples (N-Triples).

use std::fmt;

use serde::Serialize;

use crate::entity::document::f64_value;
use crate::entity::{Entity, UnitModel, LEVEL_KEYS};

pub const DEFAULT_BASE_IRI: &str = "https://catecom.example.org/";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Object {
    Iri(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Object,
}

/// Escapes a literal for N-Triples; the result has no raw line breaks.
pub fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn escape_iri(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c.is_control() || matches!(c, ' ' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            out.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> ", escape_iri(&self.subject), escape_iri(&self.predicate))?;
        match &self.object {
            Object::Iri(i) => write!(f, "<{}> .", escape_iri(i)),
            Object::Literal(l) => write!(f, "\"{}\" .", escape_literal(l)),
        }
    }
}

struct Emitter<'a> {
    base: &'a str,
    out: Vec<Triple>,
}

impl Emitter<'_> {
    fn term(&self, t: &str) -> String {
        format!("{}{t}", self.base)
    }

    fn literal(&mut self, s: &str, p: &str, o: impl Into<String>) {
        let predicate = self.term(p);
        self.out.push(Triple {
            subject: s.to_string(),
            predicate,
            object: Object::Literal(o.into()),
        });
    }

    fn iri(&mut self, s: &str, p: &str, o: impl Into<String>) {
        let predicate = if p == "a" { RDF_TYPE.to_string() } else { self.term(p) };
        self.out.push(Triple {
            subject: s.to_string(),
            predicate,
            object: Object::Iri(o.into()),
        });
    }

    fn unit(&mut self, subject: &str, u: &UnitModel) {
        let class = self.term("UnitModel");
        self.iri(subject, "a", class);
        for (key, level) in LEVEL_KEYS.iter().zip(u.categories.levels()) {
            self.literal(subject, key, level.slug.clone());
        }
        for t in &u.tags {
            self.literal(subject, "tag", t.clone());
        }
        if let Some(f) = &u.functional {
            for c in &f.components {
                let component = format!("{subject}/functional/{}", c.slug);
                self.iri(subject, "functionalComponent", component.clone());
                self.literal(&component, "fraction", fraction_literal(c.fraction));
            }
        }
    }
}

fn fraction_literal(x: f64) -> String {
    f64_value(x).to_string()
}

/// Triples for one entity whose subject IRI is `<base><id>`.
///
/// Units of a compound model get `<base><id>/units/<flowchartId>` and are
/// linked in chain order.
pub fn export_triples(entity: &Entity, id: &str, base_iri: &str) -> Vec<Triple> {
    let mut e = Emitter {
        base: base_iri,
        out: Vec::new(),
    };
    let subject = format!("{base_iri}{id}");
    match entity {
        Entity::Unit(u) => e.unit(&subject, u),
        Entity::Compound(c) => {
            let class = e.term("CompoundModel");
            e.iri(&subject, "a", class);
            let order: Vec<&str> = match c.chain() {
                Some(chain) => chain.iter().map(|n| n.flowchart_id.as_str()).collect(),
                None => c.model_graph.iter().map(|n| n.flowchart_id.as_str()).collect(),
            };
            for (pos, fid) in order.into_iter().enumerate() {
                let Some(u) = c.units.get(fid) else { continue };
                let unit_subject = format!("{subject}/units/{fid}");
                e.iri(&subject, "unitModel", unit_subject.clone());
                e.literal(&unit_subject, "order", pos.to_string());
                e.unit(&unit_subject, u);
            }
        }
        Entity::Method(m) => {
            let class = e.term("Method");
            e.iri(&subject, "a", class);
            e.literal(&subject, "methodType", m.method_type.clone());
            e.literal(&subject, "methodSubtype", m.subtype.clone());
            for p in &m.precision {
                e.literal(&subject, "precisionParameter", p.clone());
            }
        }
    }
    e.out
}

pub fn to_ntriples(triples: &[Triple]) -> String {
    triples.iter().map(|t| format!("{t}\n")).collect()
}

/// Subject id used when none is given: the entity's own slug.
pub fn default_subject_id(entity: &Entity) -> String {
    match entity {
        Entity::Unit(u) => u.slug.clone(),
        Entity::Compound(c) => c
            .extras
            .get("slug")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .unwrap_or_else(|| "compound-model".into()),
        Entity::Method(m) => format!("{}-{}", m.method_type, m.subtype),
    }
}
