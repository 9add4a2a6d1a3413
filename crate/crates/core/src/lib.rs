//! Categorization, construction and bookkeeping of computational models.

pub mod builder;
pub mod entity;
pub mod fingerprint;
pub mod interop;
pub mod method;
pub mod registry;
pub mod taxonomy;
pub mod triples;

pub use entity::validate::{validate_entity, FractionProfile, Rule, Validator, Violation};
pub use entity::{CategoryPath, CompoundModel, Entity, EntityKind, Method, UnitModel};
pub use taxonomy::TaxonomyTree;
