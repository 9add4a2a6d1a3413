//! Controlled tag vocabulary and tag scoping.

use crate::entity::validate::{Rule, Violation};
use crate::entity::{CategoryPath, TagDescriptor, TagKind, TagScope, UnitModel};

/// Stem of the parameterized `scaling-power:<n>` label.
pub const SCALING_POWER_STEM: &str = "scaling-power";

/// A controlled tag and the category at which it becomes applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabularyEntry {
    /// Label as written on a model; `scaling-power` stands for every
    /// `scaling-power:<n>`.
    pub label: &'static str,
    pub scope: &'static str,
    pub description: &'static str,
}

const VOCABULARY: &[VocabularyEntry] = &[
    VocabularyEntry {
        label: "relativistic",
        scope: "pb",
        description: "relativistic effects included",
    },
    VocabularyEntry {
        label: "user-adjustable",
        scope: "pb",
        description: "extra parameters for fine-tuning",
    },
    VocabularyEntry {
        label: SCALING_POWER_STEM,
        scope: "pb",
        description: "formal scaling with the n-th power of system size",
    },
    VocabularyEntry {
        label: "self-consistent",
        scope: "pb/qm",
        description: "non-linearity solved by self-consistent iteration",
    },
    VocabularyEntry {
        label: "temperature",
        scope: "pb/qm",
        description: "finite-temperature effects",
    },
    VocabularyEntry {
        label: "excited-states",
        scope: "pb/qm",
        description: "electronically excited states accessible",
    },
    VocabularyEntry {
        label: "spin-orbit-coupling",
        scope: "pb/qm",
        description: "spin-orbit coupling included",
    },
    VocabularyEntry {
        label: "variational",
        scope: "pb/qm",
        description: "obeys the variational principle",
    },
    VocabularyEntry {
        label: "single-reference",
        scope: "pb/qm",
        description: "single reference determinant",
    },
    VocabularyEntry {
        label: "multi-reference",
        scope: "pb/qm",
        description: "multiple reference determinants",
    },
    VocabularyEntry {
        label: "perturbative",
        scope: "pb/qm/abin",
        description: "contains perturbation-theory elements",
    },
];

pub fn vocabulary() -> &'static [VocabularyEntry] {
    VOCABULARY
}

fn scope_path(key: &str) -> CategoryPath {
    CategoryPath::parse(key).expect("vocabulary scopes are well-formed")
}

/// Describes a tag label: controlled labels get their scope, anything else is
/// a user label applicable everywhere.
///
/// A `scaling-power` label whose suffix is not a non-negative integer still
/// maps to the controlled entry, with `parameter` left empty;
/// [`validate_tags`] reports it.
pub fn tag_scope(label: &str) -> TagDescriptor {
    let (stem, parameter) = match label.split_once(':') {
        Some((stem, arg)) if stem == SCALING_POWER_STEM => (stem, arg.parse::<u32>().ok()),
        Some(_) => (label, None),
        None => (label, None),
    };
    match VOCABULARY.iter().find(|e| e.label == stem) {
        Some(entry) => TagDescriptor {
            label: label.to_string(),
            scope: TagScope::Path(scope_path(entry.scope)),
            kind: TagKind::Attribute,
            parameter,
        },
        None => TagDescriptor {
            label: label.to_string(),
            scope: TagScope::Universal,
            kind: TagKind::User,
            parameter: None,
        },
    }
}

/// All descriptors attached to a model: its tags plus its modifier and
/// augmentation markers.
pub fn descriptors(model: &UnitModel) -> Vec<TagDescriptor> {
    let marker = |label: &String, kind| TagDescriptor {
        label: label.clone(),
        scope: TagScope::Universal,
        kind,
        parameter: None,
    };
    model
        .tags
        .iter()
        .map(|t| tag_scope(t))
        .chain(model.modifiers.iter().map(|m| marker(m, TagKind::Modifier)))
        .chain(
            model
                .augmentations
                .iter()
                .map(|a| marker(a, TagKind::Augmentation)),
        )
        .collect()
}

/// One violation per controlled tag whose scope does not contain the model's
/// category path, plus malformed `scaling-power` labels.
pub fn validate_tags(model: &UnitModel) -> Vec<Violation> {
    validate_tags_at(model, "")
}

pub(crate) fn validate_tags_at(model: &UnitModel, base: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, label) in model.tags.iter().enumerate() {
        let d = tag_scope(label);
        let path = format!("{base}/tags/{i}");
        if d.kind == TagKind::User {
            continue;
        }
        let stem = label.split(':').next().unwrap_or_default();
        if stem == SCALING_POWER_STEM && d.parameter.is_none() {
            out.push(Violation::new(
                path.clone(),
                Rule::TagParameter,
                format!("`{label}` must have the form {SCALING_POWER_STEM}:<integer>"),
            ));
        }
        if !d.scope.admits(&model.categories) {
            out.push(Violation::new(
                path,
                Rule::TagScope,
                format!(
                    "tag `{label}` applies to {} but the model is categorized as {}",
                    d.scope, model.categories
                ),
            ));
        }
    }
    out
}
