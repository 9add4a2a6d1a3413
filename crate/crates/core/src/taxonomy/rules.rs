//! Classification rules as feature-predicate conjunctions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{TaxonomyError, TaxonomyTree};
use crate::entity::validate::{Rule, Violation};
use crate::entity::CategoryPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    PhysicsBased,
    DataDriven,
    ElectronicCoordinatesOrWavefunction,
    FirstPrinciplesWavefunction,
    DensityFunctional,
    ValenceOnlyOrParametrizedIntegrals,
    AtomicCoordinatesOnly,
    ConflatedParticles,
    Randomness,
    Deterministic,
    LinearCombination,
    NeuralNetwork,
    DecisionTree,
}

impl Feature {
    pub const ALL: [Feature; 13] = [
        Feature::PhysicsBased,
        Feature::DataDriven,
        Feature::ElectronicCoordinatesOrWavefunction,
        Feature::FirstPrinciplesWavefunction,
        Feature::DensityFunctional,
        Feature::ValenceOnlyOrParametrizedIntegrals,
        Feature::AtomicCoordinatesOnly,
        Feature::ConflatedParticles,
        Feature::Randomness,
        Feature::Deterministic,
        Feature::LinearCombination,
        Feature::NeuralNetwork,
        Feature::DecisionTree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::PhysicsBased => "physics-based",
            Feature::DataDriven => "data-driven",
            Feature::ElectronicCoordinatesOrWavefunction => "electronic-coordinates-or-wavefunction",
            Feature::FirstPrinciplesWavefunction => "first-principles-wavefunction",
            Feature::DensityFunctional => "density-functional",
            Feature::ValenceOnlyOrParametrizedIntegrals => "valence-only-or-parametrized-integrals",
            Feature::AtomicCoordinatesOnly => "atomic-coordinates-only",
            Feature::ConflatedParticles => "conflated-particles",
            Feature::Randomness => "randomness",
            Feature::Deterministic => "deterministic",
            Feature::LinearCombination => "linear-combination",
            Feature::NeuralNetwork => "neural-network",
            Feature::DecisionTree => "decision-tree",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown model feature `{s}`"))
    }
}

/// A feature together with whether it holds for the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelFeature {
    pub feature: Feature,
    pub asserted: bool,
}

impl ModelFeature {
    pub fn yes(feature: Feature) -> Self {
        Self {
            feature,
            asserted: true,
        }
    }

    pub fn no(feature: Feature) -> Self {
        Self {
            feature,
            asserted: false,
        }
    }
}

impl From<Feature> for ModelFeature {
    fn from(feature: Feature) -> Self {
        ModelFeature::yes(feature)
    }
}

/// Pairs that cannot both hold for one model.
const EXCLUSIVE: &[(Feature, Feature)] = &[
    (Feature::PhysicsBased, Feature::DataDriven),
    (Feature::Randomness, Feature::Deterministic),
    (
        Feature::ElectronicCoordinatesOrWavefunction,
        Feature::AtomicCoordinatesOnly,
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationRule {
    pub rule_id: &'static str,
    pub target: &'static str,
    /// Conjunction; `(f, false)` requires `f` not to hold.
    pub predicate: &'static [(Feature, bool)],
    pub description: &'static str,
}

impl ClassificationRule {
    pub fn target_path(&self) -> CategoryPath {
        CategoryPath::parse(self.target).expect("rule targets are well-formed")
    }

    pub fn depth(&self) -> usize {
        self.rule_id.split('.').count()
    }

    pub fn parent_id(&self) -> Option<&'static str> {
        self.rule_id.rfind('.').map(|i| &self.rule_id[..i])
    }

    fn holds(&self, asserted: &BTreeMap<Feature, bool>) -> bool {
        self.predicate
            .iter()
            .all(|(f, want)| asserted.get(f).copied().unwrap_or(false) == *want)
    }

    fn mentions(&self, feature: Feature) -> bool {
        self.predicate.iter().any(|(f, want)| *f == feature && *want)
    }
}

use Feature::*;

const RULES: &[ClassificationRule] = &[
    ClassificationRule {
        rule_id: "1",
        target: "pb",
        predicate: &[(PhysicsBased, true)],
        description: "grounded in physical laws",
    },
    ClassificationRule {
        rule_id: "1.1",
        target: "pb/qm",
        predicate: &[(ElectronicCoordinatesOrWavefunction, true)],
        description: "electronic degrees of freedom or an electronic/nuclear wavefunction",
    },
    ClassificationRule {
        rule_id: "1.1.1",
        target: "pb/qm/abin",
        predicate: &[(FirstPrinciplesWavefunction, true)],
        description: "first-principles wavefunction approximation",
    },
    ClassificationRule {
        rule_id: "1.1.2",
        target: "pb/qm/dft",
        predicate: &[(DensityFunctional, true)],
        description: "density functional theory",
    },
    ClassificationRule {
        rule_id: "1.1.3",
        target: "pb/qm/semp",
        predicate: &[(ValenceOnlyOrParametrizedIntegrals, true)],
        description: "explicit valence electrons only or parametrized two-electron integrals",
    },
    ClassificationRule {
        rule_id: "1.2",
        target: "pb/at",
        predicate: &[
            (AtomicCoordinatesOnly, true),
            (ElectronicCoordinatesOrWavefunction, false),
        ],
        description: "nuclear coordinates only, no wavefunction",
    },
    ClassificationRule {
        rule_id: "1.3",
        target: "pb/mes",
        predicate: &[(ConflatedParticles, true)],
        description: "coarse-grained particle representation",
    },
    ClassificationRule {
        rule_id: "2",
        target: "st",
        predicate: &[(DataDriven, true)],
        description: "predictions derived from data",
    },
    ClassificationRule {
        rule_id: "2.1",
        target: "st/prob",
        predicate: &[(Randomness, true)],
        description: "random variation in the prediction",
    },
    ClassificationRule {
        rule_id: "2.2",
        target: "st/det",
        predicate: &[(Deterministic, true), (Randomness, false)],
        description: "same prediction for the same input",
    },
    ClassificationRule {
        rule_id: "2.2.1",
        target: "st/det/lin",
        predicate: &[(LinearCombination, true)],
        description: "linear combination of features or kernels",
    },
    ClassificationRule {
        rule_id: "2.2.2",
        target: "st/det/nn",
        predicate: &[(NeuralNetwork, true)],
        description: "neural network architecture",
    },
    ClassificationRule {
        rule_id: "2.2.3",
        target: "st/det/dtr",
        predicate: &[(DecisionTree, true)],
        description: "decision trees",
    },
];

pub fn rules() -> &'static [ClassificationRule] {
    RULES
}

/// The rule whose target is exactly `path`, if any.
pub fn rule_for(path: &CategoryPath) -> Option<&'static ClassificationRule> {
    let key = path.key();
    RULES.iter().find(|r| r.target == key)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("contradictory features: {0}")]
    Contradiction(String),
    #[error("ambiguous classification: {}", candidates.join(", "))]
    Ambiguity { candidates: Vec<String> },
    #[error("no classification rule matches")]
    NoMatch,
}

fn feature_map(features: &[ModelFeature]) -> Result<BTreeMap<Feature, bool>, ClassifyError> {
    let mut map = BTreeMap::new();
    for mf in features {
        if let Some(prev) = map.insert(mf.feature, mf.asserted) {
            if prev != mf.asserted {
                return Err(ClassifyError::Contradiction(format!(
                    "`{}` both asserted and denied",
                    mf.feature
                )));
            }
        }
    }
    for (a, b) in EXCLUSIVE {
        if map.get(a) == Some(&true) && map.get(b) == Some(&true) {
            return Err(ClassifyError::Contradiction(format!("`{a}` and `{b}`")));
        }
    }
    Ok(map)
}

fn children_of(parent: Option<&str>) -> impl Iterator<Item = &'static ClassificationRule> + '_ {
    RULES.iter().filter(move |r| r.parent_id() == parent)
}

/// Follows the rule chain as deep as it is satisfied.
///
/// Refuses to pick between satisfied siblings, and treats a feature that only
/// appears in rules off the resulting chain as a contradiction: the caller is
/// expected to drop features that do not reflect the model's objective.
pub fn classify(features: &[ModelFeature]) -> Result<CategoryPath, ClassifyError> {
    let asserted = feature_map(features)?;
    let mut chain: Vec<&ClassificationRule> = Vec::new();
    loop {
        let parent = chain.last().map(|r| r.rule_id);
        let matched: Vec<&ClassificationRule> =
            children_of(parent).filter(|r| r.holds(&asserted)).collect();
        match matched.as_slice() {
            [] => break,
            [one] => chain.push(one),
            many => {
                return Err(ClassifyError::Ambiguity {
                    candidates: many.iter().map(|r| r.target.to_string()).collect(),
                })
            }
        }
    }
    let Some(last) = chain.last() else {
        return Err(ClassifyError::NoMatch);
    };
    for (&feature, &on) in &asserted {
        if !on || chain.iter().any(|r| r.mentions(feature)) {
            continue;
        }
        if let Some(stray) = RULES.iter().find(|r| r.mentions(feature)) {
            return Err(ClassifyError::Contradiction(format!(
                "`{feature}` belongs to rule {} ({}), outside the matched branch {}",
                stray.rule_id, stray.target, last.target
            )));
        }
    }
    Ok(last.target_path())
}

/// Checks the rule at every tier level of `path` against the features.
pub fn audit_category_path(
    tree: &TaxonomyTree,
    path: &CategoryPath,
    features: &[ModelFeature],
) -> Result<Vec<Violation>, TaxonomyError> {
    if let Some(level) = tree.first_unknown(path) {
        return Err(TaxonomyError::UnknownCategory(
            path.prefix(level).expect("level within depth").key(),
        ));
    }
    let asserted: BTreeMap<Feature, bool> = features
        .iter()
        .map(|mf| (mf.feature, mf.asserted))
        .collect();
    let mut out = Vec::new();
    for prefix in path.prefixes() {
        let Some(rule) = rule_for(&prefix) else {
            continue;
        };
        if !rule.holds(&asserted) {
            let unmet: Vec<String> = rule
                .predicate
                .iter()
                .filter(|(f, want)| asserted.get(f).copied().unwrap_or(false) != *want)
                .map(|(f, want)| if *want { f.to_string() } else { format!("not {f}") })
                .collect();
            out.push(Violation::new(
                format!("/categories/{}", crate::entity::LEVEL_KEYS[prefix.depth() - 1]),
                Rule::ClassificationRule,
                format!(
                    "rule {} ({}) not satisfied: {} requires {}",
                    rule.rule_id,
                    rule.description,
                    rule.target,
                    unmet.join(", ")
                ),
            ));
        }
    }
    Ok(out)
}
