//! The categorization tree, the tag vocabulary and the rule engine.

mod rules;
pub(crate) mod tags;

pub use rules::{
    audit_category_path, classify, rule_for, rules, ClassificationRule, ClassifyError, Feature,
    ModelFeature,
};
pub use tags::{descriptors, tag_scope, validate_tags, vocabulary, VocabularyEntry, SCALING_POWER_STEM};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entity::{is_slug, Category, CategoryPath, PathError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("`{slug}` already exists under `{parent}`")]
    DuplicateSlug { parent: String, slug: String },
    #[error("node `{slug}` declares tier level {declared}, expected {expected}")]
    TierLevel {
        slug: String,
        declared: u8,
        expected: u8,
    },
    #[error("`{0}` is not a valid slug")]
    InvalidSlug(String),
    #[error("built-in category `{0}` cannot be removed")]
    BuiltinNode(String),
    #[error("category `{0}` still has children")]
    HasChildren(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// A node of the tree. Levels 1-3 are tiers, 4 is type and 5 subtype.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CategoryNode {
    pub slug: String,
    pub name: String,
    pub tier_level: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_slug: Option<String>,
}

impl CategoryNode {
    pub fn new(slug: impl Into<String>, name: impl Into<String>, tier_level: u8) -> Self {
        Self {
            slug: slug.into(),
            name: name.into(),
            tier_level,
            parent_slug: None,
        }
    }
}

/// One entry of a taxonomy extension file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TaxonomyExtension {
    pub parent_path: String,
    pub slug: String,
    pub name: String,
    pub tier_level: u8,
}

const BUILTIN: &[(&str, &str)] = &[
    ("pb", "physics-based"),
    ("pb/qm", "quantum-mechanical"),
    ("pb/qm/abin", "ab initio"),
    ("pb/qm/abin/cc", "coupled cluster"),
    ("pb/qm/abin/cc/ccsd", "coupled cluster singles and doubles"),
    ("pb/qm/abin/mbpt", "many-body perturbation theory"),
    ("pb/qm/abin/mbpt/gw", "GW approximation"),
    ("pb/qm/abin/mbpt/bse", "Bethe-Salpeter equation"),
    ("pb/qm/dft", "density functional theory"),
    ("pb/qm/dft/ksdft", "Kohn-Sham"),
    ("pb/qm/semp", "semi-empirical"),
    ("pb/qm/semp/dftb", "density-functional tight-binding"),
    ("pb/at", "atomistic"),
    ("pb/mes", "mesoscopic"),
    ("st", "statistical"),
    ("st/prob", "probabilistic"),
    ("st/det", "deterministic"),
    ("st/det/lin", "linear"),
    ("st/det/nn", "neural network"),
    ("st/det/dtr", "decision tree"),
];

/// Immutable categorization tree. Nodes are keyed by their slash-joined
/// slug path, since slugs are only unique among siblings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxonomyTree {
    nodes: BTreeMap<String, CategoryNode>,
    builtin: BTreeSet<String>,
}

impl Default for TaxonomyTree {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TaxonomyTree {
    pub fn builtin() -> Self {
        let mut nodes = BTreeMap::new();
        for (key, name) in BUILTIN {
            let parts: Vec<&str> = key.split('/').collect();
            let node = CategoryNode {
                slug: parts[parts.len() - 1].to_string(),
                name: name.to_string(),
                tier_level: parts.len() as u8,
                parent_slug: (parts.len() > 1).then(|| parts[parts.len() - 2].to_string()),
            };
            nodes.insert(key.to_string(), node);
        }
        let builtin = nodes.keys().cloned().collect();
        Self { nodes, builtin }
    }

    pub fn roots(&self) -> impl Iterator<Item = &CategoryNode> {
        self.nodes.values().filter(|n| n.tier_level == 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, key: &str) -> Option<&CategoryNode> {
        self.nodes.get(key)
    }

    pub fn contains(&self, path: &CategoryPath) -> bool {
        self.nodes.contains_key(&path.key())
    }

    pub fn is_builtin(&self, path: &CategoryPath) -> bool {
        self.builtin.contains(&path.key())
    }

    /// All node paths, sorted.
    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn children<'a>(&'a self, parent: &CategoryPath) -> impl Iterator<Item = &'a CategoryNode> + 'a {
        let prefix = format!("{}/", parent.key());
        let depth = parent.depth() as u8 + 1;
        self.nodes
            .iter()
            .filter(move |(k, n)| n.tier_level == depth && k.starts_with(&prefix))
            .map(|(_, n)| n)
    }

    /// Returns the path with registered names attached, or the first level
    /// that is not registered.
    pub fn resolve(&self, path: &CategoryPath) -> Result<CategoryPath, TaxonomyError> {
        let mut levels = Vec::with_capacity(path.depth());
        for (prefix, level) in path.prefixes().zip(path.levels()) {
            let key = prefix.key();
            let node = self
                .nodes
                .get(&key)
                .ok_or(TaxonomyError::UnknownCategory(key))?;
            levels.push(Category {
                name: node.name.clone(),
                slug: node.slug.clone(),
                extras: level.extras.clone(),
            });
        }
        Ok(CategoryPath::new(levels)?)
    }

    pub fn resolve_str(&self, path: &str) -> Result<CategoryPath, TaxonomyError> {
        self.resolve(&CategoryPath::parse(path)?)
    }

    /// The deepest registered prefix that is missing, if any.
    pub fn first_unknown(&self, path: &CategoryPath) -> Option<usize> {
        path.prefixes()
            .position(|p| !self.nodes.contains_key(&p.key()))
            .map(|i| i + 1)
    }

    fn leaves_where(&self, max_level: u8) -> Vec<CategoryPath> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.tier_level <= max_level)
            .filter(|(k, n)| {
                let prefix = format!("{k}/");
                !self
                    .nodes
                    .iter()
                    .any(|(c, cn)| cn.tier_level == n.tier_level + 1 && cn.tier_level <= max_level && c.starts_with(&prefix))
            })
            .map(|(k, _)| self.resolve_str(k).expect("registered key resolves"))
            .collect()
    }

    /// Leaves of the tier I-III skeleton (types and subtypes ignored).
    pub fn tier_leaves(&self) -> Vec<CategoryPath> {
        self.leaves_where(3)
    }

    /// Leaves of the full tree including types and subtypes.
    pub fn leaves(&self) -> Vec<CategoryPath> {
        self.leaves_where(5)
    }

    /// Returns a new tree with `node` registered under `parent`.
    pub fn extend(&self, parent: &CategoryPath, node: CategoryNode) -> Result<TaxonomyTree, TaxonomyError> {
        let parent_key = parent.key();
        if !self.nodes.contains_key(&parent_key) {
            return Err(TaxonomyError::UnknownCategory(parent_key));
        }
        if !is_slug(&node.slug) {
            return Err(TaxonomyError::InvalidSlug(node.slug));
        }
        let expected = parent.depth() as u8 + 1;
        if node.tier_level != expected {
            return Err(TaxonomyError::TierLevel {
                slug: node.slug,
                declared: node.tier_level,
                expected,
            });
        }
        let key = format!("{parent_key}/{}", node.slug);
        if self.nodes.contains_key(&key) {
            return Err(TaxonomyError::DuplicateSlug {
                parent: parent_key,
                slug: node.slug,
            });
        }
        // depth is bounded by CategoryPath itself
        CategoryPath::parse(&key)?;
        let mut tree = self.clone();
        tree.nodes.insert(
            key,
            CategoryNode {
                parent_slug: Some(parent.last_slug().to_string()),
                ..node
            },
        );
        Ok(tree)
    }

    /// Returns a new tree with a user-registered leaf removed.
    pub fn remove(&self, path: &CategoryPath) -> Result<TaxonomyTree, TaxonomyError> {
        let key = path.key();
        if self.builtin.contains(&key) {
            return Err(TaxonomyError::BuiltinNode(key));
        }
        if !self.nodes.contains_key(&key) {
            return Err(TaxonomyError::UnknownCategory(key));
        }
        if self.children(path).next().is_some() {
            return Err(TaxonomyError::HasChildren(key));
        }
        let mut tree = self.clone();
        tree.nodes.remove(&key);
        Ok(tree)
    }

    pub fn apply(&self, extensions: &[TaxonomyExtension]) -> Result<TaxonomyTree, TaxonomyError> {
        extensions.iter().try_fold(self.clone(), |tree, ext| {
            let parent = CategoryPath::parse(&ext.parent_path)?;
            tree.extend(
                &parent,
                CategoryNode::new(ext.slug.clone(), ext.name.clone(), ext.tier_level),
            )
        })
    }
}
