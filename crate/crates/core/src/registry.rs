//! File-backed document store with tag, category and fingerprint indices.
//!
//! Layout: `<root>/<kind>/<id>.json` holds the canonical document,
//! `<root>/<kind>/<id>.meta.json` the material and duplicate link when there
//! is one, and `<root>/index.json` a cache of the indices that is rebuilt
//! whenever it disagrees with the documents on disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entity::document::{parse_document, serialize_document, DocumentError};
use crate::entity::validate::{Validator, Violation};
use crate::entity::{CategoryPath, Entity, EntityKind, PathError};
use crate::fingerprint::fingerprint;
use crate::taxonomy::TaxonomyTree;

pub const REGISTRY_ENV: &str = "CATECOM_REGISTRY";
const INDEX_FILE: &str = "index.json";
const KINDS: [EntityKind; 3] = [EntityKind::UnitModel, EntityKind::CompoundModel, EntityKind::Method];

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("document is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("fingerprint {digest} is already stored as `{existing}`")]
    DuplicateFingerprint { existing: String, digest: String },
    #[error("no entity with id `{0}`")]
    NotFound(String),
    #[error("id `{0}` is already taken")]
    IdExists(String),
    #[error("`{0}` cannot be used as an id")]
    InvalidId(String),
    #[error("unknown filter `{0}` (expected tag, category, slug or search)")]
    UnknownFilter(String),
    #[error("bad category filter: {0}")]
    BadCategory(#[from] PathError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Corrupt { path: PathBuf, source: DocumentError },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Store anyway and report the earlier id.
    #[default]
    Warn,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreOutcome {
    pub id: String,
    pub digest: String,
    /// Id of the entity already stored with the same fingerprint.
    pub duplicate_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duplicate_of: Option<String>,
}

impl Sidecar {
    fn is_empty(&self) -> bool {
        self.material.is_none() && self.duplicate_of.is_none()
    }
}

/// What the index keeps about one stored document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub kind: String,
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<String>,
    pub tags: BTreeSet<String>,
    pub categories: BTreeSet<String>,
    pub slugs: BTreeSet<String>,
    pub search_texts: Vec<String>,
}

impl IndexEntry {
    fn describe(entity: &Entity, digest: String, sidecar: &Sidecar) -> Self {
        let units = entity.unit_models();
        let mut slugs: BTreeSet<String> = units.iter().map(|u| u.slug.clone()).collect();
        if let Entity::Compound(c) = entity {
            if let Some(s) = c.extras.get("slug").and_then(|v| v.as_str()) {
                slugs.insert(s.to_string());
            }
        }
        Self {
            kind: entity.kind().as_str().to_string(),
            digest,
            material: sidecar.material.clone(),
            duplicate_of: sidecar.duplicate_of.clone(),
            tags: units.iter().flat_map(|u| u.tags.iter().cloned()).collect(),
            categories: units.iter().map(|u| u.categories.key()).collect(),
            slugs,
            search_texts: entity
                .methods()
                .iter()
                .filter_map(|m| m.data.search_text.clone())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegistryIndex {
    pub by_tag: BTreeMap<String, BTreeSet<String>>,
    pub by_category_prefix: BTreeMap<String, BTreeSet<String>>,
    /// Digest to the first id stored under it.
    pub by_fingerprint: BTreeMap<String, String>,
    pub by_id: BTreeMap<String, IndexEntry>,
}

impl RegistryIndex {
    fn insert(&mut self, id: &str, entry: IndexEntry) {
        for t in &entry.tags {
            self.by_tag.entry(t.clone()).or_default().insert(id.to_string());
        }
        for key in &entry.categories {
            let path = CategoryPath::parse(key).expect("indexed paths are valid");
            for prefix in path.prefixes() {
                self.by_category_prefix
                    .entry(prefix.key())
                    .or_default()
                    .insert(id.to_string());
            }
        }
        if entry.duplicate_of.is_none() {
            self.by_fingerprint.entry(entry.digest.clone()).or_insert_with(|| id.to_string());
        }
        self.by_id.insert(id.to_string(), entry);
    }

    fn ids(&self) -> BTreeSet<&str> {
        self.by_id.keys().map(String::as_str).collect()
    }
}

/// One conjunct of a query.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Tag(String),
    CategoryPrefix(CategoryPath),
    Slug(String),
    /// Case-sensitive substring of any method's searchText.
    SearchText(String),
}

impl Filter {
    /// Parses `key=value`, with key one of `tag`, `category`, `slug`,
    /// `search`.
    pub fn parse(s: &str) -> Result<Filter, RegistryError> {
        let (key, value) = s.split_once('=').ok_or_else(|| RegistryError::UnknownFilter(s.to_string()))?;
        Filter::from_parts(key, value)
    }

    pub fn from_parts(key: &str, value: &str) -> Result<Filter, RegistryError> {
        Ok(match key {
            "tag" => Filter::Tag(value.to_string()),
            "category" | "categoryPrefix" => Filter::CategoryPrefix(CategoryPath::parse(value)?),
            "slug" => Filter::Slug(value.to_string()),
            "search" | "searchText" => Filter::SearchText(value.to_string()),
            other => return Err(RegistryError::UnknownFilter(other.to_string())),
        })
    }

    /// Whether an index entry satisfies this filter, without using the
    /// inverted indices.
    pub fn matches(&self, entry: &IndexEntry) -> bool {
        match self {
            Filter::Tag(t) => entry.tags.contains(t),
            Filter::CategoryPrefix(p) => entry
                .categories
                .iter()
                .any(|c| p.is_prefix_of(&CategoryPath::parse(c).expect("indexed paths are valid"))),
            Filter::Slug(s) => entry.slugs.contains(s),
            Filter::SearchText(s) => entry.search_texts.iter().any(|t| t.contains(s.as_str())),
        }
    }
}

pub struct Registry {
    root: PathBuf,
    index: RegistryIndex,
    taxonomy: TaxonomyTree,
    policy: DuplicatePolicy,
    dirty: bool,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.ends_with(".meta")
}

fn write_atomic(dir: &Path, target: &Path, bytes: &[u8]) -> Result<(), RegistryError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(target))?;
    tmp.as_file().sync_all().map_err(io_err(target))?;
    tmp.persist(target).map_err(|e| RegistryError::Io {
        path: target.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

impl Registry {
    pub fn open(root: impl Into<PathBuf>) -> Result<Registry, RegistryError> {
        Registry::open_with(root, TaxonomyTree::builtin())
    }

    /// Opens the root named by `CATECOM_REGISTRY`.
    pub fn open_default() -> Result<Registry, RegistryError> {
        let root = std::env::var_os(REGISTRY_ENV).ok_or_else(|| RegistryError::Io {
            path: PathBuf::from(format!("${REGISTRY_ENV}")),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "environment variable not set"),
        })?;
        Registry::open(PathBuf::from(root))
    }

    pub fn open_with(root: impl Into<PathBuf>, taxonomy: TaxonomyTree) -> Result<Registry, RegistryError> {
        let root = root.into();
        for kind in KINDS {
            let dir = root.join(kind.as_str());
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let mut reg = Registry {
            root,
            index: RegistryIndex::default(),
            taxonomy,
            policy: DuplicatePolicy::Warn,
            dirty: false,
        };
        let on_disk = reg.ids_on_disk()?;
        let cached = fs::read(reg.root.join(INDEX_FILE))
            .ok()
            .and_then(|b| serde_json::from_slice::<RegistryIndex>(&b).ok())
            .filter(|idx| idx.ids() == on_disk.iter().map(String::as_str).collect());
        match cached {
            Some(idx) => reg.index = idx,
            None => {
                reg.index = reg.rebuild_index()?;
                reg.dirty = true;
                reg.flush()?;
            }
        }
        Ok(reg)
    }

    pub fn with_policy(mut self, policy: DuplicatePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn set_policy(&mut self, policy: DuplicatePolicy) {
        self.policy = policy;
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index(&self) -> &RegistryIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.by_id.is_empty()
    }

    fn ids_on_disk(&self) -> Result<BTreeSet<String>, RegistryError> {
        Ok(self.scan()?.into_iter().map(|(id, _)| id).collect())
    }

    fn scan(&self) -> Result<Vec<(String, EntityKind)>, RegistryError> {
        let mut out = Vec::new();
        for kind in KINDS {
            let dir = self.root.join(kind.as_str());
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let name = entry.map_err(io_err(&dir))?.file_name();
                let Some(name) = name.to_str() else { continue };
                if name.ends_with(".meta.json") {
                    continue;
                }
                if let Some(id) = name.strip_suffix(".json") {
                    out.push((id.to_string(), kind));
                }
            }
        }
        Ok(out)
    }

    fn doc_path(&self, kind: EntityKind, id: &str) -> PathBuf {
        self.root.join(kind.as_str()).join(format!("{id}.json"))
    }

    fn meta_path(&self, kind: EntityKind, id: &str) -> PathBuf {
        self.root.join(kind.as_str()).join(format!("{id}.meta.json"))
    }

    /// Recomputes every index from the documents and sidecars on disk.
    pub fn rebuild_index(&self) -> Result<RegistryIndex, RegistryError> {
        let mut idx = RegistryIndex::default();
        let mut entries = Vec::new();
        for (id, kind) in self.scan()? {
            let path = self.doc_path(kind, &id);
            let raw = fs::read(&path).map_err(io_err(&path))?;
            let entity = parse_document(&raw, kind).map_err(|source| RegistryError::Corrupt {
                path: path.clone(),
                source,
            })?;
            let meta_path = self.meta_path(kind, &id);
            let sidecar = match fs::read(&meta_path) {
                Ok(b) => serde_json::from_slice(&b).map_err(|e| RegistryError::Corrupt {
                    path: meta_path.clone(),
                    source: DocumentError::Syntax {
                        line: e.line(),
                        column: e.column(),
                        message: e.to_string(),
                    },
                })?,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Sidecar::default(),
                Err(e) => return Err(io_err(&meta_path)(e)),
            };
            let digest = fingerprint(&entity, sidecar.material.as_deref()).digest;
            entries.push((id, IndexEntry::describe(&entity, digest, &sidecar)));
        }
        // originals first so each digest maps to the entity that was stored first
        entries.sort_by_key(|(_, e)| e.duplicate_of.is_some());
        for (id, entry) in entries {
            idx.insert(&id, entry);
        }
        Ok(idx)
    }

    /// Writes `index.json` if anything changed since the last flush.
    pub fn flush(&mut self) -> Result<(), RegistryError> {
        if !self.dirty {
            return Ok(());
        }
        let bytes = serde_json::to_vec(&self.index).expect("index serializes");
        write_atomic(&self.root, &self.root.join(INDEX_FILE), &bytes)?;
        self.dirty = false;
        Ok(())
    }

    pub fn store(&mut self, entity: &Entity, id: Option<&str>, material: Option<&str>) -> Result<StoreOutcome, RegistryError> {
        let violations = Validator::new(&self.taxonomy).validate(entity);
        if !violations.is_empty() {
            return Err(RegistryError::Validation(violations));
        }
        let id = match id {
            Some(id) if !valid_id(id) => return Err(RegistryError::InvalidId(id.to_string())),
            Some(id) if self.index.by_id.contains_key(id) => return Err(RegistryError::IdExists(id.to_string())),
            Some(id) => id.to_string(),
            None => uuid::Uuid::new_v4().to_string(),
        };
        let digest = fingerprint(entity, material).digest;
        let duplicate_of = self.index.by_fingerprint.get(&digest).cloned();
        if let (Some(existing), DuplicatePolicy::Reject) = (&duplicate_of, self.policy) {
            return Err(RegistryError::DuplicateFingerprint {
                existing: existing.clone(),
                digest,
            });
        }

        let kind = entity.kind();
        let dir = self.root.join(kind.as_str());
        let sidecar = Sidecar {
            material: material.map(str::to_string),
            duplicate_of: duplicate_of.clone(),
        };
        if !sidecar.is_empty() {
            let bytes = serde_json::to_vec(&sidecar).expect("sidecar serializes");
            write_atomic(&dir, &self.meta_path(kind, &id), &bytes)?;
        }
        write_atomic(&dir, &self.doc_path(kind, &id), &serialize_document(entity))?;

        self.index.insert(&id, IndexEntry::describe(entity, digest.clone(), &sidecar));
        self.dirty = true;
        Ok(StoreOutcome {
            id,
            digest,
            duplicate_of,
        })
    }

    /// Stored bytes, exactly as serialized at store time.
    pub fn load(&self, id: &str) -> Result<Vec<u8>, RegistryError> {
        let entry = self.index.by_id.get(id).ok_or_else(|| RegistryError::NotFound(id.to_string()))?;
        let kind = EntityKind::from_token(&entry.kind).expect("indexed kinds are valid");
        let path = self.doc_path(kind, id);
        fs::read(&path).map_err(io_err(&path))
    }

    pub fn load_entity(&self, id: &str) -> Result<Entity, RegistryError> {
        let raw = self.load(id)?;
        let kind = EntityKind::from_token(&self.index.by_id[id].kind).expect("indexed kinds are valid");
        parse_document(&raw, kind).map_err(|source| RegistryError::Corrupt {
            path: self.doc_path(kind, id),
            source,
        })
    }

    /// Sorted ids satisfying every filter; no filters selects everything.
    pub fn query(&self, filters: &[Filter]) -> Vec<String> {
        let mut candidates: Option<BTreeSet<&str>> = None;
        for f in filters {
            match f {
                Filter::Tag(t) => candidates = narrow(candidates, self.index.by_tag.get(t)),
                Filter::CategoryPrefix(p) => {
                    candidates = narrow(candidates, self.index.by_category_prefix.get(&p.key()))
                }
                _ => {}
            }
        }
        let pool: Vec<&str> = match candidates {
            Some(c) => c.into_iter().collect(),
            None => self.index.by_id.keys().map(String::as_str).collect(),
        };
        pool.into_iter()
            .filter(|id| {
                let entry = &self.index.by_id[*id];
                filters
                    .iter()
                    .filter(|f| matches!(f, Filter::Slug(_) | Filter::SearchText(_)))
                    .all(|f| f.matches(entry))
            })
            .map(str::to_string)
            .collect()
    }
}

fn narrow<'a>(cur: Option<BTreeSet<&'a str>>, set: Option<&'a BTreeSet<String>>) -> Option<BTreeSet<&'a str>> {
    let set: BTreeSet<&str> = set.map(|s| s.iter().map(String::as_str).collect()).unwrap_or_default();
    Some(match cur {
        Some(c) => c.intersection(&set).copied().collect(),
        None => set,
    })
}

impl Drop for Registry {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}
