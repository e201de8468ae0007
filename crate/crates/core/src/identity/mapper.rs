//! Versioned mapper table and delta updates.
//!
//! Tables and deltas are exchanged as canonical JSON; entries are kept
//! sorted by skill id so `apply_delta(old, diff_tables(old, new))`
//! reproduces `new` byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::backlink::{resolve_identity, Identity};
use super::corpus::PageSource;
use super::urls::DomainPolicy;
use crate::canonical::{to_canonical_bytes, to_canonical_string};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::graph::{build_graph, PhoneticGraph};
use crate::phonetics::CostMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub skill_id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperEntry {
    pub skill_id: String,
    pub amazon_url: String,
    pub domain: String,
    pub cert_sha256: String,
    pub neighbors: Vec<Neighbor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperTable {
    pub version: u64,
    #[serde(with = "crate::canonical::threshold")]
    pub threshold: f64,
    pub entries: Vec<MapperEntry>,
}

impl MapperTable {
    pub fn new(version: u64, threshold: f64, mut entries: Vec<MapperEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.skill_id.cmp(&b.skill_id));
        if let Some(w) = entries.windows(2).find(|w| w[0].skill_id == w[1].skill_id) {
            return Err(Error::DuplicateSkill(w[0].skill_id.clone()));
        }
        Ok(MapperTable {
            version,
            threshold,
            entries,
        })
    }

    pub fn get(&self, skill_id: &str) -> Option<&MapperEntry> {
        self.entries
            .binary_search_by(|e| e.skill_id.as_str().cmp(skill_id))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn to_json(&self) -> String {
        to_canonical_string(self)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_canonical_bytes(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: MapperTable = serde_json::from_str(text)?;
        MapperTable::new(t.version, t.threshold, t.entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// One entry per skill with a verified backlink. Neighbors come from the
/// graph and may include skills without an identity.
pub fn build_mapper_table(
    catalog: &Catalog,
    costs: &CostMatrix,
    threshold: f64,
    source: &dyn PageSource,
    policy: &DomainPolicy,
) -> Result<MapperTable> {
    let graph = build_graph(catalog, costs, threshold)?;
    build_mapper_table_with_graph(catalog, &graph, source, policy)
}

pub fn build_mapper_table_with_graph(
    catalog: &Catalog,
    graph: &PhoneticGraph,
    source: &dyn PageSource,
    policy: &DomainPolicy,
) -> Result<MapperTable> {
    let identities = resolve_identities(catalog, source, policy);
    assemble_table(catalog, &identities, graph, 1)
}

/// Backlink identities keyed by skill id. Independent of the threshold, so
/// threshold sweeps resolve them once.
pub fn resolve_identities(
    catalog: &Catalog,
    source: &dyn PageSource,
    policy: &DomainPolicy,
) -> BTreeMap<String, Identity> {
    catalog
        .skills()
        .iter()
        .filter_map(|s| resolve_identity(s, source, policy).map(|id| (s.id.clone(), id)))
        .collect()
}

pub fn assemble_table(
    catalog: &Catalog,
    identities: &BTreeMap<String, Identity>,
    graph: &PhoneticGraph,
    version: u64,
) -> Result<MapperTable> {
    let mut entries = Vec::with_capacity(identities.len());
    for skill in catalog.skills() {
        let Some(identity) = identities.get(&skill.id) else {
            continue;
        };
        let neighbors = graph
            .neighbors(&skill.id)?
            .into_iter()
            .map(|(skill_id, distance)| Neighbor { skill_id, distance })
            .collect();
        entries.push(MapperEntry {
            skill_id: skill.id.clone(),
            amazon_url: skill.amazon_url.clone(),
            domain: identity.domain.clone(),
            cert_sha256: identity.cert_sha256.clone(),
            neighbors,
        });
    }
    MapperTable::new(version, graph.threshold(), entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub base_version: u64,
    pub added: Vec<MapperEntry>,
    pub changed: Vec<MapperEntry>,
    pub removed: Vec<String>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.changed.is_empty() && self.removed.is_empty()
    }

    pub fn touched(&self) -> usize {
        self.added.len() + self.changed.len() + self.removed.len()
    }

    pub fn to_json(&self) -> String {
        to_canonical_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Serialized size divided by the number of touched skills.
    pub fn bytes_per_skill(&self) -> f64 {
        match self.touched() {
            0 => 0.0,
            n => self.to_json().len() as f64 / n as f64,
        }
    }
}

/// Per-entry differences going from `old` to `new`.
pub fn diff_tables(old: &MapperTable, new: &MapperTable) -> Result<Delta> {
    if new.version != old.version + 1 {
        return Err(Error::VersionMismatch {
            table: old.version,
            delta: new.version.saturating_sub(1),
        });
    }
    if to_canonical_string(&old.threshold) != to_canonical_string(&new.threshold) {
        return Err(Error::ThresholdMismatch {
            old: old.threshold,
            new: new.threshold,
        });
    }
    let before: BTreeMap<&str, &MapperEntry> =
        old.entries.iter().map(|e| (e.skill_id.as_str(), e)).collect();
    let after: BTreeMap<&str, &MapperEntry> =
        new.entries.iter().map(|e| (e.skill_id.as_str(), e)).collect();

    let mut delta = Delta {
        base_version: old.version,
        added: vec![],
        changed: vec![],
        removed: vec![],
    };
    for (id, entry) in &after {
        match before.get(id) {
            None => delta.added.push((*entry).clone()),
            Some(prev) if to_canonical_bytes(*prev) != to_canonical_bytes(*entry) => {
                delta.changed.push((*entry).clone())
            }
            Some(_) => {}
        }
    }
    delta.removed = before
        .keys()
        .filter(|id| !after.contains_key(*id))
        .map(|id| id.to_string())
        .collect();
    Ok(delta)
}

pub fn apply_delta(old: &MapperTable, delta: &Delta) -> Result<MapperTable> {
    if delta.base_version != old.version {
        return Err(Error::VersionMismatch {
            table: old.version,
            delta: delta.base_version,
        });
    }
    let mut entries: BTreeMap<String, MapperEntry> = old
        .entries
        .iter()
        .map(|e| (e.skill_id.clone(), e.clone()))
        .collect();
    for id in &delta.removed {
        if entries.remove(id).is_none() {
            return Err(Error::UnknownSkill(id.clone()));
        }
    }
    for e in &delta.changed {
        match entries.get_mut(&e.skill_id) {
            Some(slot) => *slot = e.clone(),
            None => return Err(Error::UnknownSkill(e.skill_id.clone())),
        }
    }
    for e in &delta.added {
        if entries.insert(e.skill_id.clone(), e.clone()).is_some() {
            return Err(Error::DuplicateSkill(e.skill_id.clone()));
        }
    }
    MapperTable::new(old.version + 1, old.threshold, entries.into_values().collect())
}
