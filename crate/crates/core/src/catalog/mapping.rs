use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{parse_document, CatalogError};
use crate::model::paths::{is_dpia_leaf, is_fria_leaf, DPIA_LEAF_PATHS, FRIA_LEAF_PATHS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    Equivalent,
    Partial,
    DpiaOnly,
    FriaOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dpia_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fria_path: Option<String>,
    pub relation: Relation,
    #[serde(default)]
    pub transform_note: String,
}

impl MappingEntry {
    pub fn shared(dpia: &str, fria: &str, relation: Relation) -> Self {
        Self {
            dpia_path: Some(dpia.to_string()),
            fria_path: Some(fria.to_string()),
            relation,
            transform_note: String::new(),
        }
    }

    pub fn dpia_only(dpia: &str) -> Self {
        Self {
            dpia_path: Some(dpia.to_string()),
            fria_path: None,
            relation: Relation::DpiaOnly,
            transform_note: String::new(),
        }
    }

    pub fn fria_only(fria: &str) -> Self {
        Self {
            dpia_path: None,
            fria_path: Some(fria.to_string()),
            relation: Relation::FriaOnly,
            transform_note: String::new(),
        }
    }

    pub fn is_shared(&self) -> bool {
        matches!(self.relation, Relation::Equivalent | Relation::Partial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    version: String,
    entries: Vec<MappingEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingCatalog {
    pub version: String,
    pub entries: Vec<MappingEntry>,
    pub checksum: String,
}

impl MappingCatalog {
    /// Validates shape and totality of `entries`.
    pub fn from_entries(version: impl Into<String>, entries: Vec<MappingEntry>) -> Result<Self, CatalogError> {
        let file = MappingFile {
            version: version.into(),
            entries,
        };
        check_entries(&file.entries)?;
        let checksum = crate::canonical::digest(&file).expect("mapping serializes");
        Ok(Self {
            version: file.version,
            entries: file.entries,
            checksum,
        })
    }

    pub fn entry_for_fria(&self, fria_path: &str) -> Option<&MappingEntry> {
        self.entries.iter().find(|e| e.fria_path.as_deref() == Some(fria_path))
    }

    pub fn entry_for_dpia(&self, dpia_path: &str) -> Option<&MappingEntry> {
        self.entries.iter().find(|e| e.dpia_path.as_deref() == Some(dpia_path))
    }
}

pub fn load_mapping_catalog(bytes: &[u8]) -> Result<MappingCatalog, CatalogError> {
    let file: MappingFile = parse_document(bytes)?;
    MappingCatalog::from_entries(file.version, file.entries)
}

fn check_entries(entries: &[MappingEntry]) -> Result<(), CatalogError> {
    let mut dpia_seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fria_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let shape_ok = match e.relation {
            Relation::Equivalent | Relation::Partial => e.dpia_path.is_some() && e.fria_path.is_some(),
            Relation::DpiaOnly => e.dpia_path.is_some() && e.fria_path.is_none(),
            Relation::FriaOnly => e.dpia_path.is_none() && e.fria_path.is_some(),
        };
        if !shape_ok {
            return Err(CatalogError::Invalid(format!(
                "entry {i} ({:?}) has the wrong combination of paths",
                e.relation
            )));
        }
        if let Some(p) = &e.dpia_path {
            if !is_dpia_leaf(p) {
                return Err(CatalogError::Invalid(format!("entry {i}: '{p}' is not a DPIA leaf path")));
            }
            if let Some(prev) = dpia_seen.insert(p, i) {
                return Err(CatalogError::Invalid(format!("DPIA path '{p}' appears in entries {prev} and {i}")));
            }
        }
        if let Some(p) = &e.fria_path {
            if !is_fria_leaf(p) {
                return Err(CatalogError::Invalid(format!("entry {i}: '{p}' is not a FRIA leaf path")));
            }
            if let Some(prev) = fria_seen.insert(p, i) {
                return Err(CatalogError::Invalid(format!("FRIA path '{p}' appears in entries {prev} and {i}")));
            }
        }
    }
    let missing: Vec<&str> = DPIA_LEAF_PATHS
        .iter()
        .filter(|p| !dpia_seen.contains_key(*p))
        .chain(FRIA_LEAF_PATHS.iter().filter(|p| !fria_seen.contains_key(*p)))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(CatalogError::Invalid(format!(
            "mapping is not total, unmapped paths: {}",
            missing.join(", ")
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total() -> Vec<MappingEntry> {
        DPIA_LEAF_PATHS
            .iter()
            .map(|p| MappingEntry::dpia_only(p))
            .chain(FRIA_LEAF_PATHS.iter().map(|p| MappingEntry::fria_only(p)))
            .collect()
    }

    #[test]
    fn disjoint_listing_is_total() {
        assert!(MappingCatalog::from_entries("t", total()).is_ok());
    }

    #[test]
    fn empty_mapping_is_rejected() {
        assert!(matches!(MappingCatalog::from_entries("t", vec![]), Err(CatalogError::Invalid(_))));
    }

    #[test]
    fn duplicate_path_is_rejected() {
        let mut entries = total();
        entries.push(MappingEntry::shared("purposes", "intended_purposes.developed", Relation::Partial));
        assert!(MappingCatalog::from_entries("t", entries).is_err());
    }

    #[test]
    fn shape_is_checked() {
        let mut entries = total();
        entries[0].fria_path = Some("provenance.datasheets".into());
        assert!(MappingCatalog::from_entries("t", entries).is_err());
    }
}
