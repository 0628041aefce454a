use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{parse_document, CatalogError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaxonomyKind {
    Risk,
    RiskSource,
    Consequence,
    Mitigation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonomyEntry {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Taxonomy {
    pub version: String,
    pub kind: TaxonomyKind,
    pub entries: Vec<TaxonomyEntry>,
}

impl Taxonomy {
    pub fn get(&self, id: &str) -> Option<&TaxonomyEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn checksum(&self) -> String {
        crate::canonical::digest(self).expect("taxonomy serializes")
    }
}

pub fn load_taxonomy(bytes: &[u8], kind: TaxonomyKind) -> Result<Taxonomy, CatalogError> {
    let t: Taxonomy = parse_document(bytes)?;
    if t.kind != kind {
        return Err(CatalogError::Invalid(format!("expected a {kind:?} taxonomy, found {:?}", t.kind)));
    }
    let mut seen = BTreeSet::new();
    for e in &t.entries {
        if e.id.trim().is_empty() || e.label.trim().is_empty() {
            return Err(CatalogError::Invalid(format!("{kind:?} entry '{}' lacks an id or label", e.id)));
        }
        if !seen.insert(e.id.as_str()) {
            return Err(CatalogError::DuplicateId(e.id.clone()));
        }
    }
    Ok(t)
}

/// The four taxonomies used when suggesting risks and remedies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Taxonomies {
    pub risks: Taxonomy,
    pub sources: Taxonomy,
    pub consequences: Taxonomy,
    pub mitigations: Taxonomy,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_must_match() {
        let doc = r#"{"version":"1","kind":"Risk","entries":[]}"#;
        assert!(load_taxonomy(doc.as_bytes(), TaxonomyKind::Risk).is_ok());
        assert!(load_taxonomy(doc.as_bytes(), TaxonomyKind::Mitigation).is_err());
    }

    #[test]
    fn entries_need_labels() {
        let doc = r#"{"version":"1","kind":"Risk","entries":[{"id":"r","label":" "}]}"#;
        assert!(load_taxonomy(doc.as_bytes(), TaxonomyKind::Risk).is_err());
    }
}
