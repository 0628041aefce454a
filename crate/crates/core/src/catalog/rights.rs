use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{parse_document, CatalogError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Exercise {
    /// Must be exercised by the holder.
    Active,
    /// Applies without any action of the holder.
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Limitability {
    Absolute,
    Limited,
}

/// A right of the Charter of Fundamental Rights of the EU.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundamentalRight {
    pub charter_article: u16,
    pub name: String,
    pub exercise: Exercise,
    pub limitability: Limitability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RightsFile {
    version: String,
    rights: Vec<FundamentalRight>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RightsCatalog {
    pub version: String,
    pub rights: Vec<FundamentalRight>,
    pub checksum: String,
}

impl RightsCatalog {
    pub fn get(&self, article: u16) -> Option<&FundamentalRight> {
        self.rights.iter().find(|r| r.charter_article == article)
    }
}

pub fn load_rights_catalog(bytes: &[u8]) -> Result<RightsCatalog, CatalogError> {
    let file: RightsFile = parse_document(bytes)?;
    let mut seen = BTreeSet::new();
    for r in &file.rights {
        if r.charter_article == 0 {
            return Err(CatalogError::Invalid(format!("right '{}' has article 0", r.name)));
        }
        if !seen.insert(r.charter_article) {
            return Err(CatalogError::DuplicateId(format!("Art.{}", r.charter_article)));
        }
        if r.name.trim().is_empty() {
            return Err(CatalogError::Invalid(format!("Art.{} has no name", r.charter_article)));
        }
    }
    let checksum = crate::canonical::digest(&file).expect("rights serialize");
    Ok(RightsCatalog {
        version: file.version,
        rights: file.rights,
        checksum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_article_zero_and_duplicates() {
        let zero = r#"{"version":"1","rights":[{"charter_article":0,"name":"x","exercise":"Active","limitability":"Limited"}]}"#;
        assert!(load_rights_catalog(zero.as_bytes()).is_err());
        let dup = r#"{"version":"1","rights":[
            {"charter_article":3,"name":"x","exercise":"Active","limitability":"Limited"},
            {"charter_article":3,"name":"y","exercise":"Passive","limitability":"Absolute"}]}"#;
        assert!(matches!(load_rights_catalog(dup.as_bytes()), Err(CatalogError::DuplicateId(_))));
    }
}
