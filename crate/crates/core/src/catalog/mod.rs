//! Declarative catalogs: necessity rules, the DPIA/FRIA field mapping,
//! fundamental rights and the risk taxonomies.

pub mod conditions;
pub mod mapping;
pub mod predicate;
pub mod rights;
mod set;
pub mod taxonomy;

use serde::de::DeserializeOwned;
use thiserror::Error;

pub use conditions::{
    load_catalog, resolve_outcome, tally_catalog, ConditionCatalog, ConditionRule, JurisdictionScope, Outcome,
    RuleSource, TallyReport,
};
pub use mapping::{load_mapping_catalog, MappingCatalog, MappingEntry, Relation};
pub use predicate::{FactSource, FactValue, FieldType, Predicate};
pub use rights::{load_rights_catalog, Exercise, FundamentalRight, Limitability, RightsCatalog};
pub use set::{CatalogFile, CatalogSet, CatalogSetError, SharedCatalogs};
pub use taxonomy::{load_taxonomy, Taxonomies, Taxonomy, TaxonomyEntry, TaxonomyKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("catalog is not valid JSON: {0}")]
    Parse(String),
    #[error("catalog does not match the schema: {0}")]
    Schema(String),
    #[error("rule '{rule_id}': {detail}")]
    Predicate { rule_id: String, detail: String },
    #[error("identifier '{0}' is used more than once")]
    DuplicateId(String),
    #[error("{0}")]
    Invalid(String),
}

/// Two-step decode so that syntax errors and schema errors stay distinct.
pub(crate) fn parse_document<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, CatalogError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| CatalogError::Parse(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| CatalogError::Schema(e.to_string()))
}
