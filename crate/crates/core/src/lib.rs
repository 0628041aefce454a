//! Assessment engine for fundamental-rights impact assessments of high-risk
//! AI systems, with reuse of an existing GDPR DPIA.

pub mod bridge;
pub mod canonical;
pub mod catalog;
pub mod fixtures;
pub mod intake;
pub mod model;
pub mod necessity;
pub mod reporting;
pub mod rights_impact;
pub mod risk;
pub mod workflow;

#[cfg(any(test, feature = "testing"))]
pub mod testing;

pub use catalog::{CatalogSet, SharedCatalogs};
pub use model::{Assessment, ChangeContext};
pub use workflow::WorkflowError;
