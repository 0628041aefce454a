//! Domain types shared by every stage. Plain values with validation; no I/O.

pub mod assessment;
pub mod data;
pub mod dpia;
pub mod entity;
pub mod fria;
pub mod jurisdiction;
pub mod paths;
pub mod profile;
pub mod purpose;
pub mod validation;

pub use assessment::{Assessment, ChangeContext, IntakeState, StageError, StageState, SCHEMA_VERSION, STAGES};
pub use data::{DataQuality, DataRole, Ordinal, OrdinalOutOfRange, PersonalDataItem};
pub use dpia::{
    CrossBorderTransfer, DataSubjectCategory, DpiaDescription, LegalBasis, Locality, ProcessingOperation,
    ProcessingScale, RetentionPeriod,
};
pub use entity::{EntityRef, EntityRole, Relationship};
pub use fria::{
    Datasheet, Deployment, FriaDescription, IntendedPurposes, InteractionContext, InvolvedData,
    InvolvedEntities, LifecycleChange, Operational, PerformanceMetric, Provenance, SubjectControl,
    VulnerabilityBasis,
};
pub use jurisdiction::{Jurisdiction, UnknownJurisdiction};
pub use profile::{DataProfile, SystemProfile};
pub use purpose::{Purpose, PurposeKind};
pub use validation::{ValidationReport, Violation};
