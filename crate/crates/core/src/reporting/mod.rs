//! Stage 5 outputs: the report document, the dry-run notification and the
//! portable assessment format with its audit trail.

pub mod audit;
pub mod document;
mod notification;
mod report;

pub use audit::{check_audit_chain, AuditEvent};
pub use document::{assessment_checksum, export_assessment, import_assessment, DocumentError};
pub use notification::{
    build_notification, notification_bytes, verify_notification, NotificationError, NotificationMode,
    NotificationPayload, VerifyError, NOTIFICATION_FORMAT,
};
pub use report::{compile_fria_report, read_report_document, CompiledReport, FriaReport, ResidualRow, StageIncomplete};
