use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::report::{read_report_document, CompiledReport, ResidualRow};
use crate::canonical;
use crate::model::EntityRef;

/// Versioned on its own; no official template exists yet.
pub const NOTIFICATION_FORMAT: &str = "0.1-draft";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotificationMode {
    MarketSurveillanceNotification,
    SelfAssessmentRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NotificationPayload {
    pub format: String,
    pub mode: NotificationMode,
    pub authority: Option<String>,
    pub report_ref: String,
    pub report_checksum: String,
    pub submitter: EntityRef,
    pub report_compiled_at: DateTime<Utc>,
    pub prepared_at: DateTime<Utc>,
    pub residual_summary: Vec<ResidualRow>,
    /// Always true: payloads are produced for review and never sent.
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotificationError {
    #[error("{0}")]
    ModeMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("report bytes do not hash to the checksum in the payload")]
    ChecksumMismatch,
    #[error("report document is damaged: {0}")]
    Report(#[from] super::document::DocumentError),
    #[error("payload refers to report '{payload}' but the document is '{document}'")]
    WrongReport { payload: String, document: String },
}

pub fn build_notification(
    r: &CompiledReport,
    authority: Option<&str>,
    mode: NotificationMode,
    submitter: EntityRef,
    prepared_at: DateTime<Utc>,
) -> Result<NotificationPayload, NotificationError> {
    let residual_summary = match mode {
        NotificationMode::MarketSurveillanceNotification => {
            if authority.is_none_or(|a| a.trim().is_empty()) {
                return Err(NotificationError::ModeMismatch(
                    "a notification needs the identifier of the receiving authority".into(),
                ));
            }
            if r.report.residual_summary.is_empty() {
                return Err(NotificationError::ModeMismatch(
                    "a notification needs a report with a residual-risk summary".into(),
                ));
            }
            r.report.residual_summary.clone()
        }
        NotificationMode::SelfAssessmentRecord => {
            if authority.is_some() {
                return Err(NotificationError::ModeMismatch(
                    "a self-assessment record is not addressed to an authority".into(),
                ));
            }
            Vec::new()
        }
    };
    Ok(NotificationPayload {
        format: NOTIFICATION_FORMAT.to_string(),
        mode,
        authority: authority.map(str::to_string),
        report_ref: r.report.assessment.id.clone(),
        report_checksum: r.checksum.clone(),
        submitter,
        report_compiled_at: r.report.compiled_at,
        prepared_at,
        residual_summary,
        dry_run: true,
    })
}

pub fn notification_bytes(p: &NotificationPayload) -> Vec<u8> {
    canonical::to_canonical_bytes(p).expect("payload serializes")
}

/// Re-checks that `report_bytes` is the report the payload was built from.
pub fn verify_notification(p: &NotificationPayload, report_bytes: &[u8]) -> Result<(), VerifyError> {
    let doc = read_report_document(report_bytes)?;
    if doc.checksum != p.report_checksum {
        return Err(VerifyError::ChecksumMismatch);
    }
    if doc.report.assessment.id != p.report_ref {
        return Err(VerifyError::WrongReport {
            payload: p.report_ref.clone(),
            document: doc.report.assessment.id,
        });
    }
    Ok(())
}
