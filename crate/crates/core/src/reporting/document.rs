//! The portable assessment document:
//! `{schema_version, assessment, audit_log, checksum}` where the checksum is
//! the SHA-256 of the canonical form of the other three members.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::audit::AuditEvent;
use crate::canonical;
use crate::model::{Assessment, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum DocumentError {
    #[error("document cannot be read: {0}")]
    Parse(String),
    #[error("schema version '{0}' is not supported")]
    SchemaVersion(String),
    #[error("checksum does not match the content")]
    ChecksumMismatch,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    schema_version: String,
    assessment: Value,
    audit_log: Vec<AuditEvent>,
    checksum: String,
}

#[derive(Serialize)]
struct Body<'a> {
    schema_version: &'a str,
    assessment: &'a Value,
    audit_log: &'a [AuditEvent],
}

fn body_checksum(schema_version: &str, assessment: &Value, audit_log: &[AuditEvent]) -> String {
    canonical::digest(&Body {
        schema_version,
        assessment,
        audit_log,
    })
    .expect("document body serializes")
}

fn split(a: &Assessment) -> (Value, Vec<AuditEvent>) {
    let mut body = serde_json::to_value(a).expect("assessment serializes");
    let log = body
        .as_object_mut()
        .and_then(|o| o.remove("audit_log"))
        .map(|v| serde_json::from_value(v).expect("audit log round-trips"))
        .unwrap_or_default();
    (body, log)
}

/// Checksum the exported document of `a` would carry.
pub fn assessment_checksum(a: &Assessment) -> String {
    let (body, log) = split(a);
    body_checksum(SCHEMA_VERSION, &body, &log)
}

/// Canonical bytes: sorted keys, no insignificant whitespace.
pub fn export_assessment(a: &Assessment) -> Vec<u8> {
    let (body, log) = split(a);
    let checksum = body_checksum(SCHEMA_VERSION, &body, &log);
    let env = Envelope {
        schema_version: SCHEMA_VERSION.to_string(),
        assessment: body,
        audit_log: log,
        checksum,
    };
    canonical::to_canonical_bytes(&env).expect("document serializes")
}

pub fn import_assessment(bytes: &[u8]) -> Result<Assessment, DocumentError> {
    let env: Envelope = serde_json::from_slice(bytes).map_err(|e| DocumentError::Parse(e.to_string()))?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::SchemaVersion(env.schema_version));
    }
    if body_checksum(&env.schema_version, &env.assessment, &env.audit_log) != env.checksum {
        return Err(DocumentError::ChecksumMismatch);
    }
    let mut body = env.assessment;
    match body.as_object_mut() {
        Some(o) => {
            o.insert("audit_log".into(), serde_json::to_value(&env.audit_log).expect("audit log serializes"));
        }
        None => return Err(DocumentError::Parse("assessment must be an object".into())),
    }
    let a: Assessment = serde_json::from_value(body).map_err(|e| DocumentError::Parse(e.to_string()))?;
    if a.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::SchemaVersion(a.schema_version));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChangeContext;
    use chrono::TimeZone;

    fn sample() -> Assessment {
        let ctx = ChangeContext::new("t", chrono::Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap());
        Assessment::new("doc", "FR".parse().unwrap(), &ctx)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let a = sample();
        let bytes = export_assessment(&a);
        let b = import_assessment(&bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(bytes, export_assessment(&b));
    }

    #[test]
    fn tampering_is_detected() {
        let bytes = export_assessment(&sample());
        let text = String::from_utf8(bytes).unwrap().replace("\"FR\"", "\"DE\"");
        assert_eq!(import_assessment(text.as_bytes()), Err(DocumentError::ChecksumMismatch));
    }

    #[test]
    fn other_versions_are_refused() {
        let mut v: Value = serde_json::from_slice(&export_assessment(&sample())).unwrap();
        v["schema_version"] = "2.0".into();
        let bytes = serde_json::to_vec(&v).unwrap();
        assert_eq!(import_assessment(&bytes), Err(DocumentError::SchemaVersion("2.0".into())));
    }

    #[test]
    fn unknown_members_are_refused() {
        let mut v: Value = serde_json::from_slice(&export_assessment(&sample())).unwrap();
        v["extra"] = 1.into();
        assert!(matches!(import_assessment(&serde_json::to_vec(&v).unwrap()), Err(DocumentError::Parse(_))));
    }
}
