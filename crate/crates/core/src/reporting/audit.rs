use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// One entry of the append-only change log. Only a digest of the change is
/// kept, never the values themselves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditEvent {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub actor: String,
    pub action: String,
    pub payload_digest: String,
}

/// Sequence numbers start at 1 and increase by one; timestamps never go
/// backwards.
pub fn check_audit_chain(log: &[AuditEvent]) -> Result<(), String> {
    for (i, e) in log.iter().enumerate() {
        let expected = i as u64 + 1;
        if e.seq != expected {
            return Err(format!("event {i} has seq {} instead of {expected}", e.seq));
        }
        if e.payload_digest.len() != 64 || !e.payload_digest.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("event {} has a malformed digest", e.seq));
        }
        if i > 0 && e.timestamp < log[i - 1].timestamp {
            return Err(format!("event {} goes back in time", e.seq));
        }
    }
    Ok(())
}
