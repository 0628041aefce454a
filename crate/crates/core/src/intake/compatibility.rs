use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::IntakeError;
use crate::model::{EntityRef, Purpose, ValidationReport};

/// Outcome of checking a deployed purpose against the intended ones.
///
/// The assessor fields start empty and are filled in by whoever signs the
/// assessment off.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatibilityResult {
    pub compatible: bool,
    pub assessed_at: Option<DateTime<Utc>>,
    pub assessed_by: Option<EntityRef>,
    pub system_changed_since: bool,
    pub documentation_refs: Vec<String>,
    pub rationale: String,
    /// Set when an incompatible result is handed on for human review.
    #[serde(default)]
    pub escalated: bool,
    #[serde(default)]
    pub uncovered_domains: BTreeSet<String>,
    #[serde(default)]
    pub uncovered_capabilities: BTreeSet<String>,
}

impl CompatibilityResult {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if !self.compatible && self.escalated {
            if self.assessed_at.is_none() {
                report.push("assessed_at", "present", "an escalated result needs an assessment time");
            }
            if self.assessed_by.is_none() {
                report.push("assessed_by", "present", "an escalated result needs an assessor");
            }
            if self.documentation_refs.is_empty() {
                report.push("documentation_refs", "non-empty", "an escalated result needs documentation");
            }
            if self.rationale.trim().is_empty() {
                report.push("rationale", "non-empty", "an escalated result needs a rationale");
            }
        }
        report
    }

    pub fn signed(mut self, by: EntityRef, at: DateTime<Utc>) -> Self {
        self.assessed_by = Some(by);
        self.assessed_at = Some(at);
        self
    }
}

/// Tag-subset heuristic: the deployed purpose is compatible when its domains
/// and capabilities are all covered by the intended purposes. Any extra tag
/// flags the purpose for review.
pub fn assess_purpose_compatibility(
    deployed: &Purpose,
    intended: &[Purpose],
) -> Result<CompatibilityResult, IntakeError> {
    if intended.is_empty() {
        return Err(IntakeError::EmptyIntended);
    }
    let domains: BTreeSet<&String> = intended.iter().flat_map(|p| &p.domain_tags).collect();
    let capabilities: BTreeSet<&String> = intended.iter().flat_map(|p| &p.capability_tags).collect();
    let uncovered_domains: BTreeSet<String> = deployed
        .domain_tags
        .iter()
        .filter(|t| !domains.contains(t))
        .cloned()
        .collect();
    let uncovered_capabilities: BTreeSet<String> = deployed
        .capability_tags
        .iter()
        .filter(|t| !capabilities.contains(t))
        .cloned()
        .collect();
    let compatible = uncovered_domains.is_empty() && uncovered_capabilities.is_empty();
    let rationale = if compatible {
        "all domains and capabilities of the deployed purpose are covered by the intended purposes".to_string()
    } else {
        let list = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(", ");
        let mut parts = Vec::new();
        if !uncovered_domains.is_empty() {
            parts.push(format!("domains not intended: {}", list(&uncovered_domains)));
        }
        if !uncovered_capabilities.is_empty() {
            parts.push(format!("capabilities not intended: {}", list(&uncovered_capabilities)));
        }
        parts.join("; ")
    };
    Ok(CompatibilityResult {
        compatible,
        assessed_at: None,
        assessed_by: None,
        system_changed_since: false,
        documentation_refs: Vec::new(),
        rationale,
        escalated: false,
        uncovered_domains,
        uncovered_capabilities,
    })
}
