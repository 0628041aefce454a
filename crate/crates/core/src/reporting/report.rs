use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::document::DocumentError;
use crate::canonical;
use crate::model::{Assessment, SCHEMA_VERSION};
use crate::rights_impact::{ImpactStatus, Leftover, RightsImpact};
use crate::risk::{Acceptability, AcceptabilityPolicy, RiskLevel, RiskMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("report cannot be compiled: stages {stages:?} and {} other item(s) outstanding", fields.len())]
pub struct StageIncomplete {
    pub stages: Vec<u8>,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualRow {
    pub risk_id: String,
    pub risk_kind: String,
    pub initial: RiskLevel,
    pub residual: RiskLevel,
    pub eliminated: bool,
    pub acceptability: Acceptability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriaReport {
    pub assessment: Assessment,
    pub catalog_versions: BTreeMap<String, String>,
    pub acceptability_policy: String,
    pub residual_summary: Vec<ResidualRow>,
    /// Impacts as reported, with escalations applied to unresolved ones.
    pub impacts: Vec<RightsImpact>,
    pub leftovers: Vec<Leftover>,
    pub compiled_at: DateTime<Utc>,
    pub compiled_by: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledReport {
    pub report: FriaReport,
    pub bytes: Vec<u8>,
    pub checksum: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportEnvelope<R> {
    schema_version: String,
    fria_report: R,
    checksum: String,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    schema_version: &'a str,
    fria_report: &'a serde_json::Value,
}

fn report_checksum(schema_version: &str, report: &serde_json::Value) -> String {
    canonical::digest(&ReportBody {
        schema_version,
        fria_report: report,
    })
    .expect("report serializes")
}

fn outstanding(a: &Assessment) -> Vec<String> {
    let mut out = Vec::new();
    for r in &a.risks {
        if !r.is_scored() {
            out.push(format!("risks[{}]: not scored", r.id));
        } else if r.residual.is_none() {
            out.push(format!("risks[{}]: no residual", r.id));
        }
    }
    if a.impacts_stale {
        out.push("impacts: derived from an older risk register".into());
    }
    for i in &a.impacts {
        if i.status == ImpactStatus::Open {
            out.push(format!("impacts[{}]: still open", i.id));
        }
    }
    out
}

/// Builds the report from a snapshot. The compile time is the time of the
/// last change, so compiling the same assessment twice gives the same bytes.
pub fn compile_fria_report(
    a: &Assessment,
    m: &RiskMatrix,
    policy: &AcceptabilityPolicy,
    compiled_by: &str,
) -> Result<CompiledReport, StageIncomplete> {
    let stages = a.stages_missing_for_report();
    let fields = outstanding(a);
    if !stages.is_empty() || !fields.is_empty() {
        return Err(StageIncomplete { stages, fields });
    }
    let residual_summary = a
        .risks
        .iter()
        .filter_map(|r| {
            let res = r.residual?;
            Some(ResidualRow {
                risk_id: r.id.clone(),
                risk_kind: r.risk_kind.clone(),
                initial: r.initial_level(m)?,
                residual: res.level,
                eliminated: res.eliminated,
                acceptability: policy.get(res.level),
            })
        })
        .collect();
    let mut versions = a.catalog_versions.clone();
    versions.insert("risk-matrix".into(), m.version.clone());
    versions.insert("acceptability".into(), policy.version.clone());
    let report = FriaReport {
        assessment: a.clone(),
        catalog_versions: versions,
        acceptability_policy: policy.version.clone(),
        residual_summary,
        impacts: a.impacts.iter().map(RightsImpact::materialize_escalation).collect(),
        leftovers: a.impact_leftovers.clone(),
        compiled_at: a.updated_at,
        compiled_by: compiled_by.to_string(),
    };
    let value = serde_json::to_value(&report).expect("report serializes");
    let checksum = report_checksum(SCHEMA_VERSION, &value);
    let bytes = canonical::to_canonical_bytes(&ReportEnvelope {
        schema_version: SCHEMA_VERSION.to_string(),
        fria_report: &value,
        checksum: checksum.clone(),
    })
    .expect("report serializes");
    Ok(CompiledReport { report, bytes, checksum })
}

/// Parses a report document and checks its checksum.
pub fn read_report_document(bytes: &[u8]) -> Result<CompiledReport, DocumentError> {
    let env: ReportEnvelope<serde_json::Value> =
        serde_json::from_slice(bytes).map_err(|e| DocumentError::Parse(e.to_string()))?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(DocumentError::SchemaVersion(env.schema_version));
    }
    if report_checksum(&env.schema_version, &env.fria_report) != env.checksum {
        return Err(DocumentError::ChecksumMismatch);
    }
    let report: FriaReport =
        serde_json::from_value(env.fria_report).map_err(|e| DocumentError::Parse(e.to_string()))?;
    Ok(CompiledReport {
        report,
        bytes: bytes.to_vec(),
        checksum: env.checksum,
    })
}
