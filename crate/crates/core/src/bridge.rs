//! Stage 2: reuse of an existing DPIA for the FRIA.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::catalog::{MappingCatalog, Relation};
use crate::intake::QuestionSet;
use crate::model::paths::{fria_category, fria_required_paths, get_path, set_path, FRIA_CATEGORIES};
use crate::model::{DataRole, DpiaDescription, EntityRef, EntityRole, FriaDescription, ValidationReport, SCHEMA_VERSION};
use crate::reporting::document::{self, DocumentError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldProvenance {
    pub source_dpia_path: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GapKind {
    /// Nothing has been captured for the path yet.
    Missing,
    /// Prefilled from the DPIA, but the FRIA asks for more than the DPIA holds.
    NeedsEnrichment,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gap {
    pub fria_path: String,
    pub kind: GapKind,
}

/// A FRIA value already captured that disagrees with the DPIA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub fria_path: String,
    pub dpia_value: Value,
    pub existing_value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefillResult {
    pub prefilled: FriaDescription,
    /// One entry per prefilled path.
    pub provenance: BTreeMap<String, FieldProvenance>,
    pub gaps: Vec<Gap>,
    pub conflicts: Vec<Conflict>,
}

impl PrefillResult {
    pub fn missing(&self) -> impl Iterator<Item = &str> {
        self.gaps
            .iter()
            .filter(|g| g.kind == GapKind::Missing)
            .map(|g| g.fria_path.as_str())
    }
}

/// Converts one DPIA leaf into the value of a FRIA leaf. Returns `None` when
/// the DPIA has nothing to offer or when the pair has no known conversion.
pub fn transform(d: &DpiaDescription, dpia_path: &str, fria_path: &str) -> Option<Value> {
    let non_empty = |v: Value| match &v {
        Value::Array(a) if a.is_empty() => None,
        Value::String(s) if s.is_empty() => None,
        Value::Null => None,
        _ => Some(v),
    };
    let v = match (dpia_path, fria_path) {
        ("purposes", "intended_purposes.developed") => serde_json::to_value(&d.purposes).ok()?,
        ("processing_operations", "involved_data.operations") => {
            Value::from(d.processing_operations.iter().map(|o| o.name.clone()).collect::<Vec<_>>())
        }
        ("personal_data", "involved_data.inputs") => serde_json::to_value(
            d.personal_data
                .iter()
                .filter(|p| p.role_in_system != DataRole::Output)
                .collect::<Vec<_>>(),
        )
        .ok()?,
        ("data_subjects", "involved_entities.ai_subjects") => serde_json::to_value(
            d.data_subjects
                .iter()
                .map(|s| EntityRef::new(s.name.clone(), s.name.clone(), &[EntityRole::AiSubject]))
                .collect::<Vec<_>>(),
        )
        .ok()?,
        ("entities", "involved_entities.deployer") => {
            let deployer = d.entities.iter().find(|e| e.has_role(EntityRole::Deployer)).or_else(|| {
                let mut controllers = d.entities.iter().filter(|e| e.has_role(EntityRole::Controller));
                match (controllers.next(), controllers.next()) {
                    (Some(only), None) => Some(only),
                    _ => None,
                }
            })?;
            serde_json::to_value(deployer).ok()?
        }
        ("duration", "deployment.duration_days") if d.duration.processing_days > 0 => {
            Value::from(d.duration.processing_days)
        }
        ("inferences", "operational.expected_outputs") => Value::from(d.inferences.join("; ")),
        _ => return None,
    };
    non_empty(v)
}

/// Ex-ante reuse: prefill an empty FRIA from a finished DPIA.
pub fn map_dpia_to_fria(d: &DpiaDescription, m: &MappingCatalog) -> PrefillResult {
    reconcile(&FriaDescription::default(), &BTreeSet::new(), d, m)
}

/// Ex-post reuse: merge a DPIA into a FRIA that is already partly captured.
/// Paths in `captured` keep their current value; where it differs from the
/// DPIA a conflict is reported for a person to settle.
pub fn reconcile(
    existing: &FriaDescription,
    captured: &BTreeSet<String>,
    d: &DpiaDescription,
    m: &MappingCatalog,
) -> PrefillResult {
    let mut value = serde_json::to_value(existing).expect("FRIA serializes");
    let mut provenance = BTreeMap::new();
    let mut conflicts = Vec::new();

    for entry in m.entries.iter().filter(|e| e.is_shared()) {
        let (Some(dp), Some(fp)) = (&entry.dpia_path, &entry.fria_path) else {
            continue;
        };
        let Some(incoming) = transform(d, dp, fp) else {
            continue;
        };
        if captured.contains(fp) {
            let current = get_path(&value, fp).cloned().unwrap_or(Value::Null);
            if current != incoming {
                conflicts.push(Conflict {
                    fria_path: fp.clone(),
                    dpia_value: incoming,
                    existing_value: current,
                });
            }
            continue;
        }
        if set_path(&mut value, fp, incoming) {
            provenance.insert(
                fp.clone(),
                FieldProvenance {
                    source_dpia_path: dp.clone(),
                    relation: entry.relation,
                },
            );
        }
    }

    let prefilled: FriaDescription = serde_json::from_value(value).expect("transforms produce FRIA-typed values");
    let gaps = fria_required_paths()
        .filter_map(|p| match provenance.get(p) {
            Some(prov) if prov.relation == Relation::Partial => Some(Gap {
                fria_path: p.to_string(),
                kind: GapKind::NeedsEnrichment,
            }),
            Some(_) => None,
            None if captured.contains(p) => None,
            None => Some(Gap {
                fria_path: p.to_string(),
                kind: GapKind::Missing,
            }),
        })
        .collect();
    PrefillResult {
        prefilled,
        provenance,
        gaps,
        conflicts,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualTrackPlan {
    pub shared_fields: Vec<(String, String)>,
    pub dpia_only: Vec<String>,
    pub fria_only: Vec<String>,
}

/// Which fields a concurrent DPIA and FRIA capture once, and which belong
/// to one assessment only. Assumes a catalog that passed the totality check.
pub fn plan_dual_track(m: &MappingCatalog) -> DualTrackPlan {
    let mut plan = DualTrackPlan {
        shared_fields: Vec::new(),
        dpia_only: Vec::new(),
        fria_only: Vec::new(),
    };
    for e in &m.entries {
        match (e.relation, &e.dpia_path, &e.fria_path) {
            (Relation::Equivalent | Relation::Partial, Some(d), Some(f)) => plan.shared_fields.push((d.clone(), f.clone())),
            (Relation::DpiaOnly, Some(d), _) => plan.dpia_only.push(d.clone()),
            (Relation::FriaOnly, _, Some(f)) => plan.fria_only.push(f.clone()),
            _ => {}
        }
    }
    plan.shared_fields.sort();
    plan.dpia_only.sort();
    plan.fria_only.sort();
    plan
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapItem {
    pub fria_path: String,
    pub kind: GapKind,
    pub question_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapGroup {
    pub category: String,
    pub items: Vec<GapItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub groups: Vec<GapGroup>,
    pub conflicts: Vec<Conflict>,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty() && self.conflicts.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &GapItem> {
        self.groups.iter().flat_map(|g| g.items.iter())
    }
}

pub fn gap_report(p: &PrefillResult, questions: &QuestionSet) -> GapReport {
    let mut groups = Vec::new();
    for category in FRIA_CATEGORIES {
        let items: Vec<GapItem> = p
            .gaps
            .iter()
            .filter(|g| fria_category(&g.fria_path) == category)
            .map(|g| GapItem {
                fria_path: g.fria_path.clone(),
                kind: g.kind,
                question_ids: questions
                    .questions
                    .iter()
                    .filter(|q| q.target_path == g.fria_path)
                    .map(|q| q.id.clone())
                    .collect(),
            })
            .collect();
        if !items.is_empty() {
            groups.push(GapGroup {
                category: category.to_string(),
                items,
            });
        }
    }
    GapReport {
        groups,
        conflicts: p.conflicts.clone(),
    }
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "No gaps.");
        }
        for g in &self.groups {
            writeln!(f, "{}:", g.category)?;
            for item in &g.items {
                let what = match item.kind {
                    GapKind::Missing => "missing",
                    GapKind::NeedsEnrichment => "needs enrichment",
                };
                writeln!(f, "  - {} ({what}) [{}]", item.fria_path, item.question_ids.join(", "))?;
            }
        }
        if !self.conflicts.is_empty() {
            writeln!(f, "conflicts:")?;
            for c in &self.conflicts {
                writeln!(
                    f,
                    "  - {}: DPIA says {} but the FRIA has {}",
                    c.fria_path, c.dpia_value, c.existing_value
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BridgeError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("the document has no DPIA section")]
    NoDpia,
    #[error("the DPIA is not usable: {0}")]
    Validation(ValidationReport),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedDpia {
    pub dpia: DpiaDescription,
    /// Issues that do not prevent reuse.
    pub report: ValidationReport,
}

/// Breaches that make a DPIA unusable as FRIA input: no purpose at all, or
/// an ordinal off the scale.
pub(crate) fn is_fatal(v: &crate::model::Violation) -> bool {
    (v.path == "purposes" && v.rule == "non-empty") || v.rule == "range-1-5"
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MinimalDpiaDocument {
    schema_version: String,
    dpia: Value,
}

/// Reads a DPIA from a full assessment document or from the minimal import
/// profile `{"schema_version": "1.0", "dpia": {...}}`.
pub fn import_dpia(bytes: &[u8]) -> Result<ImportedDpia, BridgeError> {
    let raw: Value = serde_json::from_slice(bytes).map_err(|e| DocumentError::Parse(e.to_string()))?;
    let dpia = if raw.get("assessment").is_some() {
        let assessment = document::import_assessment(bytes)?;
        assessment.dpia.ok_or(BridgeError::NoDpia)?
    } else {
        let doc: MinimalDpiaDocument =
            serde_json::from_value(raw).map_err(|e| DocumentError::Parse(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::SchemaVersion(doc.schema_version).into());
        }
        serde_json::from_value(doc.dpia).map_err(|e| DocumentError::Parse(e.to_string()))?
    };
    let report = dpia.validate();
    if report.violations.iter().any(is_fatal) {
        return Err(BridgeError::Validation(report));
    }
    Ok(ImportedDpia { dpia, report })
}

/// Serializes a DPIA in the minimal import profile.
pub fn export_minimal_dpia(d: &DpiaDescription) -> Vec<u8> {
    let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "dpia": d });
    crate::canonical::to_canonical_bytes(&doc).expect("DPIA serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Purpose, PurposeKind};

    #[test]
    fn fatal_breaches_stop_import() {
        let bytes = export_minimal_dpia(&DpiaDescription::default());
        match import_dpia(&bytes) {
            Err(BridgeError::Validation(r)) => assert!(r.has_violation_at("purposes")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_profile_round_trip() {
        let mut d = DpiaDescription::default();
        d.purposes.push(Purpose::new("p", "Border checks", PurposeKind::Deployment));
        d.legal_bases.push(crate::model::LegalBasis::LegitimateInterest);
        let imported = import_dpia(&export_minimal_dpia(&d)).unwrap();
        assert_eq!(imported.dpia, d);
        assert!(imported.report.has_violation_at("necessity_statement"));
    }

    #[test]
    fn unknown_schema_version() {
        let doc = br#"{"schema_version": "9.0", "dpia": {}}"#;
        assert!(matches!(
            import_dpia(doc),
            Err(BridgeError::Document(DocumentError::SchemaVersion(_)))
        ));
    }

    #[test]
    fn unknown_pairs_have_no_transform() {
        let d = DpiaDescription::default();
        assert_eq!(transform(&d, "legal_bases", "provenance.datasheets"), None);
    }
}
