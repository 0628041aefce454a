//! Systematic description of personal-data processing, as collected for a DPIA.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::data::{DataRole, Ordinal, PersonalDataItem};
use super::entity::EntityRef;
use super::purpose::Purpose;
use super::validation::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingOperation {
    pub name: String,
    pub automation: bool,
    pub profiling: bool,
    pub scoring: bool,
    pub decision_making: bool,
}

impl ProcessingOperation {
    pub fn manual(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            automation: false,
            profiling: false,
            scoring: false,
            decision_making: false,
        }
    }

    pub fn automated(name: impl Into<String>) -> Self {
        Self {
            automation: true,
            ..Self::manual(name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSubjectCategory {
    pub name: String,
    pub vulnerable: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossBorderTransfer {
    pub transfers: bool,
    #[serde(default)]
    pub destinations: Vec<String>,
}

/// Scale of processing, kept as three independent dimensions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingScale {
    pub data: Ordinal,
    pub operations: Ordinal,
    pub subjects: Ordinal,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetentionPeriod {
    pub processing_days: u32,
    pub storage_days: u32,
    #[serde(default)]
    pub deletion_policy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LegalBasis {
    Consent,
    Contract,
    LegalObligation,
    VitalInterest,
    PublicTask,
    LegitimateInterest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Locality {
    PublicArea,
    Workplace,
    PrivateSpace,
    Online,
    /// Also the value of an empty description, where locality is not narrowed yet.
    #[default]
    Mixed,
}

impl Locality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Locality::PublicArea => "PublicArea",
            Locality::Workplace => "Workplace",
            Locality::PrivateSpace => "PrivateSpace",
            Locality::Online => "Online",
            Locality::Mixed => "Mixed",
        }
    }
}

/// Systematic description of a processing activity. Automation, profiling,
/// scoring and decision making are flags on each operation; data quality is
/// recorded per data item.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpiaDescription {
    pub purposes: Vec<Purpose>,
    pub processing_operations: Vec<ProcessingOperation>,
    pub personal_data: Vec<PersonalDataItem>,
    pub data_subjects: Vec<DataSubjectCategory>,
    pub entities: Vec<EntityRef>,
    pub cross_border: CrossBorderTransfer,
    pub scale: ProcessingScale,
    pub duration: RetentionPeriod,
    pub legal_bases: Vec<LegalBasis>,
    pub necessity_statement: String,
    pub proportionality_statement: String,
    pub inferences: Vec<String>,
    pub technical_measures: Vec<String>,
    pub organisational_measures: Vec<String>,
    pub locality: Locality,
}

/// Leaf paths of [`DpiaDescription`]. Value records (`cross_border`, `scale`,
/// `duration`) are single leaves.
pub const DPIA_LEAF_PATHS: [&str; 15] = [
    "purposes",
    "processing_operations",
    "personal_data",
    "data_subjects",
    "entities",
    "cross_border",
    "scale",
    "duration",
    "legal_bases",
    "necessity_statement",
    "proportionality_statement",
    "inferences",
    "technical_measures",
    "organisational_measures",
    "locality",
];

impl DpiaDescription {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        if self.purposes.is_empty() {
            report.push("purposes", "non-empty", "at least one purpose of processing is required");
        }
        validate_purposes(&mut report, "purposes", &self.purposes);

        for (i, op) in self.processing_operations.iter().enumerate() {
            if op.name.trim().is_empty() {
                report.push(
                    format!("processing_operations[{i}].name"),
                    "non-empty",
                    "operation name is empty",
                );
            }
        }

        validate_data_items(&mut report, "personal_data", &self.personal_data);
        validate_entities(&mut report, "entities", &self.entities, &mut BTreeSet::new());

        if self.cross_border.transfers && self.cross_border.destinations.is_empty() {
            report.push(
                "cross_border.destinations",
                "destinations-consistent",
                "cross-border transfer declared without destinations",
            );
        }
        if !self.cross_border.transfers && !self.cross_border.destinations.is_empty() {
            report.push(
                "cross_border.destinations",
                "destinations-consistent",
                "destinations listed but no cross-border transfer declared",
            );
        }

        check_ordinal(&mut report, "scale.data", self.scale.data);
        check_ordinal(&mut report, "scale.operations", self.scale.operations);
        check_ordinal(&mut report, "scale.subjects", self.scale.subjects);

        if self.legal_bases.contains(&LegalBasis::LegitimateInterest)
            && self.necessity_statement.trim().is_empty()
        {
            report.push(
                "necessity_statement",
                "necessity-for-legitimate-interest",
                "processing based on legitimate interests needs a necessity statement",
            );
        }

        report
    }

    pub fn has_special_category_data(&self) -> bool {
        self.personal_data.iter().any(|d| d.special_category)
    }
}

pub(crate) fn check_ordinal(report: &mut ValidationReport, path: &str, value: Ordinal) {
    if !value.is_valid() {
        report.push(path, "range-1-5", format!("value {} is outside 1-5", value.get()));
    }
}

pub(crate) fn validate_purposes(report: &mut ValidationReport, base: &str, purposes: &[Purpose]) {
    let mut seen = BTreeSet::new();
    for (i, p) in purposes.iter().enumerate() {
        if p.description.trim().is_empty() {
            report.push(
                format!("{base}[{i}].description"),
                "non-empty",
                "purpose description is empty",
            );
        }
        if !seen.insert(p.id.as_str()) {
            report.push(format!("{base}[{i}].id"), "unique-id", format!("duplicate purpose id '{}'", p.id));
        }
    }
}

pub(crate) fn validate_data_items(report: &mut ValidationReport, base: &str, items: &[PersonalDataItem]) {
    for (i, item) in items.iter().enumerate() {
        let at = format!("{base}[{i}]");
        if item.name.trim().is_empty() {
            report.push(format!("{at}.name"), "non-empty", "data item name is empty");
        }
        check_ordinal(report, &format!("{at}.quality.accuracy"), item.quality.accuracy);
        check_ordinal(report, &format!("{at}.quality.completeness"), item.quality.completeness);
        if item.is_inference
            && !matches!(item.role_in_system, DataRole::Output | DataRole::NotApplicable)
        {
            report.push(
                format!("{at}.role_in_system"),
                "inference-role",
                "inferred data can only be an output or not applicable",
            );
        }
    }
}

/// Checks entity invariants; `ids` accumulates identifiers so uniqueness can
/// span several lists of one description.
pub(crate) fn validate_entities<'a>(
    report: &mut ValidationReport,
    base: &str,
    entities: impl IntoIterator<Item = &'a EntityRef>,
    ids: &mut BTreeSet<String>,
) {
    for (i, e) in entities.into_iter().enumerate() {
        validate_entity(report, &format!("{base}[{i}]"), e, ids);
    }
}

pub(crate) fn validate_entity(report: &mut ValidationReport, at: &str, e: &EntityRef, ids: &mut BTreeSet<String>) {
    if e.id.trim().is_empty() {
        report.push(format!("{at}.id"), "non-empty", "entity id is empty");
    } else if !ids.insert(e.id.clone()) {
        report.push(format!("{at}.id"), "unique-id", format!("entity id '{}' is used twice", e.id));
    }
    if e.roles.is_empty() {
        report.push(format!("{at}.roles"), "non-empty", "entity has no role");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::purpose::PurposeKind;

    fn minimal() -> DpiaDescription {
        DpiaDescription {
            purposes: vec![Purpose::new("p1", "Payroll", PurposeKind::DataCollection)],
            ..Default::default()
        }
    }

    #[test]
    fn empty_purposes_is_reported() {
        let report = DpiaDescription::default().validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.path == "purposes" && v.rule == "non-empty"));
    }

    #[test]
    fn legitimate_interest_needs_necessity_statement() {
        let mut d = minimal();
        d.legal_bases = vec![LegalBasis::LegitimateInterest];
        let report = d.validate();
        assert!(report.has_violation_at("necessity_statement"));

        d.necessity_statement = "Fraud prevention cannot be achieved without it.".into();
        assert!(d.validate().is_empty());
    }

    #[test]
    fn out_of_range_ordinals_are_located() {
        let mut d = minimal();
        d.scale.subjects = Ordinal(0);
        d.personal_data = vec![PersonalDataItem::new("email", DataRole::Input).with_quality(6, 3)];
        let report = d.validate();
        assert!(report.has_violation_at("scale.subjects"));
        assert!(report.has_violation_at("personal_data[0].quality.accuracy"));
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn inference_must_be_output() {
        let mut d = minimal();
        d.personal_data = vec![PersonalDataItem::new("credit score", DataRole::Input).inferred()];
        assert!(d.validate().has_violation_at("personal_data[0].role_in_system"));
    }

    #[test]
    fn validation_is_deterministic() {
        let mut d = DpiaDescription::default();
        d.scale.data = Ordinal(9);
        d.cross_border.transfers = true;
        assert_eq!(d.validate(), d.validate());
    }
}
