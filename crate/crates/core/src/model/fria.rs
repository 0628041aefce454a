//! Description of an AI system deployment, grouped in six categories.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::data::{Ordinal, PersonalDataItem};
use super::dpia::{check_ordinal, validate_data_items, validate_entities, validate_entity, validate_purposes};
use super::entity::EntityRef;
use super::purpose::Purpose;
use super::validation::ValidationReport;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntendedPurposes {
    pub developed: Vec<Purpose>,
    pub marketed: Vec<Purpose>,
    pub data_collection: Vec<Purpose>,
}

/// What an affected person can do with the system's output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubjectControl {
    ViewOutput,
    CorrectOutput,
    OptIn,
    OptOut,
    #[serde(rename = "None")]
    NoControl,
}

impl SubjectControl {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubjectControl::ViewOutput => "ViewOutput",
            SubjectControl::CorrectOutput => "CorrectOutput",
            SubjectControl::OptIn => "OptIn",
            SubjectControl::OptOut => "OptOut",
            SubjectControl::NoControl => "None",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VulnerabilityBasis {
    /// Vulnerable by nature, e.g. minors.
    Nature,
    /// Vulnerable by social position, e.g. members of a protected group.
    SocialVulnerability,
}

impl VulnerabilityBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            VulnerabilityBasis::Nature => "Nature",
            VulnerabilityBasis::SocialVulnerability => "SocialVulnerability",
        }
    }
}

/// How a subject meets the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionContext {
    pub active: bool,
    pub intended: bool,
    pub informed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vulnerability: Option<VulnerabilityBasis>,
}

impl Default for InteractionContext {
    fn default() -> Self {
        Self {
            active: true,
            intended: true,
            informed: true,
            vulnerability: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolvedEntities {
    pub deployer: Option<EntityRef>,
    pub provider: Option<EntityRef>,
    pub can_update_system: bool,
    pub users: Vec<EntityRef>,
    pub ai_subjects: Vec<EntityRef>,
    /// Keyed by the id of an entry in `users` or `ai_subjects`.
    pub interaction_context: BTreeMap<String, InteractionContext>,
    pub subject_controls: BTreeSet<SubjectControl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolvedData {
    pub inputs: Vec<PersonalDataItem>,
    pub operations: Vec<String>,
    pub outputs: Vec<PersonalDataItem>,
    pub output_is_profiling: bool,
    pub output_is_decision: bool,
    pub special_category: bool,
    /// Only asked when `special_category` holds.
    pub special_category_scale: Option<Ordinal>,
    pub special_category_safeguards: Vec<String>,
}

impl InvolvedData {
    pub fn items(&self) -> impl Iterator<Item = &PersonalDataItem> {
        self.inputs.iter().chain(self.outputs.iter())
    }
}

/// Days and uses per day are the units for duration and frequency.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deployment {
    pub integrations: Vec<String>,
    pub modality: String,
    pub hardware_software: Vec<String>,
    pub user_interface: String,
    pub duration_days: u32,
    pub frequency_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Datasheet {
    pub reference: String,
    pub covers: String,
    #[serde(default)]
    pub known_bias: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifecycleChange {
    pub date: NaiveDate,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub development_summary: String,
    pub datasheets: Vec<Datasheet>,
    pub lifecycle_changes: Vec<LifecycleChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceMetric {
    pub value: f64,
    pub appropriateness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operational {
    pub expected_outputs: String,
    pub logic_summary: String,
    pub predetermined_changes: Vec<String>,
    pub performance_metrics: BTreeMap<String, PerformanceMetric>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriaDescription {
    pub intended_purposes: IntendedPurposes,
    pub involved_entities: InvolvedEntities,
    pub involved_data: InvolvedData,
    pub deployment: Deployment,
    pub provenance: Provenance,
    pub operational: Operational,
}

impl FriaDescription {
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let ip = &self.intended_purposes;
        if ip.developed.is_empty() {
            report.push(
                "intended_purposes.developed",
                "non-empty",
                "at least one intended purpose is required",
            );
        }
        validate_purposes(&mut report, "intended_purposes.developed", &ip.developed);
        validate_purposes(&mut report, "intended_purposes.marketed", &ip.marketed);
        validate_purposes(&mut report, "intended_purposes.data_collection", &ip.data_collection);

        let ie = &self.involved_entities;
        let mut ids = BTreeSet::new();
        match &ie.deployer {
            None => report.push("involved_entities.deployer", "present", "the deployer is missing"),
            Some(d) => validate_entity(&mut report, "involved_entities.deployer", d, &mut ids),
        }
        if let Some(p) = &ie.provider {
            validate_entity(&mut report, "involved_entities.provider", p, &mut ids);
        }
        validate_entities(&mut report, "involved_entities.users", &ie.users, &mut ids);
        // A person can be both user and subject, so subjects get their own id space.
        validate_entities(&mut report, "involved_entities.ai_subjects", &ie.ai_subjects, &mut BTreeSet::new());
        for (i, s) in ie.ai_subjects.iter().enumerate() {
            if !ie.interaction_context.contains_key(&s.id) {
                report.push(
                    format!("involved_entities.interaction_context[{i}]"),
                    "subject-context",
                    format!("AI subject '{}' has no interaction context", s.id),
                );
            }
        }
        let known: BTreeSet<&str> = ie
            .users
            .iter()
            .chain(ie.ai_subjects.iter())
            .map(|e| e.id.as_str())
            .collect();
        for key in ie.interaction_context.keys() {
            if !known.contains(key.as_str()) {
                report.push(
                    "involved_entities.interaction_context",
                    "known-subject",
                    format!("interaction context for unknown entity '{key}'"),
                );
            }
        }
        if ie.subject_controls.contains(&SubjectControl::NoControl) && ie.subject_controls.len() > 1 {
            report.push(
                "involved_entities.subject_controls",
                "none-exclusive",
                "'None' cannot be combined with other controls",
            );
        }

        let data = &self.involved_data;
        validate_data_items(&mut report, "involved_data.inputs", &data.inputs);
        validate_data_items(&mut report, "involved_data.outputs", &data.outputs);
        if data.items().any(|d| d.special_category) && !data.special_category {
            report.push(
                "involved_data.special_category",
                "special-category-consistent",
                "special category data items are listed but the flag is not set",
            );
        }
        match (data.special_category, data.special_category_scale) {
            (true, None) => report.push(
                "involved_data.special_category_scale",
                "present",
                "scale of special category processing is required",
            ),
            (_, Some(scale)) => check_ordinal(&mut report, "involved_data.special_category_scale", scale),
            (false, None) => {}
        }

        let dep = &self.deployment;
        if dep.duration_days == 0 {
            report.push("deployment.duration_days", "positive", "duration of use must be at least one day");
        }
        if !dep.frequency_per_day.is_finite() || dep.frequency_per_day < 0.0 {
            report.push(
                "deployment.frequency_per_day",
                "non-negative",
                "frequency of use must be a finite, non-negative number",
            );
        }

        for (name, metric) in &self.operational.performance_metrics {
            if !metric.value.is_finite() {
                report.push(
                    format!("operational.performance_metrics.{name}"),
                    "finite",
                    "metric value must be finite",
                );
            }
        }

        report
    }

    /// Entities whose posture matters for impacts: users first, then AI subjects.
    pub fn persons(&self) -> impl Iterator<Item = &EntityRef> {
        self.involved_entities
            .users
            .iter()
            .chain(self.involved_entities.ai_subjects.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::entity::EntityRole;
    use crate::model::purpose::PurposeKind;

    fn base() -> FriaDescription {
        let mut f = FriaDescription::default();
        f.intended_purposes.developed = vec![Purpose::new("p", "Identity check", PurposeKind::Development)];
        f.involved_entities.deployer = Some(EntityRef::new("dep", "Border agency", &[EntityRole::Deployer]));
        f.deployment.duration_days = 30;
        f
    }

    #[test]
    fn base_is_valid() {
        assert!(base().validate().is_empty(), "{}", base().validate());
    }

    #[test]
    fn missing_deployer() {
        let mut f = base();
        f.involved_entities.deployer = None;
        assert!(f.validate().has_violation_at("involved_entities.deployer"));
    }

    #[test]
    fn subject_without_context() {
        let mut f = base();
        f.involved_entities.ai_subjects = vec![EntityRef::new("pax", "Passenger", &[EntityRole::AiSubject])];
        let report = f.validate();
        assert_eq!(report.len(), 1);
        assert!(report.under("involved_entities.interaction_context").next().is_some());

        f.involved_entities
            .interaction_context
            .insert("pax".into(), InteractionContext::default());
        assert!(f.validate().is_empty());
    }

    #[test]
    fn special_category_follow_ups() {
        let mut f = base();
        f.involved_data.special_category = true;
        assert!(f.validate().has_violation_at("involved_data.special_category_scale"));
        f.involved_data.special_category_scale = Some(Ordinal(4));
        assert!(f.validate().is_empty());

        f.involved_data.special_category = false;
        f.involved_data.special_category_scale = None;
        f.involved_data.inputs = vec![PersonalDataItem::new("face", crate::model::DataRole::Input).special()];
        assert!(f.validate().has_violation_at("involved_data.special_category"));
    }

    #[test]
    fn zero_duration_and_bad_frequency() {
        let mut f = base();
        f.deployment.duration_days = 0;
        f.deployment.frequency_per_day = f64::NAN;
        let report = f.validate();
        assert!(report.has_violation_at("deployment.duration_days"));
        assert!(report.has_violation_at("deployment.frequency_per_day"));
    }
}
