use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::dpia::{DpiaDescription, Locality, ProcessingScale};
use super::entity::EntityRole;

/// Feature summary of a processing activity, the part of a DPIA that
/// necessity rules look at.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataProfile {
    pub processes_personal_data: bool,
    pub special_category: bool,
    pub automated_processing: bool,
    pub profiling_or_scoring: bool,
    pub automated_decision_making: bool,
    pub vulnerable_subjects: bool,
    pub cross_border: bool,
    pub scale: ProcessingScale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality: Option<Locality>,
}

impl DataProfile {
    pub fn from_description(d: &DpiaDescription) -> Self {
        Self {
            processes_personal_data: !d.personal_data.is_empty(),
            special_category: d.has_special_category_data(),
            automated_processing: d.processing_operations.iter().any(|o| o.automation),
            profiling_or_scoring: d.processing_operations.iter().any(|o| o.profiling || o.scoring),
            automated_decision_making: d
                .processing_operations
                .iter()
                .any(|o| o.automation && o.decision_making),
            vulnerable_subjects: d.data_subjects.iter().any(|s| s.vulnerable),
            cross_border: d.cross_border.transfers,
            scale: d.scale,
            locality: Some(d.locality),
        }
    }
}

/// What is known about an AI system before any assessment stage runs:
/// the assessing entity's roles, the high-risk areas the system is tagged
/// with and any claimed exceptions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemProfile {
    pub roles: BTreeSet<EntityRole>,
    /// Annex III sub-point tags such as `annex3.7.d`.
    #[serde(default)]
    pub annex_areas: BTreeSet<String>,
    /// Annex I harmonisation-legislation tags such as `annex1.a.12`.
    #[serde(default)]
    pub annex_i_areas: BTreeSet<String>,
    #[serde(default)]
    pub third_party_conformity: bool,
    /// Claimed exception flags such as `art6.3.a`.
    #[serde(default)]
    pub exemptions: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataProfile>,
    /// Extra facts for catalog rules that need more than the fields above.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, serde_json::Value>,
}

impl SystemProfile {
    pub fn deployer() -> Self {
        Self {
            roles: [EntityRole::Deployer].into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn with_areas<I: IntoIterator<Item = S>, S: Into<String>>(mut self, areas: I) -> Self {
        self.annex_areas.extend(areas.into_iter().map(Into::into));
        self
    }

    pub fn with_data(mut self, data: DataProfile) -> Self {
        self.data = Some(data);
        self
    }
}
