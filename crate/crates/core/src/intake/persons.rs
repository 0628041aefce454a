use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{FactSource, FactValue};
use crate::model::{FriaDescription, InteractionContext, Relationship, SubjectControl, VulnerabilityBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PersonRole {
    User,
    AiSubject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posture {
    pub active: bool,
    pub intended: bool,
    pub informed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffectedPersonProfile {
    /// Stable reference, `user:<entity id>` or `subject:<entity id>`.
    pub id: String,
    pub subject_ref: String,
    pub role: PersonRole,
    pub category: String,
    pub relation: Option<Relationship>,
    pub posture: Posture,
    pub vulnerable: bool,
    pub vulnerability_basis: Option<VulnerabilityBasis>,
    pub controls: BTreeSet<SubjectControl>,
    pub potentially_excluded: bool,
}

impl AffectedPersonProfile {
    pub fn profile_id(role: PersonRole, entity_id: &str) -> String {
        match role {
            PersonRole::User => format!("user:{entity_id}"),
            PersonRole::AiSubject => format!("subject:{entity_id}"),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.vulnerable == self.vulnerability_basis.is_some()
    }
}

impl FactSource for AffectedPersonProfile {
    fn fact(&self, name: &str) -> Option<FactValue> {
        let v = match name {
            "role" => FactValue::Text(format!("{:?}", self.role)),
            "category" => FactValue::Text(self.category.clone()),
            "relation" => FactValue::Text(self.relation.map_or("None", |r| r.as_str()).to_string()),
            "active" => FactValue::Bool(self.posture.active),
            "intended" => FactValue::Bool(self.posture.intended),
            "informed" => FactValue::Bool(self.posture.informed),
            "vulnerable" => FactValue::Bool(self.vulnerable),
            "vulnerability_basis" => {
                FactValue::Text(self.vulnerability_basis.map_or("None", |b| b.as_str()).to_string())
            }
            "controls" => FactValue::tags(self.controls.iter().map(|c| c.as_str())),
            "potentially_excluded" => FactValue::Bool(self.potentially_excluded),
            _ => return None,
        };
        Some(v)
    }
}

/// Field dictionary for predicates over affected-person profiles.
pub fn person_fields() -> BTreeMap<String, crate::catalog::FieldType> {
    use crate::catalog::FieldType::*;
    [
        ("role", Text),
        ("category", Text),
        ("relation", Text),
        ("active", Bool),
        ("intended", Bool),
        ("informed", Bool),
        ("vulnerable", Bool),
        ("vulnerability_basis", Text),
        ("controls", Tags),
        ("potentially_excluded", Bool),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// One profile per user and per AI subject. Users without an interaction
/// context are taken to be active, intended and informed; anyone not
/// intended to meet the system is treated as potentially excluded.
pub fn classify_affected_persons(f: &FriaDescription) -> Vec<AffectedPersonProfile> {
    let ie = &f.involved_entities;
    let with_role = |role: PersonRole| {
        move |e: &crate::model::EntityRef| {
            let ctx = ie.interaction_context.get(&e.id).copied().unwrap_or_else(InteractionContext::default);
            AffectedPersonProfile {
                id: AffectedPersonProfile::profile_id(role, &e.id),
                subject_ref: e.id.clone(),
                role,
                category: e.name.clone(),
                relation: e.relationship_to_deployer,
                posture: Posture {
                    active: ctx.active,
                    intended: ctx.intended,
                    informed: ctx.informed,
                },
                vulnerable: ctx.vulnerability.is_some(),
                vulnerability_basis: ctx.vulnerability,
                controls: ie.subject_controls.clone(),
                potentially_excluded: !ctx.intended,
            }
        }
    };
    ie.users
        .iter()
        .map(with_role(PersonRole::User))
        .chain(ie.ai_subjects.iter().map(with_role(PersonRole::AiSubject)))
        .collect()
}
