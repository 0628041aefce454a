use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::remedies::RemedialMeasure;
use super::rules::{Escalation, ImpactCategory, ImpactRuleSet};
use super::ImpactError;
use crate::catalog::{FundamentalRight, RightsCatalog};
use crate::intake::AffectedPersonProfile;
use crate::risk::{ConsequenceRef, RiskItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ImpactStatus {
    #[default]
    Open,
    Resolved,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RightsImpact {
    pub id: String,
    pub rule_id: String,
    pub risk_id: String,
    pub right: FundamentalRight,
    pub affected_profile: String,
    pub via_consequence: ConsequenceRef,
    pub categories: BTreeSet<ImpactCategory>,
    pub escalates_to: Option<Escalation>,
    /// Set when an escalation has been applied to `categories`.
    #[serde(default)]
    pub escalation_note: Option<String>,
    pub remedial_measures: Vec<RemedialMeasure>,
    pub status: ImpactStatus,
}

impl RightsImpact {
    /// Adds the escalated category when the impact is left unresolved.
    pub fn materialize_escalation(&self) -> RightsImpact {
        let mut out = self.clone();
        if self.status != ImpactStatus::Unresolved {
            return out;
        }
        if let Some(e) = self.escalates_to {
            if out.categories.insert(e.category) {
                out.escalation_note = Some(format!("{} because the impact was left unresolved", e.category));
            }
        }
        out
    }
}

/// A consequence no impact rule matched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leftover {
    pub risk_id: String,
    pub consequence: ConsequenceRef,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Derivation {
    pub impacts: Vec<RightsImpact>,
    pub leftovers: Vec<Leftover>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Categories(BTreeSet<ImpactCategory>),
    Unclassified,
}

/// Union of the categories of every rule that matches the consequence, the
/// right and the person.
pub fn classify_impact(
    consequence: &ConsequenceRef,
    right: &FundamentalRight,
    person: &AffectedPersonProfile,
    rules: &ImpactRuleSet,
) -> Classification {
    let cats: BTreeSet<ImpactCategory> = rules
        .rules
        .iter()
        .filter(|r| r.consequence_kind == consequence.taxonomy_id && r.right == right.charter_article)
        .filter(|r| r.right_exercise.is_none_or(|e| e == right.exercise))
        .filter(|r| r.person_condition.eval(person).unwrap_or(false))
        .flat_map(|r| r.categories.iter().copied())
        .collect();
    if cats.is_empty() {
        Classification::Unclassified
    } else {
        Classification::Categories(cats)
    }
}

/// Applies the impact rules to every consequence of every scored risk.
/// Consequences that match nothing, or whose risk is still unscored, are
/// listed as leftovers so that nothing is silently dropped.
pub fn derive_rights_impacts(
    risks: &[RiskItem],
    profiles: &[AffectedPersonProfile],
    rules: &ImpactRuleSet,
    rights: &RightsCatalog,
) -> Result<Derivation, ImpactError> {
    let mut out = Derivation::default();
    for risk in risks {
        for (ci, c) in risk.consequences.iter().enumerate() {
            let person = profiles
                .iter()
                .find(|p| p.id == c.affected_profile)
                .ok_or_else(|| ImpactError::DanglingRef(format!("{}: profile '{}'", risk.id, c.affected_profile)))?;
            if !risk.is_scored() {
                out.leftovers.push(Leftover {
                    risk_id: risk.id.clone(),
                    consequence: c.clone(),
                    reason: "risk is not scored yet".into(),
                });
                continue;
            }
            let before = out.impacts.len();
            for rule in rules.rules.iter().filter(|r| r.consequence_kind == c.taxonomy_id) {
                let right = rights
                    .get(rule.right)
                    .ok_or_else(|| ImpactError::DanglingRef(format!("{}: right Art.{}", rule.id, rule.right)))?;
                if rule.right_exercise.is_some_and(|e| e != right.exercise) {
                    continue;
                }
                let holds = rule
                    .person_condition
                    .eval(person)
                    .map_err(|e| ImpactError::Condition {
                        rule_id: rule.id.clone(),
                        detail: e.to_string(),
                    })?;
                if !holds {
                    continue;
                }
                out.impacts.push(RightsImpact {
                    id: format!("{}/{}/{}", risk.id, ci + 1, rule.id),
                    rule_id: rule.id.clone(),
                    risk_id: risk.id.clone(),
                    right: right.clone(),
                    affected_profile: person.id.clone(),
                    via_consequence: c.clone(),
                    categories: rule.categories.clone(),
                    escalates_to: rule.escalates_to,
                    escalation_note: None,
                    remedial_measures: Vec::new(),
                    status: ImpactStatus::Open,
                });
            }
            if out.impacts.len() == before {
                out.leftovers.push(Leftover {
                    risk_id: risk.id.clone(),
                    consequence: c.clone(),
                    reason: "no impact rule matches this consequence and person".into(),
                });
            }
        }
    }
    Ok(out)
}
