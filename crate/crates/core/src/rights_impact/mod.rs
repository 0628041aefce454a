//! Stage 5: from risk consequences to affected fundamental rights.

mod impact;
mod remedies;
mod rules;

use thiserror::Error;

pub use impact::{classify_impact, derive_rights_impacts, Classification, Derivation, ImpactStatus, Leftover, RightsImpact};
pub use remedies::{suggest_remedies, RemedialMeasure};
pub use rules::{load_impact_rules, Escalation, EscalationCondition, ImpactCategory, ImpactRule, ImpactRuleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImpactError {
    #[error("dangling reference: {0}")]
    DanglingRef(String),
    #[error("rule '{rule_id}' could not be evaluated: {detail}")]
    Condition { rule_id: String, detail: String },
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::catalog::{CatalogSet, Exercise, Predicate};
    use crate::intake::{AffectedPersonProfile, PersonRole, Posture};
    use crate::model::VulnerabilityBasis;
    use crate::risk::{ConsequenceRef, Lasting, RiskItem};

    fn person(id: &str, basis: Option<VulnerabilityBasis>) -> AffectedPersonProfile {
        AffectedPersonProfile {
            id: AffectedPersonProfile::profile_id(PersonRole::AiSubject, id),
            subject_ref: id.into(),
            role: PersonRole::AiSubject,
            category: id.into(),
            relation: None,
            posture: Posture {
                active: true,
                intended: true,
                informed: true,
            },
            vulnerable: basis.is_some(),
            vulnerability_basis: basis,
            controls: BTreeSet::new(),
            potentially_excluded: false,
        }
    }

    fn risk(kind: &str, profile: &str) -> RiskItem {
        let mut r = RiskItem::draft("r1", "r-stops-working", &["s-system"], "t").scored(3, 3);
        r.consequences.push(ConsequenceRef {
            taxonomy_id: kind.into(),
            affected_profile: profile.into(),
            significant: true,
            lasting: Lasting::Temporary,
        });
        r
    }

    #[test]
    fn exclusion_of_socially_vulnerable_limits_art21_and_art45() {
        let cats = CatalogSet::seed();
        let p = person("refugees", Some(VulnerabilityBasis::SocialVulnerability));
        let d = derive_rights_impacts(&[risk("c-exclusion", &p.id)], &[p], &cats.impact_rules, &cats.rights).unwrap();
        let arts: BTreeSet<u16> = d.impacts.iter().map(|i| i.right.charter_article).collect();
        assert_eq!(arts, BTreeSet::from([21, 45]));
        assert!(d.impacts.iter().all(|i| i.categories == BTreeSet::from([ImpactCategory::Limited])));
        assert!(d.leftovers.is_empty());
    }

    #[test]
    fn unmatched_consequence_is_a_leftover() {
        let cats = CatalogSet::seed();
        let p = person("x", None);
        let d = derive_rights_impacts(&[risk("c-cyber", &p.id)], &[p], &cats.impact_rules, &cats.rights).unwrap();
        assert!(d.impacts.is_empty());
        assert_eq!(d.leftovers.len(), 1);
    }

    #[test]
    fn unknown_profile_is_dangling() {
        let cats = CatalogSet::seed();
        let err = derive_rights_impacts(&[risk("c-exclusion", "subject:ghost")], &[], &cats.impact_rules, &cats.rights);
        assert!(matches!(err, Err(ImpactError::DanglingRef(_))));
    }

    #[test]
    fn escalation_applies_only_when_unresolved() {
        let cats = CatalogSet::seed();
        let p = person("x", None);
        let d = derive_rights_impacts(&[risk("c-denial", &p.id)], &[p], &cats.impact_rules, &cats.rights).unwrap();
        let mut i = d.impacts[0].clone();
        assert_eq!(i.materialize_escalation().categories, i.categories);
        i.status = ImpactStatus::Unresolved;
        let esc = i.materialize_escalation();
        assert!(esc.categories.contains(&ImpactCategory::Violated));
        assert!(esc.escalation_note.is_some());
    }

    #[test]
    fn active_right_rule_yields_obstructed() {
        let cats = CatalogSet::seed();
        let rule = ImpactRule {
            id: "obstruct-art47".into(),
            consequence_kind: "c-delays".into(),
            person_condition: Predicate::and(vec![]),
            right: 47,
            categories: BTreeSet::from([ImpactCategory::Obstructed]),
            escalates_to: None,
            right_exercise: Some(Exercise::Active),
        };
        let rules = cats
            .impact_rules
            .with_rule(rule, &cats.rights, &cats.taxonomies.consequences)
            .unwrap();
        let p = person("x", None);
        let c = &risk("c-delays", &p.id).consequences[0];
        let art47 = cats.rights.get(47).unwrap();
        assert_eq!(art47.exercise, Exercise::Active);
        assert_eq!(
            classify_impact(c, art47, &p, &rules),
            Classification::Categories(BTreeSet::from([ImpactCategory::Obstructed]))
        );
        let art21 = cats.rights.get(21).unwrap();
        assert_eq!(classify_impact(c, art21, &p, &rules), Classification::Unclassified);
    }

    #[test]
    fn limited_remedies_are_drafts_for_limited() {
        let cats = CatalogSet::seed();
        let p = person("x", None);
        let d = derive_rights_impacts(&[risk("c-exclusion", &p.id)], &[p], &cats.impact_rules, &cats.rights).unwrap();
        let remedies = suggest_remedies(&d.impacts[0], &cats.taxonomies.mitigations);
        assert!(!remedies.is_empty());
        assert!(remedies.iter().all(|r| r.draft && r.addresses == ImpactCategory::Limited));
        assert!(remedies.iter().any(|r| r.description.contains("alternative mechanism")));
    }
}
