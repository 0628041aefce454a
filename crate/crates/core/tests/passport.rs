use std::collections::BTreeSet;

use fria_core::catalog::CatalogSet;
use fria_core::fixtures::{passport_assessment, passport_profile, PASSENGERS};
use fria_core::model::StageState;
use fria_core::catalog::Outcome;
use fria_core::necessity::evaluate_fria_necessity;
use fria_core::rights_impact::ImpactCategory;
use fria_core::workflow;

#[test]
fn stage1_requires_fria_through_border_control() {
    let cats = CatalogSet::seed();
    let d = evaluate_fria_necessity(&passport_profile(), "IE".parse().unwrap(), &cats.conditions).unwrap();
    assert_eq!(d.outcome, Outcome::Required);
    assert!(d.fired_rules.iter().any(|f| f.rule_id == "art27.deployer"));
    let class = d.classification.unwrap();
    assert!(class.matches.iter().any(|m| m.rule_id == "annex3.7.d"));
}

#[test]
fn stage3_has_exclusion_for_passengers() {
    let cats = CatalogSet::seed();
    let a = passport_assessment(&cats, 3).unwrap();
    assert_eq!(a.stage(3), StageState::Complete);
    assert!(a
        .risks
        .iter()
        .flat_map(|r| &r.consequences)
        .any(|c| c.taxonomy_id == "c-exclusion" && c.affected_profile == PASSENGERS));
}

#[test]
fn stage4_limits_art21_with_escalation_and_oversight() {
    let cats = CatalogSet::seed();
    let a = passport_assessment(&cats, 4).unwrap();
    let art21 = a
        .impacts
        .iter()
        .find(|i| i.right.charter_article == 21 && i.affected_profile == PASSENGERS)
        .expect("art 21 impact");
    assert_eq!(art21.categories, BTreeSet::from([ImpactCategory::Limited]));
    assert_eq!(art21.escalates_to.as_ref().map(|e| e.category), Some(ImpactCategory::Violated));
    assert!(art21
        .remedial_measures
        .iter()
        .any(|m| m.description.contains("manual oversight")));
}

#[test]
fn report_is_deterministic() {
    let cats = CatalogSet::seed();
    let a = passport_assessment(&cats, 4).unwrap();
    let r1 = workflow::compile_report(&a, &cats, "officer").unwrap();
    let r2 = workflow::compile_report(&passport_assessment(&cats, 4).unwrap(), &cats, "officer").unwrap();
    assert_eq!(r1.bytes, r2.bytes);
    let closed = passport_assessment(&cats, 5).unwrap();
    assert_eq!(closed.stage(5), StageState::Complete);
}
