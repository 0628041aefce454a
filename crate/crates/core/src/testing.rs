//! Proptest strategies for the model types. Values produced by the `valid_*`
//! strategies pass validation against the seed catalogs.

use std::sync::OnceLock;

use chrono::{Duration, TimeZone, Utc};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::sample::select;
use serde_json::json;

use crate::catalog::{CatalogSet, Taxonomy};
use crate::model::{
    Assessment, ChangeContext, CrossBorderTransfer, DataProfile, DataRole, DataSubjectCategory, DpiaDescription,
    EntityRef, EntityRole, Jurisdiction, LegalBasis, Locality, Ordinal, PersonalDataItem, ProcessingOperation,
    ProcessingScale, Purpose, PurposeKind, RetentionPeriod, SystemProfile,
};
use crate::risk::{ConsequenceRef, Lasting, MitigationRef, RiskItem, Strategy as Mitigation};
use crate::workflow;

fn ids(t: &Taxonomy) -> Vec<String> {
    t.entries.iter().map(|e| e.id.clone()).collect()
}

pub fn word() -> impl Strategy<Value = String> {
    "[a-z]{3,10}"
}

pub fn text() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z ,.]{0,40}"
}

pub fn ordinal() -> impl Strategy<Value = Ordinal> {
    (1u8..=5).prop_map(Ordinal)
}

pub fn jurisdiction() -> impl Strategy<Value = Jurisdiction> {
    select(Jurisdiction::all().collect::<Vec<_>>())
}

pub fn locality() -> impl Strategy<Value = Locality> {
    select(vec![
        Locality::PublicArea,
        Locality::Workplace,
        Locality::PrivateSpace,
        Locality::Online,
        Locality::Mixed,
    ])
}

pub fn scale() -> impl Strategy<Value = ProcessingScale> {
    (ordinal(), ordinal(), ordinal()).prop_map(|(data, operations, subjects)| ProcessingScale {
        data,
        operations,
        subjects,
    })
}

fn purpose_kind() -> impl Strategy<Value = PurposeKind> {
    select(vec![
        PurposeKind::Development,
        PurposeKind::MarketPlacement,
        PurposeKind::DataCollection,
        PurposeKind::Deployment,
    ])
}

/// Purposes with distinct ids.
pub fn purposes(min: usize) -> impl Strategy<Value = Vec<Purpose>> {
    vec((text(), purpose_kind(), btree_set(word(), 0..3), btree_set(word(), 0..3)), min..4).prop_map(|ps| {
        ps.into_iter()
            .enumerate()
            .map(|(i, (d, k, dom, cap))| {
                Purpose::new(format!("p{}", i + 1), format!("P{d}"), k)
                    .with_domains(dom)
                    .with_capabilities(cap)
            })
            .collect()
    })
}

pub fn data_item() -> impl Strategy<Value = PersonalDataItem> {
    let role = select(vec![
        DataRole::Input,
        DataRole::Output,
        DataRole::Training,
        DataRole::Validation,
        DataRole::NotApplicable,
    ]);
    (word(), role, any::<bool>(), any::<bool>(), 1u8..=5, 1u8..=5).prop_map(|(name, role, special, inferred, a, c)| {
        let mut item = PersonalDataItem::new(name, role).with_quality(a, c);
        item.special_category = special;
        item.is_inference = inferred && matches!(role, DataRole::Output | DataRole::NotApplicable);
        item
    })
}

fn role() -> impl Strategy<Value = EntityRole> {
    select(EntityRole::ALL.to_vec())
}

/// Entities with distinct ids and at least one role each.
pub fn entities(max: usize) -> impl Strategy<Value = Vec<EntityRef>> {
    vec((text(), btree_set(role(), 1..3)), 0..max).prop_map(|es| {
        es.into_iter()
            .enumerate()
            .map(|(i, (name, roles))| {
                let roles: Vec<_> = roles.into_iter().collect();
                EntityRef::new(format!("e{}", i + 1), format!("E{name}"), &roles)
            })
            .collect()
    })
}

fn operation() -> impl Strategy<Value = ProcessingOperation> {
    (word(), any::<[bool; 4]>()).prop_map(|(name, [automation, profiling, scoring, decision_making])| {
        ProcessingOperation {
            name,
            automation,
            profiling,
            scoring,
            decision_making,
        }
    })
}

fn legal_basis() -> impl Strategy<Value = LegalBasis> {
    select(vec![
        LegalBasis::Consent,
        LegalBasis::Contract,
        LegalBasis::LegalObligation,
        LegalBasis::VitalInterest,
        LegalBasis::PublicTask,
        LegalBasis::LegitimateInterest,
    ])
}

/// DPIAs that pass `DpiaDescription::validate`.
pub fn valid_dpia() -> impl Strategy<Value = DpiaDescription> {
    let head = (
        purposes(1),
        vec(operation(), 0..4),
        vec(data_item(), 0..5),
        vec((word(), any::<bool>()), 0..3),
        entities(4),
        vec("[A-Z]{2}", 0..3),
        scale(),
    );
    let tail = (
        (0u32..2000, 0u32..4000, text()),
        btree_set(legal_basis(), 0..3),
        (text(), text()),
        vec(text(), 0..3),
        vec(text(), 0..3),
        vec(text(), 0..3),
        locality(),
    );
    (head, tail).prop_map(
        |(
            (purposes, processing_operations, personal_data, subjects, entities, destinations, scale),
            ((processing_days, storage_days, deletion_policy), legal_bases, (necessity, proportionality), inferences, tech, org, locality),
        )| {
            let mut necessity_statement = necessity;
            if legal_bases.contains(&LegalBasis::LegitimateInterest) && necessity_statement.trim().is_empty() {
                necessity_statement = "Needed for the stated interest".into();
            }
            DpiaDescription {
                purposes,
                processing_operations,
                personal_data,
                data_subjects: subjects
                    .into_iter()
                    .map(|(name, vulnerable)| DataSubjectCategory { name, vulnerable })
                    .collect(),
                entities,
                cross_border: CrossBorderTransfer {
                    transfers: !destinations.is_empty(),
                    destinations,
                },
                scale,
                duration: RetentionPeriod {
                    processing_days,
                    storage_days,
                    deletion_policy,
                },
                legal_bases: legal_bases.into_iter().collect(),
                necessity_statement,
                proportionality_statement: proportionality,
                inferences,
                technical_measures: tech,
                organisational_measures: org,
                locality,
            }
        },
    )
}

pub fn data_profile() -> impl Strategy<Value = DataProfile> {
    (any::<[bool; 7]>(), scale(), proptest::option::of(locality())).prop_map(|(b, scale, locality)| DataProfile {
        processes_personal_data: b[0],
        special_category: b[1],
        automated_processing: b[2],
        profiling_or_scoring: b[3],
        automated_decision_making: b[4],
        vulnerable_subjects: b[5],
        cross_border: b[6],
        scale,
        locality,
    })
}

/// Profiles using only area, exemption and role tags known to the seed catalog.
pub fn system_profile() -> impl Strategy<Value = SystemProfile> {
    let cats = CatalogSet::seed();
    let areas: Vec<String> = cats.conditions.rules.iter().filter_map(|r| r.area.clone()).collect();
    let annex3: Vec<String> = cats
        .conditions
        .rules
        .iter()
        .filter(|r| r.id.starts_with("annex3."))
        .map(|r| r.id.clone())
        .collect();
    let annex1: Vec<String> = areas.into_iter().filter(|a| a.starts_with("annex1")).collect();
    let exemptions = vec!["6.3.a", "6.3.b", "6.3.c", "6.3.d"];
    (
        btree_set(role(), 1..3),
        proptest::sample::subsequence(annex3.clone(), 0..3),
        proptest::sample::subsequence(annex1.clone(), 0..2),
        any::<bool>(),
        proptest::sample::subsequence(exemptions, 0..2),
        proptest::option::of(data_profile()),
    )
        .prop_map(|(roles, a3, a1, third, ex, data)| SystemProfile {
            roles,
            annex_areas: a3.into_iter().collect(),
            annex_i_areas: a1.into_iter().collect(),
            third_party_conformity: third,
            exemptions: ex.into_iter().map(str::to_string).collect(),
            data,
            attributes: Default::default(),
        })
}

pub fn mitigation() -> impl Strategy<Value = MitigationRef> {
    let kinds = ids(&CatalogSet::seed().taxonomies.mitigations);
    let strategy = select(vec![Mitigation::Eliminate, Mitigation::Reduce, Mitigation::Mitigate, Mitigation::Monitor]);
    (select(kinds), strategy, 0u8..=4, 0u8..=4).prop_map(|(k, s, l, sv)| MitigationRef::new(&k, s, l, sv))
}

/// A scored risk built from seed taxonomy ids, with up to five mitigations.
pub fn scored_risk() -> impl Strategy<Value = RiskItem> {
    let t = &CatalogSet::seed().taxonomies;
    let (kinds, sources, consequences) = (ids(&t.risks), ids(&t.sources), ids(&t.consequences));
    (
        "[a-z]{1,6}-[0-9]{1,3}",
        select(kinds),
        proptest::sample::subsequence(sources.clone(), 1..3),
        text(),
        1u8..=5,
        1u8..=5,
        vec((select(consequences), any::<bool>(), any::<bool>()), 0..3),
        vec(mitigation(), 0..5),
    )
        .prop_map(|(id, kind, srcs, threat, l, s, cons, mits)| {
            let srcs: Vec<&str> = srcs.iter().map(String::as_str).collect();
            let mut r = RiskItem::draft(id, &kind, &srcs, threat).scored(l, s);
            r.consequences = cons
                .into_iter()
                .map(|(c, significant, lasting)| ConsequenceRef {
                    taxonomy_id: c,
                    affected_profile: "subject:people".into(),
                    significant,
                    lasting: if lasting { Lasting::Lasting } else { Lasting::Temporary },
                })
                .collect();
            r.mitigations = mits;
            r
        })
}

fn passport_stages() -> &'static [Assessment] {
    static STAGES: OnceLock<Vec<Assessment>> = OnceLock::new();
    STAGES.get_or_init(|| {
        (1..=5)
            .map(|upto| crate::fixtures::passport_assessment(&CatalogSet::seed(), upto).expect("passport example runs"))
            .collect()
    })
}

/// Assessments grown through the workflow from random inputs, so every one
/// carries a consistent audit log. Some stop early, some take the passport
/// example all the way to a closed report.
pub fn assessment() -> impl Strategy<Value = Assessment> {
    let random = (
        "[a-z0-9-]{1,16}",
        jurisdiction(),
        0i64..10_000_000,
        "[a-z]{1,8}(:[a-z]{1,8})?",
        system_profile(),
        proptest::option::of(valid_dpia()),
        vec(scored_risk(), 0..4),
        proptest::option::of((any::<f64>().prop_filter("finite", |f| f.is_finite()), 0u64..1_000_000)),
    )
        .prop_map(|(id, j, offset, actor, profile, dpia, risks, metric)| {
            let cats = CatalogSet::seed();
            let start = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + Duration::seconds(offset);
            let mut n = 0;
            let mut ctx = || {
                n += 1;
                ChangeContext::new(actor.clone(), start + Duration::seconds(n * 7))
            };
            let mut a = Assessment::new(id, j, &ctx());
            let Ok(next) = workflow::submit_profile(&a, profile, &cats, &ctx()) else {
                return a;
            };
            a = next;
            a = match dpia {
                Some(d) => workflow::import_dpia(&a, d, &cats, &ctx()).map(|r| r.0).unwrap_or(a),
                None => workflow::skip_dpia(&a, &ctx()).unwrap_or(a),
            };
            for r in risks {
                if let Ok(next) = workflow::put_risk(&a, r, &cats, &ctx()) {
                    a = next;
                }
            }
            if let Some((value, count)) = metric {
                let metrics = json!({"rate": {"value": value, "appropriateness": "random"}});
                if let Ok(next) = workflow::submit_answer(&a, &cats, "Q6.4", metrics, &ctx()) {
                    a = next;
                }
                if let Ok(next) = workflow::submit_answer(&a, &cats, "Q4.6", json!(count), &ctx()) {
                    a = next;
                }
            }
            a
        });
    let passport = select(passport_stages().to_vec());
    prop_oneof![4 => random, 1 => passport]
}
