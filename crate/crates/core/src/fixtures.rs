//! A worked example: automated passport control at an airport, run through
//! all five stages. Used by tests, the benchmarks and the CLI demo data.

use chrono::{DateTime, Duration, TimeZone, Utc};
use serde_json::{json, Value};

use crate::catalog::CatalogSet;
use crate::model::{
    Assessment, ChangeContext, DataProfile, DataRole, DataSubjectCategory, DpiaDescription, EntityRef, EntityRole,
    LegalBasis, Locality, Ordinal, PersonalDataItem, ProcessingOperation, ProcessingScale, Purpose, PurposeKind,
    RetentionPeriod, SystemProfile,
};
use crate::rights_impact::ImpactStatus;
use crate::risk::{ConsequenceRef, Lasting, MitigationRef, RiskItem, Strategy};
use crate::workflow::{self, WorkflowError};

pub const PASSPORT_ID: &str = "passport-control";
pub const PASSENGERS: &str = "subject:passengers";

fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2025, 4, 1, 9, 0, 0).unwrap()
}

/// Deterministic clock: step `n` is `n` minutes after the fixture start.
pub fn fixture_ctx(n: i64) -> ChangeContext {
    ChangeContext::new("border-agency:fria-officer", start() + Duration::minutes(n))
}

pub fn passport_profile() -> SystemProfile {
    SystemProfile::deployer().with_areas(["annex3.7.d"]).with_data(DataProfile {
        processes_personal_data: true,
        special_category: true,
        automated_processing: true,
        profiling_or_scoring: false,
        automated_decision_making: true,
        vulnerable_subjects: false,
        cross_border: false,
        scale: ProcessingScale {
            data: Ordinal(4),
            operations: Ordinal(4),
            subjects: Ordinal(5),
        },
        locality: Some(Locality::PublicArea),
    })
}

fn border_purpose() -> Purpose {
    Purpose::new(
        "identity-verification",
        "Verify that a traveller matches the passport presented at the border",
        PurposeKind::Deployment,
    )
    .with_domains(["border-control"])
    .with_capabilities(["face-verification", "document-reading"])
}

pub fn passport_dpia() -> DpiaDescription {
    let mut face_matching = ProcessingOperation::automated("face matching");
    face_matching.decision_making = true;
    DpiaDescription {
        purposes: vec![border_purpose()],
        processing_operations: vec![ProcessingOperation::automated("passport chip reading"), face_matching],
        personal_data: vec![
            PersonalDataItem::new("passport data", DataRole::Input).with_quality(4, 4),
            PersonalDataItem::new("live face image", DataRole::Input).special().with_quality(3, 4),
            PersonalDataItem::new("match decision", DataRole::Output).inferred(),
        ],
        data_subjects: vec![DataSubjectCategory {
            name: "passengers".into(),
            vulnerable: false,
        }],
        entities: vec![EntityRef::new(
            "border-agency",
            "National border agency",
            &[EntityRole::Controller, EntityRole::Deployer],
        )],
        cross_border: Default::default(),
        scale: ProcessingScale {
            data: Ordinal(4),
            operations: Ordinal(4),
            subjects: Ordinal(5),
        },
        duration: RetentionPeriod {
            processing_days: 730,
            storage_days: 1,
            deletion_policy: "Face images are deleted after the crossing".into(),
        },
        legal_bases: vec![LegalBasis::PublicTask],
        necessity_statement: "Border checks are a legal obligation of the agency".into(),
        proportionality_statement: "Manual lanes stay open; images are not stored".into(),
        inferences: vec!["identity match result".into()],
        technical_measures: vec!["on-device matching".into()],
        organisational_measures: vec!["officer supervision of every gate".into()],
        locality: Locality::PublicArea,
    }
}

/// Answers that complete stage 3 after the DPIA import, in question order.
pub fn passport_answers() -> Vec<(String, Value)> {
    let purpose = serde_json::to_value(border_purpose()).expect("purpose serializes");
    let answers = [
        ("Q1.1", json!([purpose])),
        ("Q1.2", json!([purpose])),
        (
            "Q1.3",
            json!([{
                "id": "training-faces",
                "description": "Collect face images to train the matcher",
                "kind": "DataCollection",
                "domain_tags": ["border-control"],
                "capability_tags": ["face-verification"]
            }]),
        ),
        (
            "Q2.1",
            json!([{"id": "border-agency", "name": "National border agency", "roles": ["Deployer", "Controller"]}]),
        ),
        ("Q2.2", json!([{"id": "gate-vendor", "name": "E-gate vendor", "roles": ["Provider"]}])),
        ("Q2.3", json!(false)),
        (
            "Q2.4",
            json!([{
                "id": "officers",
                "name": "Immigration officers supervising the gates",
                "roles": ["AiUser"],
                "relationship_to_deployer": "Employment"
            }]),
        ),
        (
            "Q2.5",
            json!([{
                "id": "passengers",
                "name": "Passengers using the e-gates",
                "roles": ["AiSubject"],
                "relationship_to_deployer": "ServiceRecipient"
            }]),
        ),
        (
            "Q2.6",
            json!({
                "officers": {"active": true, "intended": true, "informed": true},
                "passengers": {"active": true, "intended": true, "informed": true, "vulnerability": "SocialVulnerability"}
            }),
        ),
        ("Q2.7", json!(["ViewOutput", "OptOut"])),
        (
            "Q3.1",
            json!([
                {"name": "passport data", "special_category": false, "is_inference": false,
                 "quality": {"accuracy": 4, "completeness": 4}, "role_in_system": "Input"},
                {"name": "live face image", "special_category": true, "is_inference": false,
                 "quality": {"accuracy": 3, "completeness": 4}, "role_in_system": "Input"}
            ]),
        ),
        (
            "Q3.3",
            json!([{"name": "match decision", "special_category": false, "is_inference": true,
                    "quality": {"accuracy": 3, "completeness": 5}, "role_in_system": "Output"}]),
        ),
        ("Q3.4", json!(false)),
        ("Q3.5", json!(true)),
        ("Q3.6", json!(true)),
        ("Q3.7", json!(4)),
        ("Q3.8", json!(["images processed on the gate only", "no retention after the crossing"])),
        ("Q4.1", json!(["border management database"])),
        ("Q4.2", json!("real time")),
        ("Q4.3", json!(["gate camera", "passport chip reader"])),
        ("Q4.4", json!("gate screen with officer console")),
        ("Q4.5", json!(730)),
        ("Q4.6", json!(12000)),
        ("Q5.1", json!("Face matcher trained by the vendor and tuned on local test data")),
        (
            "Q5.2",
            json!([{"reference": "vendor face set v3", "covers": "face images for training", "known_bias": true}]),
        ),
        ("Q5.3", json!([{"date": "2024-11-01", "description": "Threshold recalibrated after the pilot"}])),
        ("Q6.1", json!("Match or no-match for each traveller")),
        ("Q6.2", json!("Similarity score between chip photo and live image compared with a threshold")),
        ("Q6.3", json!(["quarterly threshold review"])),
        (
            "Q6.4",
            json!({"false non-match rate": {"value": 0.03, "appropriateness": "Measured per demographic group"}}),
        ),
    ];
    answers.into_iter().map(|(q, v)| (q.to_string(), v)).collect()
}

fn consequence(kind: &str, lasting: Lasting) -> ConsequenceRef {
    ConsequenceRef {
        taxonomy_id: kind.into(),
        affected_profile: PASSENGERS.into(),
        significant: true,
        lasting,
    }
}

/// The risk register a person would keep after reviewing the suggestions.
pub fn passport_risks() -> Vec<RiskItem> {
    let mut shutdown = RiskItem::draft(
        "gate-shutdown",
        "r-stops-working",
        &["s-environment"],
        "The gates stop detecting passports after a power failure",
    )
    .scored(3, 3);
    shutdown.consequences = vec![
        consequence("c-delays", Lasting::Temporary),
        consequence("c-denial", Lasting::Temporary),
    ];
    shutdown.mitigations = vec![MitigationRef::new("m-monitoring", Strategy::Mitigate, 1, 1)];

    let mut bias = RiskItem::draft(
        "matcher-bias",
        "r-incorrect-output",
        &["s-component"],
        "The face matcher fails more often for some racial or biological characteristics",
    )
    .scored(4, 4);
    bias.consequences = vec![
        consequence("c-exclusion", Lasting::Temporary),
        consequence("c-delays", Lasting::Temporary),
        consequence("c-psychological", Lasting::Lasting),
    ];
    bias.mitigations = vec![
        MitigationRef::new("m-prevent-reduce", Strategy::Reduce, 2, 0),
        MitigationRef::new("m-monitoring", Strategy::Mitigate, 0, 1),
    ];
    vec![shutdown, bias]
}

/// Runs the passport example up to and including stage `upto`.
pub fn passport_assessment(cats: &CatalogSet, upto: u8) -> Result<Assessment, WorkflowError> {
    let mut step = 0;
    let mut ctx = || {
        step += 1;
        fixture_ctx(step)
    };
    let mut a = Assessment::new(PASSPORT_ID, "IE".parse().expect("known code"), &ctx());
    a = workflow::submit_profile(&a, passport_profile(), cats, &ctx())?;
    if upto < 2 {
        return Ok(a);
    }
    a = workflow::import_dpia(&a, passport_dpia(), cats, &ctx())?.0;
    if upto < 3 {
        return Ok(a);
    }
    for (q, v) in passport_answers() {
        a = workflow::submit_answer(&a, cats, &q, v, &ctx())?;
    }
    for r in passport_risks() {
        a = workflow::put_risk(&a, r, cats, &ctx())?;
    }
    a = workflow::complete_information_gathering(&a, cats, &ctx())?;
    if upto < 4 {
        return Ok(a);
    }
    a = workflow::derive_impacts(&a, cats, &ctx())?;
    let ids: Vec<String> = a.impacts.iter().map(|i| i.id.clone()).collect();
    for id in ids {
        a = workflow::adopt_remedy(&a, &id, 0, &ctx())?;
        a = workflow::set_impact_status(&a, &id, ImpactStatus::Resolved, &ctx())?;
    }
    a = workflow::complete_rights_assessment(&a, &ctx())?;
    if upto < 5 {
        return Ok(a);
    }
    let report = workflow::compile_report(&a, cats, "border-agency:fria-officer")?;
    workflow::close_with_report(&a, &report.checksum, &ctx())
}
