//! Stage-level operations on an [`Assessment`]. Each one takes a snapshot,
//! returns the next snapshot and appends exactly one audit event.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bridge::{gap_report, reconcile, BridgeError, GapReport, PrefillResult};
use crate::catalog::CatalogSet;
use crate::intake::{self, assess_purpose_compatibility, classify_affected_persons, IntakeError};
use crate::model::{Assessment, ChangeContext, DpiaDescription, Purpose, StageError, StageState, SystemProfile, ValidationReport};
use crate::necessity::{evaluate_dpia_necessity, evaluate_fria_necessity, DpiaInput, NecessityError};
use crate::reporting::{compile_fria_report, CompiledReport, StageIncomplete};
use crate::rights_impact::{derive_rights_impacts, suggest_remedies, ImpactError, ImpactStatus, RemedialMeasure};
use crate::risk::{apply_mitigations, enumerate_candidate_risks, MitigationRef, RiskError, RiskItem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkflowError {
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Necessity(#[from] NecessityError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Intake(#[from] IntakeError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Impact(#[from] ImpactError),
    #[error(transparent)]
    Report(#[from] StageIncomplete),
    #[error("invalid input: {0}")]
    Validation(ValidationReport),
    #[error("{0} not found")]
    NotFound(String),
    #[error("stage {stage} is {state:?}; {action} is not possible")]
    StageLocked {
        stage: u8,
        state: StageState,
        action: &'static str,
    },
}

impl WorkflowError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            WorkflowError::Stage(_) | WorkflowError::StageLocked { .. } | WorkflowError::Report(_) => "stage_order",
            WorkflowError::Intake(IntakeError::StageOrder | IntakeError::StageClosed) => "stage_order",
            WorkflowError::Intake(IntakeError::UnknownQuestion(_)) | WorkflowError::NotFound(_) => "not_found",
            WorkflowError::Bridge(BridgeError::Document(_)) => "bad_document",
            WorkflowError::Necessity(_) => "incomplete_profile",
            _ => "validation",
        }
    }

    /// Structured detail for error bodies.
    pub fn details(&self) -> Vec<Value> {
        match self {
            WorkflowError::Stage(e) => vec![to(e)],
            WorkflowError::StageLocked { stage, state, .. } => vec![json!({ "stage": stage, "state": state })],
            WorkflowError::Report(e) => vec![json!({ "missing_stages": e.stages, "missing": e.fields })],
            WorkflowError::Intake(IntakeError::Validation { report, .. }) | WorkflowError::Validation(report) => {
                report.violations.iter().map(to).collect()
            }
            WorkflowError::Bridge(BridgeError::Validation(report)) => report.violations.iter().map(to).collect(),
            WorkflowError::Intake(e) => vec![to(e)],
            WorkflowError::Necessity(e) => vec![to(e)],
            _ => Vec::new(),
        }
    }
}

fn to<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn require_complete(a: &Assessment, stage: u8, action: &'static str) -> Result<(), WorkflowError> {
    match a.stage(stage) {
        StageState::Complete => Ok(()),
        state => Err(WorkflowError::StageLocked { stage, state, action }),
    }
}

fn require_open(a: &Assessment, stage: u8, action: &'static str) -> Result<(), WorkflowError> {
    match a.stage(stage) {
        StageState::Complete => Err(WorkflowError::StageLocked {
            stage,
            state: StageState::Complete,
            action,
        }),
        _ => Ok(()),
    }
}

fn dpia_input<'a>(p: &'a SystemProfile, d: Option<&'a DpiaDescription>) -> Option<DpiaInput<'a>> {
    match d {
        Some(d) => Some(DpiaInput::Combined(p, d)),
        None if p.data.is_some() => Some(DpiaInput::Profile(p)),
        None => None,
    }
}

/// Stage 1: stores the profile, decides FRIA and DPIA necessity and closes
/// the stage. Without any data description the DPIA question stays open.
pub fn submit_profile(
    a: &Assessment,
    profile: SystemProfile,
    cats: &CatalogSet,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    require_open(a, 3, "changing the system profile")?;
    let fria = evaluate_fria_necessity(&profile, a.jurisdiction, &cats.conditions)?;
    let dpia = dpia_input(&profile, a.dpia.as_ref())
        .map(|i| evaluate_dpia_necessity(i, a.jurisdiction, &cats.conditions))
        .transpose()?;
    let mut next = a.clone();
    next.system_profile = Some(profile);
    next.necessity = Some(fria);
    next.dpia_necessity = dpia;
    next.catalog_versions = cats.versions();
    next.set_stage(1, StageState::Complete)?;
    let n = next.necessity.as_ref().expect("just set");
    let payload = json!({
        "fria": n.outcome,
        "fired": n.fired_rules.iter().map(|r| &r.rule_id).collect::<Vec<_>>(),
        "dpia": next.dpia_necessity.as_ref().map(|d| d.outcome),
    });
    next.record(ctx, "stage1.profile", &payload);
    Ok(next)
}

fn captured_paths(a: &Assessment, cats: &CatalogSet) -> BTreeSet<String> {
    a.intake
        .answers
        .keys()
        .filter_map(|id| cats.questionnaire.get(id))
        .map(|q| q.target_path.clone())
        .collect()
}

/// Stage 2: merges a DPIA into the FRIA. Fields already answered keep their
/// value and disagreements are kept as conflicts.
pub fn import_dpia(
    a: &Assessment,
    dpia: DpiaDescription,
    cats: &CatalogSet,
    ctx: &ChangeContext,
) -> Result<(Assessment, PrefillResult), WorkflowError> {
    require_complete(a, 1, "importing a DPIA")?;
    require_open(a, 3, "importing a DPIA")?;
    let report = dpia.validate();
    if report.violations.iter().any(crate::bridge::is_fatal) {
        return Err(BridgeError::Validation(report).into());
    }
    let existing = a.fria.clone().unwrap_or_default();
    let result = reconcile(&existing, &captured_paths(a, cats), &dpia, &cats.mapping);
    let mut next = a.clone();
    if let Some(p) = &a.system_profile {
        next.dpia_necessity = Some(evaluate_dpia_necessity(
            DpiaInput::Combined(p, &dpia),
            a.jurisdiction,
            &cats.conditions,
        )?);
    }
    next.dpia = Some(dpia);
    next.fria = Some(result.prefilled.clone());
    next.intake.prefilled = result.provenance.clone();
    next.intake.conflicts = result.conflicts.clone();
    next.set_stage(2, StageState::Complete)?;
    let payload = json!({
        "prefilled": result.provenance.keys().collect::<Vec<_>>(),
        "conflicts": result.conflicts.len(),
    });
    next.record(ctx, "stage2.dpia_imported", &payload);
    Ok((next, result))
}

pub fn skip_dpia(a: &Assessment, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    require_complete(a, 1, "skipping the DPIA stage")?;
    Ok(a.skip_stage(2, ctx)?)
}

/// Gaps left after the DPIA import, or every required field when no DPIA
/// was imported.
pub fn current_gaps(a: &Assessment, cats: &CatalogSet) -> GapReport {
    let empty = DpiaDescription::default();
    let d = a.dpia.as_ref().unwrap_or(&empty);
    let result = reconcile(&a.fria.clone().unwrap_or_default(), &captured_paths(a, cats), d, &cats.mapping);
    gap_report(&result, &cats.questionnaire)
}

pub fn submit_answer(
    a: &Assessment,
    cats: &CatalogSet,
    question_id: &str,
    value: Value,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    Ok(intake::submit_answer(a, &cats.questionnaire, question_id, value, ctx)?)
}

/// Applies a batch of answers in order; stops at the first failure.
pub fn submit_answers(
    a: &Assessment,
    cats: &CatalogSet,
    answers: &[(String, Value)],
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    answers
        .iter()
        .try_fold(a.clone(), |acc, (q, v)| submit_answer(&acc, cats, q, v.clone(), ctx))
}

/// Checks a deployed purpose against the developed and marketed purposes.
pub fn check_compatibility(
    a: &Assessment,
    deployed: &Purpose,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    require_complete(a, 1, "checking purpose compatibility")?;
    require_open(a, 3, "checking purpose compatibility")?;
    let f = a.fria.clone().unwrap_or_default();
    let intended: Vec<Purpose> = f
        .intended_purposes
        .developed
        .iter()
        .chain(&f.intended_purposes.marketed)
        .cloned()
        .collect();
    let result = assess_purpose_compatibility(deployed, &intended)?;
    let mut next = a.clone();
    next.compatibility = Some(result);
    next.touch_stage(3);
    next.record(ctx, "stage3.compatibility", &json!({ "deployed": deployed.id }));
    Ok(next)
}

fn risk_stage_open(a: &Assessment, action: &'static str) -> Result<(), WorkflowError> {
    require_complete(a, 1, action)?;
    require_open(a, 3, action)
}

fn validated(r: RiskItem, cats: &CatalogSet) -> Result<RiskItem, WorkflowError> {
    let report = r.validate(Some(&cats.taxonomies));
    if !report.is_empty() {
        return Err(WorkflowError::Validation(report));
    }
    if r.is_scored() {
        Ok(apply_mitigations(&r, &cats.matrix)?)
    } else {
        Ok(RiskItem { residual: None, ..r })
    }
}

/// Adds the suggested draft risks that are not in the register yet.
pub fn suggest_risks(a: &Assessment, cats: &CatalogSet, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    risk_stage_open(a, "suggesting risks")?;
    let f = a.fria.clone().unwrap_or_default();
    let known: BTreeSet<String> = a.risks.iter().map(|r| r.id.clone()).collect();
    let added: Vec<RiskItem> = enumerate_candidate_risks(&f, &cats.taxonomies)
        .into_iter()
        .filter(|r| !known.contains(&r.id))
        .collect();
    let mut next = a.clone();
    let ids: Vec<String> = added.iter().map(|r| r.id.clone()).collect();
    next.risks.extend(added);
    next.touch_stage(3);
    next.impacts_stale = true;
    next.record(ctx, "stage3.risks_suggested", &json!({ "added": ids }));
    Ok(next)
}

/// Inserts or replaces a risk by id.
pub fn put_risk(a: &Assessment, risk: RiskItem, cats: &CatalogSet, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    risk_stage_open(a, "editing risks")?;
    let risk = validated(risk, cats)?;
    let mut next = a.clone();
    match next.risks.iter_mut().find(|r| r.id == risk.id) {
        Some(slot) => *slot = risk.clone(),
        None => next.risks.push(risk.clone()),
    }
    next.touch_stage(3);
    next.impacts_stale = true;
    next.record(ctx, "stage3.risk_saved", &risk);
    Ok(next)
}

pub fn remove_risk(a: &Assessment, id: &str, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    risk_stage_open(a, "editing risks")?;
    let mut next = a.clone();
    let before = next.risks.len();
    next.risks.retain(|r| r.id != id);
    if next.risks.len() == before {
        return Err(WorkflowError::NotFound(format!("risk '{id}'")));
    }
    next.impacts_stale = true;
    next.record(ctx, "stage3.risk_removed", &json!({ "id": id }));
    Ok(next)
}

fn edit_risk(
    a: &Assessment,
    id: &str,
    cats: &CatalogSet,
    ctx: &ChangeContext,
    action: &str,
    f: impl FnOnce(&mut RiskItem),
) -> Result<Assessment, WorkflowError> {
    risk_stage_open(a, "editing risks")?;
    let mut r = a
        .risks
        .iter()
        .find(|r| r.id == id)
        .cloned()
        .ok_or_else(|| WorkflowError::NotFound(format!("risk '{id}'")))?;
    f(&mut r);
    let r = validated(r, cats)?;
    let mut next = a.clone();
    *next.risks.iter_mut().find(|x| x.id == id).expect("present") = r.clone();
    next.touch_stage(3);
    next.impacts_stale = true;
    next.record(ctx, action, &r);
    Ok(next)
}

/// Sets likelihood and severity and recomputes the residual.
pub fn score_risk(
    a: &Assessment,
    id: &str,
    likelihood: i64,
    severity: i64,
    cats: &CatalogSet,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    let l = crate::model::Ordinal::new(likelihood)
        .map_err(|_| RiskError::OutOfRange { field: "likelihood", value: likelihood })?;
    let s = crate::model::Ordinal::new(severity)
        .map_err(|_| RiskError::OutOfRange { field: "severity", value: severity })?;
    edit_risk(a, id, cats, ctx, "stage3.risk_scored", |r| {
        r.likelihood = Some(l);
        r.severity = Some(s);
    })
}

/// Replaces the mitigations of a risk and recomputes the residual.
pub fn set_mitigations(
    a: &Assessment,
    id: &str,
    mitigations: Vec<MitigationRef>,
    cats: &CatalogSet,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    edit_risk(a, id, cats, ctx, "stage3.risk_mitigated", |r| r.mitigations = mitigations)
}

/// Closes stage 3. All visible questions must be answered, the FRIA must be
/// valid and every risk scored. Affected-person profiles are fixed here.
pub fn complete_information_gathering(
    a: &Assessment,
    cats: &CatalogSet,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    a.check_can_complete(3)?;
    let mut report = ValidationReport::default();
    for q in intake::next_questions(a, &cats.questionnaire)? {
        report.push(q.target_path.clone(), "answered", format!("question {} still needs an answer", q.id));
    }
    let fria = a.fria.clone().unwrap_or_default();
    report.merge(fria.validate());
    let profiles = classify_affected_persons(&fria);
    let profile_ids: BTreeSet<&str> = profiles.iter().map(|p| p.id.as_str()).collect();
    for r in &a.risks {
        if !r.is_scored() {
            report.push(format!("risks[{}]", r.id), "scored", "risk has no likelihood or severity");
        }
        for c in &r.consequences {
            if !profile_ids.contains(c.affected_profile.as_str()) {
                report.push(
                    format!("risks[{}].consequences", r.id),
                    "known-profile",
                    format!("no affected person '{}'", c.affected_profile),
                );
            }
        }
    }
    if !report.is_empty() {
        return Err(WorkflowError::Validation(report));
    }
    let mut next = a.clone();
    next.affected_profiles = profiles;
    next.set_stage(3, StageState::Complete)?;
    next.record(
        ctx,
        "stage.completed",
        &json!({ "stage": 3, "profiles": next.affected_profiles.len(), "risks": next.risks.len() }),
    );
    Ok(next)
}

/// Stage 4: derives impacts from the risk register. Status and remedies of
/// impacts that already existed are kept; new impacts get draft remedies.
pub fn derive_impacts(a: &Assessment, cats: &CatalogSet, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    require_complete(a, 3, "deriving impacts")?;
    require_open(a, 4, "deriving impacts")?;
    let d = derive_rights_impacts(&a.risks, &a.affected_profiles, &cats.impact_rules, &cats.rights)?;
    let previous: BTreeMap<&str, _> = a.impacts.iter().map(|i| (i.id.as_str(), i)).collect();
    let impacts = d
        .impacts
        .into_iter()
        .map(|mut i| {
            match previous.get(i.id.as_str()) {
                Some(old) => {
                    i.status = old.status;
                    i.remedial_measures = old.remedial_measures.clone();
                }
                None => i.remedial_measures = suggest_remedies(&i, &cats.taxonomies.mitigations),
            }
            i
        })
        .collect::<Vec<_>>();
    let mut next = a.clone();
    let payload = json!({
        "impacts": impacts.iter().map(|i| &i.id).collect::<Vec<_>>(),
        "leftovers": d.leftovers.len(),
    });
    next.impacts = impacts;
    next.impact_leftovers = d.leftovers;
    next.impacts_stale = false;
    next.touch_stage(4);
    next.record(ctx, "stage4.impacts_derived", &payload);
    Ok(next)
}

fn edit_impact(
    a: &Assessment,
    id: &str,
    ctx: &ChangeContext,
    action: &str,
    f: impl FnOnce(&mut crate::rights_impact::RightsImpact) -> Result<(), WorkflowError>,
) -> Result<Assessment, WorkflowError> {
    require_complete(a, 3, "editing impacts")?;
    require_open(a, 4, "editing impacts")?;
    let mut next = a.clone();
    let impact = next
        .impacts
        .iter_mut()
        .find(|i| i.id == id)
        .ok_or_else(|| WorkflowError::NotFound(format!("impact '{id}'")))?;
    f(impact)?;
    let payload = impact.clone();
    next.record(ctx, action, &payload);
    Ok(next)
}

pub fn set_impact_status(
    a: &Assessment,
    id: &str,
    status: ImpactStatus,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    edit_impact(a, id, ctx, "stage4.impact_status", |i| {
        i.status = status;
        Ok(())
    })
}

/// Marks a suggested remedy as adopted.
pub fn adopt_remedy(a: &Assessment, id: &str, index: usize, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    edit_impact(a, id, ctx, "stage4.remedy_adopted", |i| {
        let m = i
            .remedial_measures
            .get_mut(index)
            .ok_or_else(|| WorkflowError::NotFound(format!("remedy {index} of impact '{}'", i.id)))?;
        m.draft = false;
        Ok(())
    })
}

/// Adds a remedy written by the assessor. It must address one of the
/// impact's categories, or the category it escalates to.
pub fn add_remedy(
    a: &Assessment,
    id: &str,
    remedy: RemedialMeasure,
    ctx: &ChangeContext,
) -> Result<Assessment, WorkflowError> {
    edit_impact(a, id, ctx, "stage4.remedy_added", |i| {
        let allowed = i.categories.contains(&remedy.addresses)
            || i.escalates_to.is_some_and(|e| e.category == remedy.addresses);
        if !allowed {
            let mut r = ValidationReport::default();
            r.push("addresses", "impact-category", format!("{} is not a category of this impact", remedy.addresses));
            return Err(WorkflowError::Validation(r));
        }
        i.remedial_measures.push(remedy);
        Ok(())
    })
}

/// Closes stage 4 once impacts are current and none is left open.
pub fn complete_rights_assessment(a: &Assessment, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    a.check_can_complete(4)?;
    let mut report = ValidationReport::default();
    if a.impacts_stale {
        report.push("impacts", "current", "the risk register changed after impacts were derived");
    }
    for i in a.impacts.iter().filter(|i| i.status == ImpactStatus::Open) {
        report.push(format!("impacts[{}]", i.id), "decided", "impact is neither resolved nor marked unresolved");
    }
    if !report.is_empty() {
        return Err(WorkflowError::Validation(report));
    }
    let mut next = a.clone();
    next.set_stage(4, StageState::Complete)?;
    next.record(ctx, "stage.completed", &json!({ "stage": 4, "impacts": a.impacts.len() }));
    Ok(next)
}

/// Stage 5: compiles the report from the current snapshot.
pub fn compile_report(a: &Assessment, cats: &CatalogSet, compiled_by: &str) -> Result<CompiledReport, WorkflowError> {
    Ok(compile_fria_report(a, &cats.matrix, &cats.acceptability, compiled_by)?)
}

/// Records that the report with `checksum` was issued and closes stage 5.
pub fn close_with_report(a: &Assessment, checksum: &str, ctx: &ChangeContext) -> Result<Assessment, WorkflowError> {
    require_open(a, 5, "issuing a report")?;
    let missing = a.stages_missing_for_report();
    if !missing.is_empty() {
        return Err(StageIncomplete {
            stages: missing,
            fields: Vec::new(),
        }
        .into());
    }
    let mut next = a.clone();
    next.set_stage(5, StageState::Complete)?;
    next.record(ctx, "stage5.report_issued", &json!({ "checksum": checksum }));
    Ok(next)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub stage: u8,
    pub state: StageState,
    pub blocking: Vec<u8>,
}

pub fn stage_summary(a: &Assessment) -> Vec<StageSummary> {
    crate::model::STAGES
        .iter()
        .map(|&n| StageSummary {
            stage: n,
            state: a.stage(n),
            blocking: a.blocking_stages(n),
        })
        .collect()
}
