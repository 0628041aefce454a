//! Stage 3 information gathering: the branching questionnaire, purpose
//! compatibility and affected persons.

mod compatibility;
mod persons;
mod questionnaire;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use compatibility::{assess_purpose_compatibility, CompatibilityResult};
pub use persons::{classify_affected_persons, person_fields, AffectedPersonProfile, PersonRole, Posture};
pub use questionnaire::{load_questionnaire, AnswerType, Question, QuestionSet};

use crate::catalog::Relation;
use crate::model::paths::{get_path, set_path};
use crate::model::{Assessment, ChangeContext, FriaDescription, StageState, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntakeError {
    #[error("stage 1 must be complete before information gathering")]
    StageOrder,
    #[error("stage 3 is already complete")]
    StageClosed,
    #[error("unknown question '{0}'")]
    UnknownQuestion(String),
    #[error("question '{0}' is not visible")]
    NotVisible(String),
    #[error("answer to '{question}' does not fit {expected:?}: {detail}")]
    TypeMismatch {
        question: String,
        expected: AnswerType,
        detail: String,
    },
    #[error("answer to '{question}' is invalid: {report}")]
    Validation { question: String, report: ValidationReport },
    #[error("at least one intended purpose is needed")]
    EmptyIntended,
}

fn fria_value(a: &Assessment) -> Value {
    serde_json::to_value(a.fria.clone().unwrap_or_default()).expect("FRIA serializes")
}

/// Visible questions that still need an answer: not yet answered (an
/// equivalent DPIA value counts as an answer) or whose field currently
/// breaks an invariant.
pub fn next_questions<'q>(a: &Assessment, qs: &'q QuestionSet) -> Result<Vec<&'q Question>, IntakeError> {
    if a.stage(1) != StageState::Complete {
        return Err(IntakeError::StageOrder);
    }
    let fria = a.fria.clone().unwrap_or_default();
    let value = serde_json::to_value(&fria).expect("FRIA serializes");
    let report = fria.validate();
    Ok(qs
        .questions
        .iter()
        .filter(|q| qs.is_visible(q, &value))
        .filter(|q| {
            let answered = a.intake.answers.contains_key(&q.id)
                || a
                    .intake
                    .prefilled
                    .get(&q.target_path)
                    .is_some_and(|p| p.relation == Relation::Equivalent);
            !answered || report.under(&q.target_path).next().is_some()
        })
        .collect())
}

fn type_error(q: &Question, detail: impl Into<String>) -> IntakeError {
    IntakeError::TypeMismatch {
        question: q.id.clone(),
        expected: q.answer_type,
        detail: detail.into(),
    }
}

/// Checks the JSON shape of an answer and turns it into the value stored at
/// the question's target.
fn coerce(q: &Question, value: &Value) -> Result<Value, IntakeError> {
    let strings = |v: &Value| -> Option<Vec<String>> {
        v.as_array()?
            .iter()
            .map(|i| i.as_str().map(str::to_string))
            .collect()
    };
    match q.answer_type {
        AnswerType::Boolean if value.is_boolean() => Ok(value.clone()),
        AnswerType::Ordinal1to5 if value.is_i64() || value.is_u64() => Ok(value.clone()),
        AnswerType::Number if value.is_number() => Ok(value.clone()),
        AnswerType::Text if value.is_string() => Ok(value.clone()),
        AnswerType::EnumChoice => match value.as_str() {
            Some(s) if q.choices.iter().any(|c| c == s) => Ok(value.clone()),
            _ => Err(type_error(q, format!("expected one of {:?}", q.choices))),
        },
        AnswerType::MultiChoice => match strings(value) {
            Some(items) if items.iter().all(|s| q.choices.contains(s)) => Ok(value.clone()),
            _ => Err(type_error(q, format!("expected a list drawn from {:?}", q.choices))),
        },
        AnswerType::TextList if strings(value).is_some() => Ok(value.clone()),
        AnswerType::EntityList | AnswerType::DataItemList | AnswerType::PurposeList if value.is_array() => {
            Ok(value.clone())
        }
        AnswerType::Structured if value.is_object() || value.is_array() => Ok(value.clone()),
        _ => Err(type_error(q, format!("got {value}"))),
    }
}

/// Places an answer at its target, unwrapping single-entity lists.
fn write_answer(fria: &mut Value, q: &Question, answer: Value) -> Result<(), IntakeError> {
    let current = get_path(fria, &q.target_path).cloned().unwrap_or(Value::Null);
    let answer = match (q.answer_type, &current, answer) {
        (AnswerType::EntityList, slot, Value::Array(mut items)) if !slot.is_array() => match items.len() {
            0 => Value::Null,
            1 => items.remove(0),
            n => return Err(type_error(q, format!("at most one entity expected, got {n}"))),
        },
        (_, _, answer) => answer,
    };
    if set_path(fria, &q.target_path, answer) {
        Ok(())
    } else {
        Err(type_error(q, "target field does not exist"))
    }
}

/// Records one answer. Visibility is then recomputed in question order;
/// answers to questions that became hidden are dropped and their fields
/// reset.
pub fn submit_answer(
    a: &Assessment,
    qs: &QuestionSet,
    question_id: &str,
    value: Value,
    ctx: &ChangeContext,
) -> Result<Assessment, IntakeError> {
    if a.stage(1) != StageState::Complete {
        return Err(IntakeError::StageOrder);
    }
    if a.stage(3) == StageState::Complete {
        return Err(IntakeError::StageClosed);
    }
    let q = qs
        .get(question_id)
        .ok_or_else(|| IntakeError::UnknownQuestion(question_id.to_string()))?;
    let mut fria = fria_value(a);
    if !qs.is_visible(q, &fria) {
        return Err(IntakeError::NotVisible(q.id.clone()));
    }
    let stored = coerce(q, &value)?;
    write_answer(&mut fria, q, stored)?;
    let parsed: FriaDescription =
        serde_json::from_value(fria.clone()).map_err(|e| type_error(q, e.to_string()))?;
    let report = parsed.validate();
    let relevant = ValidationReport {
        violations: report.under(&q.target_path).cloned().collect(),
    };
    if !relevant.is_empty() {
        return Err(IntakeError::Validation {
            question: q.id.clone(),
            report: relevant,
        });
    }

    let mut next = a.clone();
    next.intake.answers.insert(q.id.clone(), value.clone());

    let defaults = serde_json::to_value(FriaDescription::default()).expect("FRIA serializes");
    for other in &qs.questions {
        if !qs.is_visible(other, &fria) {
            next.intake.answers.remove(&other.id);
            next.intake.prefilled.remove(&other.target_path);
            if let Some(d) = get_path(&defaults, &other.target_path).cloned() {
                set_path(&mut fria, &other.target_path, d);
            }
        }
    }
    next.fria = Some(serde_json::from_value(fria).map_err(|e| type_error(q, e.to_string()))?);
    next.touch_stage(3);
    next.record(
        ctx,
        "intake.answer",
        &serde_json::json!({ "question": q.id, "value": value }),
    );
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogSet;
    use chrono::TimeZone;

    fn ctx() -> ChangeContext {
        ChangeContext::new("officer", chrono::Utc.with_ymd_and_hms(2025, 5, 2, 10, 0, 0).unwrap())
    }

    fn started() -> Assessment {
        let a = Assessment::new("a", "IE".parse().unwrap(), &ctx());
        a.complete_stage(1, &ctx()).unwrap()
    }

    #[test]
    fn fresh_assessment_sees_every_unconditional_question() {
        let cats = CatalogSet::seed();
        let qs = next_questions(&started(), &cats.questionnaire).unwrap();
        assert_eq!(qs.len(), crate::model::paths::fria_required_paths().count());
    }

    #[test]
    fn stage_one_gates_intake() {
        let cats = CatalogSet::seed();
        let a = Assessment::new("a", "IE".parse().unwrap(), &ctx());
        assert_eq!(next_questions(&a, &cats.questionnaire), Err(IntakeError::StageOrder));
    }

    #[test]
    fn boolean_answer_adds_one_event() {
        let cats = CatalogSet::seed();
        let a = started();
        let b = submit_answer(&a, &cats.questionnaire, "Q2.3", Value::Bool(true), &ctx()).unwrap();
        assert_eq!(b.audit_log.len(), a.audit_log.len() + 1);
        assert!(b.fria.as_ref().unwrap().involved_entities.can_update_system);
        assert_eq!(b.stage(3), StageState::InProgress);
    }

    #[test]
    fn special_category_reveals_and_hides_follow_ups() {
        let cats = CatalogSet::seed();
        let qs = &cats.questionnaire;
        let a = started();
        assert!(matches!(
            submit_answer(&a, qs, "Q3.7", Value::from(3), &ctx()),
            Err(IntakeError::NotVisible(_))
        ));
        let b = submit_answer(&a, qs, "Q3.6", Value::Bool(true), &ctx()).unwrap();
        let visible: Vec<&str> = next_questions(&b, qs).unwrap().iter().map(|q| q.id.as_str()).collect();
        assert!(visible.contains(&"Q3.7") && visible.contains(&"Q3.8"));

        assert!(matches!(
            submit_answer(&b, qs, "Q3.7", Value::from(7), &ctx()),
            Err(IntakeError::Validation { .. })
        ));
        let c = submit_answer(&b, qs, "Q3.7", Value::from(4), &ctx()).unwrap();
        let d = submit_answer(&c, qs, "Q3.6", Value::Bool(false), &ctx()).unwrap();
        assert!(!d.intake.answers.contains_key("Q3.7"));
        assert_eq!(d.fria.unwrap().involved_data.special_category_scale, None);
    }

    #[test]
    fn type_mismatch() {
        let cats = CatalogSet::seed();
        let err = submit_answer(&started(), &cats.questionnaire, "Q2.3", Value::from("yes"), &ctx()).unwrap_err();
        assert!(matches!(err, IntakeError::TypeMismatch { .. }));
    }

    #[test]
    fn single_entity_questions_take_one_item() {
        let cats = CatalogSet::seed();
        let two = serde_json::json!([
            {"id": "a", "name": "A", "roles": ["Deployer"]},
            {"id": "b", "name": "B", "roles": ["Deployer"]}
        ]);
        assert!(submit_answer(&started(), &cats.questionnaire, "Q2.1", two, &ctx()).is_err());
        let one = serde_json::json!([{"id": "a", "name": "A", "roles": ["Deployer"]}]);
        let a = submit_answer(&started(), &cats.questionnaire, "Q2.1", one, &ctx()).unwrap();
        assert_eq!(a.fria.unwrap().involved_entities.deployer.unwrap().id, "a");
    }
}
