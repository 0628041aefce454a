use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::catalog::predicate::{FactSource, FactValue, FieldType, Predicate};
use crate::catalog::{parse_document, CatalogError};
use crate::model::paths::{fria_required_paths, get_path, is_fria_leaf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AnswerType {
    Boolean,
    Ordinal1to5,
    Text,
    EnumChoice,
    MultiChoice,
    /// A list of entities; for single-entity fields at most one.
    EntityList,
    DataItemList,
    Number,
    TextList,
    PurposeList,
    /// A JSON object or list with the target field's own shape.
    Structured,
}

impl AnswerType {
    /// Type the answer has when another question's visibility refers to it.
    pub fn fact_type(self) -> Option<FieldType> {
        match self {
            AnswerType::Boolean => Some(FieldType::Bool),
            AnswerType::Ordinal1to5 => Some(FieldType::Ordinal),
            AnswerType::Text | AnswerType::EnumChoice => Some(FieldType::Text),
            AnswerType::MultiChoice | AnswerType::TextList => Some(FieldType::Tags),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    pub answer_type: AnswerType,
    pub target_path: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
    /// Predicate over earlier questions, referenced by id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible_if: Option<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionnaireFile {
    version: String,
    locale: String,
    questions: Vec<Question>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuestionSet {
    pub version: String,
    pub locale: String,
    pub questions: Vec<Question>,
    pub checksum: String,
}

impl QuestionSet {
    pub fn get(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn for_path(&self, path: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.target_path == path)
    }

    /// Whether `q` is shown given the current FRIA value. A question whose
    /// condition refers to something not yet answerable stays hidden.
    pub fn is_visible(&self, q: &Question, fria: &Value) -> bool {
        match &q.visible_if {
            None => true,
            Some(p) => p
                .eval(&AnswerFacts { set: self, fria })
                .unwrap_or(false),
        }
    }
}

/// Exposes the current value of each question's target as a fact named by
/// the question id.
struct AnswerFacts<'a> {
    set: &'a QuestionSet,
    fria: &'a Value,
}

impl FactSource for AnswerFacts<'_> {
    fn fact(&self, name: &str) -> Option<FactValue> {
        let q = self.set.get(name)?;
        let ty = q.answer_type.fact_type()?;
        FactValue::from_json(ty, get_path(self.fria, &q.target_path)?)
    }
}

pub fn load_questionnaire(bytes: &[u8]) -> Result<QuestionSet, CatalogError> {
    let file: QuestionnaireFile = parse_document(bytes)?;
    let mut earlier: BTreeMap<String, FieldType> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    let mut targets: BTreeMap<&str, &str> = BTreeMap::new();
    for q in &file.questions {
        if !ids.insert(q.id.as_str()) {
            return Err(CatalogError::DuplicateId(q.id.clone()));
        }
        if !is_fria_leaf(&q.target_path) {
            return Err(CatalogError::Invalid(format!(
                "question {} targets '{}', which is not a FRIA field",
                q.id, q.target_path
            )));
        }
        if let Some(prev) = targets.insert(&q.target_path, &q.id) {
            return Err(CatalogError::Invalid(format!(
                "questions {prev} and {} both target '{}'",
                q.id, q.target_path
            )));
        }
        if matches!(q.answer_type, AnswerType::EnumChoice | AnswerType::MultiChoice) && q.choices.is_empty() {
            return Err(CatalogError::Invalid(format!("question {} offers no choices", q.id)));
        }
        // Only questions already seen are in the dictionary, so a forward or
        // self reference fails here and the graph stays acyclic.
        if let Some(p) = &q.visible_if {
            p.check(&earlier).map_err(|e| CatalogError::Predicate {
                rule_id: q.id.clone(),
                detail: e.to_string(),
            })?;
        }
        if let Some(ty) = q.answer_type.fact_type() {
            earlier.insert(q.id.clone(), ty);
        }
    }
    let unasked: Vec<&str> = fria_required_paths().filter(|p| !targets.contains_key(p)).collect();
    if !unasked.is_empty() {
        return Err(CatalogError::Invalid(format!(
            "no question collects: {}",
            unasked.join(", ")
        )));
    }
    let checksum = crate::canonical::digest(&file).expect("questionnaire serializes");
    Ok(QuestionSet {
        version: file.version,
        locale: file.locale,
        questions: file.questions,
        checksum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(questions: Vec<serde_json::Value>) -> Vec<u8> {
        serde_json::to_vec(&serde_json::json!({"version": "t", "locale": "en", "questions": questions})).unwrap()
    }

    fn all_required() -> Vec<serde_json::Value> {
        fria_required_paths()
            .enumerate()
            .map(|(i, p)| serde_json::json!({"id": format!("q{i}"), "prompt": p, "answer_type": "Text", "target_path": p}))
            .collect()
    }

    #[test]
    fn totality_is_enforced() {
        assert!(load_questionnaire(&doc(all_required())).is_ok());
        let mut qs = all_required();
        qs.pop();
        assert!(load_questionnaire(&doc(qs)).is_err());
    }

    #[test]
    fn forward_references_are_rejected() {
        let mut qs = all_required();
        qs[0]["visible_if"] = serde_json::json!({"op": "equals", "field": "q5", "value": "x"});
        match load_questionnaire(&doc(qs)) {
            Err(CatalogError::Predicate { rule_id, .. }) => assert_eq!(rule_id, "q0"),
            other => panic!("expected predicate error, got {other:?}"),
        }
    }

    #[test]
    fn self_reference_is_rejected() {
        let mut qs = all_required();
        qs[3]["visible_if"] = serde_json::json!({"op": "equals", "field": "q3", "value": "x"});
        assert!(load_questionnaire(&doc(qs)).is_err());
    }
}
