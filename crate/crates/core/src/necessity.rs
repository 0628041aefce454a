//! Stage 1: is a DPIA and/or a FRIA required, and why.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::predicate::{EvalError, Overlay};
use crate::catalog::{resolve_outcome, ConditionCatalog, ConditionRule, FactSource, FactValue, Outcome, Predicate, RuleSource};
use crate::model::{DataProfile, DpiaDescription, Jurisdiction, SystemProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subject {
    Dpia,
    Fria,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredRule {
    pub rule_id: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub overriding: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub rule_id: String,
    pub source: RuleSource,
    pub predicate_result: bool,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AreaMatch {
    pub area: String,
    pub rule_id: String,
    pub source: RuleSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighRiskClassification {
    pub matches: Vec<AreaMatch>,
}

impl HighRiskClassification {
    pub fn is_high_risk(&self) -> bool {
        !self.matches.is_empty()
    }

    pub fn areas(&self) -> BTreeSet<&str> {
        self.matches.iter().map(|m| m.area.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessityDecision {
    pub subject: Subject,
    pub outcome: Outcome,
    pub fired_rules: Vec<FiredRule>,
    pub trace: Vec<TraceEntry>,
    pub jurisdiction: Jurisdiction,
    pub catalog_version: String,
    /// What still has to be settled by a person when the outcome is Conditional.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub open_conditions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<HighRiskClassification>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NecessityError {
    #[error("rule '{rule_id}' needs field '{field}', which the profile does not provide")]
    MissingField { field: String, rule_id: String },
    #[error("rule '{rule_id}': {detail}")]
    WrongType { rule_id: String, detail: String },
}

fn role_name<T: std::fmt::Debug>(v: &T) -> String {
    format!("{v:?}")
}

pub fn data_facts(d: &DataProfile) -> BTreeMap<String, FactValue> {
    let mut f = BTreeMap::new();
    let mut put = |k: &str, v: FactValue| {
        f.insert(k.to_string(), v);
    };
    put("processes_personal_data", FactValue::Bool(d.processes_personal_data));
    put("special_category", FactValue::Bool(d.special_category));
    put("automated_processing", FactValue::Bool(d.automated_processing));
    put("profiling_or_scoring", FactValue::Bool(d.profiling_or_scoring));
    put("automated_decision_making", FactValue::Bool(d.automated_decision_making));
    put("vulnerable_subjects", FactValue::Bool(d.vulnerable_subjects));
    put("cross_border", FactValue::Bool(d.cross_border));
    put("scale.data", FactValue::Ordinal(d.scale.data.get()));
    put("scale.operations", FactValue::Ordinal(d.scale.operations.get()));
    put("scale.subjects", FactValue::Ordinal(d.scale.subjects.get()));
    if let Some(l) = d.locality {
        put("locality", FactValue::Text(l.as_str().to_string()));
    }
    f
}

fn attribute_fact(v: &serde_json::Value) -> Option<FactValue> {
    use serde_json::Value;
    match v {
        Value::Bool(b) => Some(FactValue::Bool(*b)),
        Value::Number(n) => n.as_u64().and_then(|n| u8::try_from(n).ok()).map(FactValue::Ordinal),
        Value::String(s) => Some(FactValue::Text(s.clone())),
        Value::Array(items) => Some(FactValue::Tags(
            items.iter().filter_map(|i| i.as_str().map(str::to_string)).collect(),
        )),
        _ => None,
    }
}

impl FactSource for DataProfile {
    fn fact(&self, name: &str) -> Option<FactValue> {
        data_facts(self).remove(name)
    }
}

impl FactSource for DpiaDescription {
    fn fact(&self, name: &str) -> Option<FactValue> {
        DataProfile::from_description(self).fact(name)
    }
}

impl FactSource for SystemProfile {
    fn fact(&self, name: &str) -> Option<FactValue> {
        match name {
            "roles" => Some(FactValue::Tags(self.roles.iter().map(role_name).collect())),
            "annex_areas" => Some(FactValue::Tags(self.annex_areas.clone())),
            "annex_i_areas" => Some(FactValue::Tags(self.annex_i_areas.clone())),
            "third_party_conformity" => Some(FactValue::Bool(self.third_party_conformity)),
            "exemptions" => Some(FactValue::Tags(self.exemptions.clone())),
            _ => self
                .data
                .as_ref()
                .and_then(|d| d.fact(name))
                .or_else(|| self.attributes.get(name).and_then(attribute_fact)),
        }
    }
}

/// A system profile whose data part is taken from a DPIA description when
/// the profile itself does not carry one.
pub struct ProfileWithDpia<'a> {
    pub profile: &'a SystemProfile,
    pub dpia: &'a DpiaDescription,
}

impl FactSource for ProfileWithDpia<'_> {
    fn fact(&self, name: &str) -> Option<FactValue> {
        self.profile.fact(name).or_else(|| self.dpia.fact(name))
    }
}

/// What a DPIA necessity check runs on. Only inputs that describe an AI
/// system are matched against the Annex III rules.
#[derive(Clone, Copy)]
pub enum DpiaInput<'a> {
    Description(&'a DpiaDescription),
    Profile(&'a SystemProfile),
    Combined(&'a SystemProfile, &'a DpiaDescription),
}

impl<'a> From<&'a DpiaDescription> for DpiaInput<'a> {
    fn from(d: &'a DpiaDescription) -> Self {
        DpiaInput::Description(d)
    }
}

impl<'a> From<&'a SystemProfile> for DpiaInput<'a> {
    fn from(p: &'a SystemProfile) -> Self {
        DpiaInput::Profile(p)
    }
}

fn eval_rule(
    rule: &ConditionRule,
    predicate: &Predicate,
    facts: &dyn FactSource,
) -> Result<(bool, String), NecessityError> {
    let mut notes = Vec::new();
    let result = predicate.eval_traced(facts, &mut notes).map_err(|e| match e {
        EvalError::MissingField(field) => NecessityError::MissingField {
            field,
            rule_id: rule.id.clone(),
        },
        other => NecessityError::WrongType {
            rule_id: rule.id.clone(),
            detail: other.to_string(),
        },
    })?;
    let mut explanation = if notes.is_empty() {
        "no condition can match".to_string()
    } else {
        notes.join(", ")
    };
    if result {
        explanation.push_str(&format!(" => {}", rule.outcome));
        if rule.overriding {
            explanation.push_str(" (overriding exemption)");
        }
    }
    Ok((result, explanation))
}

struct Evaluation {
    fired: Vec<FiredRule>,
    trace: Vec<TraceEntry>,
    open: Vec<String>,
}

impl Evaluation {
    fn new() -> Self {
        Self {
            fired: Vec::new(),
            trace: Vec::new(),
            open: Vec::new(),
        }
    }

    fn run(
        &mut self,
        rule: &ConditionRule,
        predicate: &Predicate,
        facts: &dyn FactSource,
        decisive: bool,
    ) -> Result<bool, NecessityError> {
        let (result, explanation) = eval_rule(rule, predicate, facts)?;
        self.trace.push(TraceEntry {
            rule_id: rule.id.clone(),
            source: rule.source,
            predicate_result: result,
            explanation,
        });
        if result && decisive {
            self.fired.push(FiredRule {
                rule_id: rule.id.clone(),
                outcome: rule.outcome,
                overriding: rule.overriding,
            });
            if rule.outcome == Outcome::Conditional {
                let text = if rule.notes.is_empty() { &rule.citation } else { &rule.notes };
                self.open.push(format!("{}: {}", rule.id, text));
            }
        }
        Ok(result)
    }

    fn decide(self, subject: Subject, j: Jurisdiction, c: &ConditionCatalog) -> NecessityDecision {
        let outcome = resolve_outcome(self.fired.iter().map(|f| (f.outcome, f.overriding)));
        let open_conditions = if outcome == Outcome::Conditional { self.open } else { Vec::new() };
        NecessityDecision {
            subject,
            outcome,
            fired_rules: self.fired,
            trace: self.trace,
            jurisdiction: j,
            catalog_version: c.version.clone(),
            open_conditions,
            classification: None,
        }
    }
}

const DPIA_SOURCES: [RuleSource; 3] = [RuleSource::GdprArt35, RuleSource::EdpbGuideline, RuleSource::DpaList];

/// Decides whether a DPIA is needed. Annex III rules take part only when the
/// input describes an AI system, and then only together with the processing
/// of personal data.
pub fn evaluate_dpia_necessity<'a>(
    input: impl Into<DpiaInput<'a>>,
    j: Jurisdiction,
    c: &ConditionCatalog,
) -> Result<NecessityDecision, NecessityError> {
    let input = input.into();
    let combined;
    let (facts, ai_system): (&dyn FactSource, bool) = match input {
        DpiaInput::Description(d) => (d, false),
        DpiaInput::Profile(p) => (p, true),
        DpiaInput::Combined(p, d) => {
            combined = ProfileWithDpia { profile: p, dpia: d };
            (&combined, true)
        }
    };
    let mut ev = Evaluation::new();
    for rule in c.rules.iter().filter(|r| r.jurisdictions.includes(j)) {
        if DPIA_SOURCES.contains(&rule.source) {
            ev.run(rule, &rule.predicate, facts, true)?;
        } else if rule.source == RuleSource::AiActAnnexIII && ai_system {
            let guarded = Predicate::and(vec![
                Predicate::equals("processes_personal_data", true),
                rule.predicate.clone(),
            ]);
            ev.run(rule, &guarded, facts, true)?;
        }
    }
    Ok(ev.decide(Subject::Dpia, j, c))
}

const CLASSIFICATION_SOURCES: [RuleSource; 2] = [RuleSource::AiActAnnexI, RuleSource::AiActAnnexIII];
const FRIA_SOURCES: [RuleSource; 2] = [RuleSource::AiActArt6, RuleSource::AiActArt27];

fn classify_into(
    facts: &dyn FactSource,
    c: &ConditionCatalog,
    scope: Option<Jurisdiction>,
    ev: &mut Evaluation,
) -> Result<HighRiskClassification, NecessityError> {
    let mut class = HighRiskClassification::default();
    for rule in c
        .rules
        .iter()
        .filter(|r| CLASSIFICATION_SOURCES.contains(&r.source))
        .filter(|r| scope.is_none_or(|j| r.jurisdictions.includes(j)))
    {
        if ev.run(rule, &rule.predicate, facts, false)? {
            class.matches.push(AreaMatch {
                area: rule.area.clone().unwrap_or_else(|| rule.id.clone()),
                rule_id: rule.id.clone(),
                source: rule.source,
            });
        }
    }
    Ok(class)
}

/// The Annex I and Annex III rules that match the profile.
pub fn classify_high_risk(p: &SystemProfile, c: &ConditionCatalog) -> Result<HighRiskClassification, NecessityError> {
    classify_into(p, c, None, &mut Evaluation::new())
}

/// Decides whether the deployer has to carry out a FRIA. Annex rules
/// classify the system; their result is exposed to the Art.6 and Art.27
/// rules as the facts `high_risk` and `high_risk_areas`, and only those
/// rules decide the outcome.
pub fn evaluate_fria_necessity(
    p: &SystemProfile,
    j: Jurisdiction,
    c: &ConditionCatalog,
) -> Result<NecessityDecision, NecessityError> {
    let mut ev = Evaluation::new();
    let class = classify_into(p, c, Some(j), &mut ev)?;
    let mut derived = BTreeMap::new();
    derived.insert("high_risk".to_string(), FactValue::Bool(class.is_high_risk()));
    derived.insert(
        "high_risk_areas".to_string(),
        FactValue::Tags(class.matches.iter().map(|m| m.area.clone()).collect()),
    );
    let facts = Overlay {
        overlay: &derived,
        base: p,
    };
    for rule in c
        .rules
        .iter()
        .filter(|r| FRIA_SOURCES.contains(&r.source) && r.jurisdictions.includes(j))
    {
        ev.run(rule, &rule.predicate, &facts, true)?;
    }
    let mut decision = ev.decide(Subject::Fria, j, c);
    decision.classification = Some(class);
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::predicate::FieldType;
    use crate::catalog::JurisdictionScope;
    use crate::model::{EntityRole, Ordinal};

    fn dict() -> BTreeMap<String, FieldType> {
        [
            ("roles", FieldType::Tags),
            ("annex_areas", FieldType::Tags),
            ("exemptions", FieldType::Tags),
            ("processes_personal_data", FieldType::Bool),
            ("special_category", FieldType::Bool),
            ("scale.data", FieldType::Ordinal),
            ("high_risk", FieldType::Bool),
            ("high_risk_areas", FieldType::Tags),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn rule(id: &str, source: RuleSource, predicate: Predicate, outcome: Outcome) -> ConditionRule {
        ConditionRule {
            id: id.into(),
            source,
            jurisdictions: JurisdictionScope::All,
            predicate,
            outcome,
            citation: "test".into(),
            notes: String::new(),
            overriding: false,
            area: None,
        }
    }

    fn catalog(rules: Vec<ConditionRule>) -> ConditionCatalog {
        ConditionCatalog::from_parts("test", dict(), rules).unwrap()
    }

    fn ie() -> Jurisdiction {
        "IE".parse().unwrap()
    }

    #[test]
    fn missing_field_names_rule_and_field() {
        let c = catalog(vec![rule(
            "g1",
            RuleSource::GdprArt35,
            Predicate::equals("special_category", true),
            Outcome::Required,
        )]);
        let p = SystemProfile::deployer();
        assert_eq!(
            evaluate_dpia_necessity(&p, ie(), &c),
            Err(NecessityError::MissingField {
                field: "special_category".into(),
                rule_id: "g1".into()
            })
        );
    }

    #[test]
    fn fria_requires_decisive_rule() {
        let mut area = rule(
            "a3",
            RuleSource::AiActAnnexIII,
            Predicate::contains_tag("annex_areas", "annex3.1.a"),
            Outcome::Required,
        );
        area.area = Some("annex3.1".into());
        let duty = rule(
            "art27",
            RuleSource::AiActArt27,
            Predicate::and(vec![
                Predicate::contains_tag("roles", "Deployer"),
                Predicate::equals("high_risk", true),
            ]),
            Outcome::Required,
        );
        let c = catalog(vec![area, duty]);

        let p = SystemProfile::deployer().with_areas(["annex3.1.a"]);
        let d = evaluate_fria_necessity(&p, ie(), &c).unwrap();
        assert_eq!(d.outcome, Outcome::Required);
        assert_eq!(d.fired_rules.len(), 1);
        assert_eq!(d.trace.len(), 2);
        assert_eq!(d.classification.unwrap().areas(), BTreeSet::from(["annex3.1"]));

        let mut provider = p.clone();
        provider.roles = [EntityRole::Provider].into_iter().collect();
        let d = evaluate_fria_necessity(&provider, ie(), &c).unwrap();
        assert_eq!(d.outcome, Outcome::NotRequired);
        assert!(d.fired_rules.is_empty());
    }

    #[test]
    fn annex_rules_need_personal_data_for_dpia() {
        let c = catalog(vec![rule(
            "a3",
            RuleSource::AiActAnnexIII,
            Predicate::contains_tag("annex_areas", "annex3.1.a"),
            Outcome::Required,
        )]);
        let mut p = SystemProfile::deployer().with_areas(["annex3.1.a"]);
        p.data = Some(DataProfile::default());
        assert_eq!(evaluate_dpia_necessity(&p, ie(), &c).unwrap().outcome, Outcome::NotRequired);
        p.data.as_mut().unwrap().processes_personal_data = true;
        assert_eq!(evaluate_dpia_necessity(&p, ie(), &c).unwrap().outcome, Outcome::Required);

        let mut d = DpiaDescription::default();
        d.scale.data = Ordinal(5);
        let decision = evaluate_dpia_necessity(&d, ie(), &c).unwrap();
        assert!(decision.trace.is_empty());
    }
}
