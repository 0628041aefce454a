use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::predicate::{FieldType, Predicate};
use super::{parse_document, CatalogError};
use crate::model::Jurisdiction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleSource {
    GdprArt35,
    EdpbGuideline,
    DpaList,
    AiActAnnexI,
    AiActAnnexIII,
    AiActArt6,
    AiActArt27,
}

impl RuleSource {
    pub const ALL: [RuleSource; 7] = [
        RuleSource::GdprArt35,
        RuleSource::EdpbGuideline,
        RuleSource::DpaList,
        RuleSource::AiActAnnexI,
        RuleSource::AiActAnnexIII,
        RuleSource::AiActArt6,
        RuleSource::AiActArt27,
    ];
}

impl FromStr for RuleSource {
    type Err = String;

    /// Accepts the variant name or a short alias (`annex3`, `art35`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_', '.'], "");
        let source = match key.as_str() {
            "gdprart35" | "art35" | "gdpr" => RuleSource::GdprArt35,
            "edpbguideline" | "edpb" => RuleSource::EdpbGuideline,
            "dpalist" | "dpa" => RuleSource::DpaList,
            "aiactannexi" | "annexi" | "annex1" => RuleSource::AiActAnnexI,
            "aiactannexiii" | "annexiii" | "annex3" => RuleSource::AiActAnnexIII,
            "aiactart6" | "art6" => RuleSource::AiActArt6,
            "aiactart27" | "art27" => RuleSource::AiActArt27,
            _ => return Err(format!("unknown rule source '{s}'")),
        };
        Ok(source)
    }
}

impl fmt::Display for RuleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Result of a necessity rule. Variant order is the tie-break strength,
/// weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    NotRequired,
    Exempt,
    Conditional,
    Required,
}

impl Outcome {
    /// Whether an assessment has to be (or may have to be) carried out.
    pub fn is_yes(self) -> bool {
        matches!(self, Outcome::Required | Outcome::Conditional)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Combines the outcomes of fired rules: an overriding exemption wins,
/// otherwise the strongest outcome, and nothing fired means NotRequired.
pub fn resolve_outcome<I>(fired: I) -> Outcome
where
    I: IntoIterator<Item = (Outcome, bool)>,
{
    let mut best = Outcome::NotRequired;
    for (outcome, overriding) in fired {
        if outcome == Outcome::Exempt && overriding {
            return Outcome::Exempt;
        }
        best = best.max(outcome);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JurisdictionScope {
    All,
    Only(BTreeSet<Jurisdiction>),
}

impl JurisdictionScope {
    pub fn includes(&self, j: Jurisdiction) -> bool {
        match self {
            JurisdictionScope::All => true,
            JurisdictionScope::Only(set) => set.contains(&j),
        }
    }
}

impl Serialize for JurisdictionScope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            JurisdictionScope::All => s.serialize_str("All"),
            JurisdictionScope::Only(set) => set.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for JurisdictionScope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(BTreeSet<Jurisdiction>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "All" => Ok(JurisdictionScope::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "jurisdictions must be \"All\" or a list of codes, got \"{w}\""
            ))),
            Raw::List(set) => Ok(JurisdictionScope::Only(set)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionRule {
    pub id: String,
    pub source: RuleSource,
    pub jurisdictions: JurisdictionScope,
    pub predicate: Predicate,
    pub outcome: Outcome,
    pub citation: String,
    #[serde(default)]
    pub notes: String,
    /// An Exempt rule marked overriding beats any Required rule.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub overriding: bool,
    /// High-risk area label a classification rule stands for, e.g. `annex3.7`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionCatalogFile {
    version: String,
    field_dictionary: BTreeMap<String, FieldType>,
    rules: Vec<ConditionRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCatalog {
    pub version: String,
    pub field_dictionary: BTreeMap<String, FieldType>,
    pub rules: Vec<ConditionRule>,
    pub checksum: String,
}

impl ConditionCatalog {
    pub fn rule(&self, id: &str) -> Option<&ConditionRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn by_source(&self, source: RuleSource) -> impl Iterator<Item = &ConditionRule> {
        self.rules.iter().filter(move |r| r.source == source)
    }

    /// Builds a catalog from in-memory parts, applying the same checks as
    /// [`load_catalog`].
    pub fn from_parts(
        version: impl Into<String>,
        field_dictionary: BTreeMap<String, FieldType>,
        rules: Vec<ConditionRule>,
    ) -> Result<Self, CatalogError> {
        validate(ConditionCatalogFile {
            version: version.into(),
            field_dictionary,
            rules,
        })
    }

    /// Returns a new catalog with `rule` appended, re-validated.
    pub fn with_rule(&self, rule: ConditionRule) -> Result<Self, CatalogError> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        Self::from_parts(self.version.clone(), self.field_dictionary.clone(), rules)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ConditionCatalogFile {
            version: self.version.clone(),
            field_dictionary: self.field_dictionary.clone(),
            rules: self.rules.clone(),
        })
        .expect("catalog serializes")
    }
}

pub fn load_catalog(bytes: &[u8]) -> Result<ConditionCatalog, CatalogError> {
    let file: ConditionCatalogFile = parse_document(bytes)?;
    validate(file)
}

fn validate(file: ConditionCatalogFile) -> Result<ConditionCatalog, CatalogError> {
    let mut seen = BTreeSet::new();
    for rule in &file.rules {
        if !seen.insert(rule.id.as_str()) {
            return Err(CatalogError::DuplicateId(rule.id.clone()));
        }
        rule.predicate
            .check(&file.field_dictionary)
            .map_err(|e| CatalogError::Predicate {
                rule_id: rule.id.clone(),
                detail: e.to_string(),
            })?;
        if rule.overriding && rule.outcome != Outcome::Exempt {
            return Err(CatalogError::Invalid(format!(
                "rule '{}' is marked overriding but its outcome is {}",
                rule.id, rule.outcome
            )));
        }
    }
    let checksum = crate::canonical::digest(&file).expect("catalog serializes");
    Ok(ConditionCatalog {
        version: file.version,
        field_dictionary: file.field_dictionary,
        rules: file.rules,
        checksum,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyReport {
    pub required: usize,
    pub conditional: usize,
    pub not_required: usize,
    pub exempt: usize,
    pub total: usize,
}

pub fn tally_catalog(c: &ConditionCatalog, source: RuleSource) -> TallyReport {
    let mut t = TallyReport::default();
    for rule in c.by_source(source) {
        t.total += 1;
        match rule.outcome {
            Outcome::Required => t.required += 1,
            Outcome::Conditional => t.conditional += 1,
            Outcome::NotRequired => t.not_required += 1,
            Outcome::Exempt => t.exempt += 1,
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    const DICT: &str = r#"{"flag": "Bool", "roles": "Tags"}"#;

    fn doc(rules: &str) -> String {
        format!(r#"{{"version": "t1", "field_dictionary": {DICT}, "rules": {rules}}}"#)
    }

    fn rule(id: &str, field: &str) -> String {
        format!(
            r#"{{"id": "{id}", "source": "DpaList", "jurisdictions": ["IE"],
                "predicate": {{"op": "equals", "field": "{field}", "value": true}},
                "outcome": "Required", "citation": "test"}}"#
        )
    }

    #[test]
    fn empty_rules_load() {
        let c = load_catalog(doc("[]").as_bytes()).unwrap();
        assert!(c.rules.is_empty());
        assert_eq!(tally_catalog(&c, RuleSource::AiActAnnexIII), TallyReport::default());
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(load_catalog(b"{not json"), Err(CatalogError::Parse(_))));
        let unknown_key = r#"{"version": "x", "field_dictionary": {}, "rules": [], "extra": 1}"#;
        assert!(matches!(load_catalog(unknown_key.as_bytes()), Err(CatalogError::Schema(_))));
        let bad = doc(&format!("[{}]", rule("r-bad", "nonexistent")));
        match load_catalog(bad.as_bytes()) {
            Err(CatalogError::Predicate { rule_id, .. }) => assert_eq!(rule_id, "r-bad"),
            other => panic!("expected predicate error, got {other:?}"),
        }
        let dup = doc(&format!("[{},{}]", rule("r1", "flag"), rule("r1", "flag")));
        assert!(matches!(load_catalog(dup.as_bytes()), Err(CatalogError::DuplicateId(_))));
    }

    #[test]
    fn checksum_ignores_formatting_and_key_order() {
        let a = load_catalog(doc(&format!("[{}]", rule("r1", "flag"))).as_bytes()).unwrap();
        let reordered = format!(
            r#"{{"rules": [{}], "field_dictionary": {{"roles": "Tags", "flag": "Bool"}}, "version": "t1"}}"#,
            rule("r1", "flag")
        );
        let b = load_catalog(reordered.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum.len(), 64);
    }

    #[test]
    fn jurisdiction_scope_forms() {
        let all: JurisdictionScope = serde_json::from_str(r#""All""#).unwrap();
        assert!(all.includes("FR".parse().unwrap()));
        let some: JurisdictionScope = serde_json::from_str(r#"["IE", "FR"]"#).unwrap();
        assert!(some.includes("IE".parse().unwrap()));
        assert!(!some.includes("DE".parse().unwrap()));
        assert!(serde_json::from_str::<JurisdictionScope>(r#"["XX"]"#).is_err());
        assert!(serde_json::from_str::<JurisdictionScope>(r#""Some""#).is_err());
    }

    #[test]
    fn tie_break() {
        use Outcome::*;
        assert_eq!(resolve_outcome([]), NotRequired);
        assert_eq!(resolve_outcome([(Conditional, false), (Required, false)]), Required);
        assert_eq!(resolve_outcome([(Required, false), (Exempt, false)]), Required);
        assert_eq!(resolve_outcome([(Required, false), (Exempt, true)]), Exempt);
        assert_eq!(resolve_outcome([(Exempt, false), (NotRequired, false)]), Exempt);
    }

    #[test]
    fn source_aliases() {
        assert_eq!("annex3".parse::<RuleSource>(), Ok(RuleSource::AiActAnnexIII));
        assert_eq!("AiActArt27".parse::<RuleSource>(), Ok(RuleSource::AiActArt27));
        assert!("annex9".parse::<RuleSource>().is_err());
    }
}
