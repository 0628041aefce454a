use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{parse_document, CatalogError, Exercise, Predicate, RightsCatalog, Taxonomy};
use crate::intake::person_fields;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ImpactCategory {
    Violated,
    Prevented,
    Limited,
    Denied,
    Unfulfilled,
    Obstructed,
}

impl fmt::Display for ImpactCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EscalationCondition {
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Escalation {
    pub category: ImpactCategory,
    pub condition: EscalationCondition,
}

/// Links a consequence kind and a person condition to a right and the ways
/// it is affected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactRule {
    pub id: String,
    pub consequence_kind: String,
    /// Evaluated against the affected-person profile.
    pub person_condition: Predicate,
    pub right: u16,
    pub categories: BTreeSet<ImpactCategory>,
    #[serde(default)]
    pub escalates_to: Option<Escalation>,
    /// Restricts the rule to rights exercised this way.
    #[serde(default)]
    pub right_exercise: Option<Exercise>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImpactRuleFile {
    version: String,
    rules: Vec<ImpactRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactRuleSet {
    pub version: String,
    pub rules: Vec<ImpactRule>,
    pub checksum: String,
}

impl ImpactRuleSet {
    pub fn new(
        version: &str,
        rules: Vec<ImpactRule>,
        rights: &RightsCatalog,
        consequences: &Taxonomy,
    ) -> Result<Self, CatalogError> {
        let file = ImpactRuleFile {
            version: version.to_string(),
            rules,
        };
        check(&file, rights, consequences)?;
        let checksum = crate::canonical::digest(&file).expect("rules serialize");
        Ok(Self {
            version: file.version,
            rules: file.rules,
            checksum,
        })
    }

    pub fn with_rule(&self, rule: ImpactRule, rights: &RightsCatalog, consequences: &Taxonomy) -> Result<Self, CatalogError> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        Self::new(&self.version, rules, rights, consequences)
    }
}

fn check(file: &ImpactRuleFile, rights: &RightsCatalog, consequences: &Taxonomy) -> Result<(), CatalogError> {
    let dict = person_fields();
    let mut ids = BTreeSet::new();
    for r in &file.rules {
        if !ids.insert(r.id.as_str()) {
            return Err(CatalogError::DuplicateId(r.id.clone()));
        }
        r.person_condition.check(&dict).map_err(|e| CatalogError::Predicate {
            rule_id: r.id.clone(),
            detail: e.to_string(),
        })?;
        if rights.get(r.right).is_none() {
            return Err(CatalogError::Invalid(format!("rule '{}' names unknown right Art.{}", r.id, r.right)));
        }
        if !consequences.contains(&r.consequence_kind) {
            return Err(CatalogError::Invalid(format!(
                "rule '{}' names unknown consequence '{}'",
                r.id, r.consequence_kind
            )));
        }
        if r.categories.is_empty() {
            return Err(CatalogError::Invalid(format!("rule '{}' has no impact category", r.id)));
        }
    }
    Ok(())
}

pub fn load_impact_rules(
    bytes: &[u8],
    rights: &RightsCatalog,
    consequences: &Taxonomy,
) -> Result<ImpactRuleSet, CatalogError> {
    let file: ImpactRuleFile = parse_document(bytes)?;
    ImpactRuleSet::new(&file.version, file.rules, rights, consequences)
}
