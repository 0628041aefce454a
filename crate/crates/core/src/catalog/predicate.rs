//! Closed boolean expression language used by rules, impact tables and
//! question visibility.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Semantic type of a named fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldType {
    Bool,
    /// Integer on the 1-5 scale.
    Ordinal,
    /// Set of strings.
    Tags,
    Text,
}

/// A fact value as seen by predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactValue {
    Bool(bool),
    Ordinal(u8),
    Tags(BTreeSet<String>),
    Text(String),
}

impl FactValue {
    pub fn field_type(&self) -> FieldType {
        match self {
            FactValue::Bool(_) => FieldType::Bool,
            FactValue::Ordinal(_) => FieldType::Ordinal,
            FactValue::Tags(_) => FieldType::Tags,
            FactValue::Text(_) => FieldType::Text,
        }
    }

    pub fn tags<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Self {
        FactValue::Tags(items.into_iter().map(Into::into).collect())
    }

    /// Reads a JSON value as a fact of the given type.
    pub fn from_json(ty: FieldType, v: &Value) -> Option<Self> {
        match ty {
            FieldType::Bool => v.as_bool().map(FactValue::Bool),
            FieldType::Ordinal => v.as_u64().and_then(|n| u8::try_from(n).ok()).map(FactValue::Ordinal),
            FieldType::Text => v.as_str().map(|s| FactValue::Text(s.to_string())),
            FieldType::Tags => v.as_array().map(|items| {
                FactValue::Tags(
                    items
                        .iter()
                        .filter_map(|i| i.as_str().map(str::to_string))
                        .collect(),
                )
            }),
        }
    }
}

impl fmt::Display for FactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactValue::Bool(b) => write!(f, "{b}"),
            FactValue::Ordinal(n) => write!(f, "{n}"),
            FactValue::Text(s) => write!(f, "'{s}'"),
            FactValue::Tags(t) => {
                let items: Vec<&str> = t.iter().map(String::as_str).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

/// Anything predicates can be evaluated against.
pub trait FactSource {
    /// `None` means the fact is unknown, which is different from false.
    fn fact(&self, name: &str) -> Option<FactValue>;
}

impl FactSource for BTreeMap<String, FactValue> {
    fn fact(&self, name: &str) -> Option<FactValue> {
        self.get(name).cloned()
    }
}

/// Layers facts: the overlay is consulted first.
pub struct Overlay<'a> {
    pub overlay: &'a BTreeMap<String, FactValue>,
    pub base: &'a dyn FactSource,
}

impl FactSource for Overlay<'_> {
    fn fact(&self, name: &str) -> Option<FactValue> {
        self.overlay.get(name).cloned().or_else(|| self.base.fact(name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", deny_unknown_fields)]
pub enum Predicate {
    #[serde(rename = "equals")]
    Equals { field: String, value: Value },
    #[serde(rename = "contains-tag")]
    ContainsTag { field: String, value: String },
    #[serde(rename = "threshold-gte")]
    ThresholdGte { field: String, value: i64 },
    #[serde(rename = "and")]
    And { args: Vec<Predicate> },
    #[serde(rename = "or")]
    Or { args: Vec<Predicate> },
    #[serde(rename = "not")]
    Not { arg: Box<Predicate> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("field '{0}' is not declared")]
    UndeclaredField(String),
    #[error("operator '{op}' cannot be applied to field '{field}' of type {ty:?}")]
    OperatorMismatch { op: &'static str, field: String, ty: FieldType },
    #[error("value {value} does not fit field '{field}' of type {ty:?}")]
    ValueMismatch { field: String, ty: FieldType, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("fact '{0}' is needed but not provided")]
    MissingField(String),
    #[error("fact '{field}' has type {found:?} where {expected:?} is needed")]
    WrongType { field: String, expected: FieldType, found: FieldType },
}

impl Predicate {
    pub fn equals(field: &str, value: impl Into<Value>) -> Self {
        Predicate::Equals {
            field: field.to_string(),
            value: value.into(),
        }
    }

    pub fn contains_tag(field: &str, tag: &str) -> Self {
        Predicate::ContainsTag {
            field: field.to_string(),
            value: tag.to_string(),
        }
    }

    pub fn gte(field: &str, threshold: i64) -> Self {
        Predicate::ThresholdGte {
            field: field.to_string(),
            value: threshold,
        }
    }

    pub fn and(args: Vec<Predicate>) -> Self {
        Predicate::And { args }
    }

    pub fn or(args: Vec<Predicate>) -> Self {
        Predicate::Or { args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Predicate) -> Self {
        Predicate::Not { arg: Box::new(arg) }
    }

    /// Every field name referenced anywhere in the tree, in first-seen order.
    pub fn fields(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_fields(&mut out);
        out
    }

    fn collect_fields<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Predicate::Equals { field, .. }
            | Predicate::ContainsTag { field, .. }
            | Predicate::ThresholdGte { field, .. } => {
                if !out.contains(&field.as_str()) {
                    out.push(field);
                }
            }
            Predicate::And { args } | Predicate::Or { args } => {
                args.iter().for_each(|a| a.collect_fields(out));
            }
            Predicate::Not { arg } => arg.collect_fields(out),
        }
    }

    /// Static check against a field dictionary: names are declared and every
    /// operator and literal fits the field's type.
    pub fn check(&self, dictionary: &BTreeMap<String, FieldType>) -> Result<(), CheckError> {
        let lookup = |field: &str| {
            dictionary
                .get(field)
                .copied()
                .ok_or_else(|| CheckError::UndeclaredField(field.to_string()))
        };
        match self {
            Predicate::Equals { field, value } => {
                let ty = lookup(field)?;
                let fits = match ty {
                    FieldType::Bool => value.is_boolean(),
                    FieldType::Ordinal => value.as_u64().is_some_and(|n| (1..=5).contains(&n)),
                    FieldType::Text => value.is_string(),
                    FieldType::Tags => {
                        return Err(CheckError::OperatorMismatch {
                            op: "equals",
                            field: field.clone(),
                            ty,
                        })
                    }
                };
                if fits {
                    Ok(())
                } else {
                    Err(CheckError::ValueMismatch {
                        field: field.clone(),
                        ty,
                        value: value.to_string(),
                    })
                }
            }
            Predicate::ContainsTag { field, .. } => match lookup(field)? {
                FieldType::Tags => Ok(()),
                ty => Err(CheckError::OperatorMismatch {
                    op: "contains-tag",
                    field: field.clone(),
                    ty,
                }),
            },
            Predicate::ThresholdGte { field, value } => match lookup(field)? {
                FieldType::Ordinal if (1..=5).contains(value) => Ok(()),
                FieldType::Ordinal => Err(CheckError::ValueMismatch {
                    field: field.clone(),
                    ty: FieldType::Ordinal,
                    value: value.to_string(),
                }),
                ty => Err(CheckError::OperatorMismatch {
                    op: "threshold-gte",
                    field: field.clone(),
                    ty,
                }),
            },
            Predicate::And { args } | Predicate::Or { args } => args.iter().try_for_each(|a| a.check(dictionary)),
            Predicate::Not { arg } => arg.check(dictionary),
        }
    }

    /// Evaluates with short-circuiting, so a fact is only required when its
    /// value can change the result.
    pub fn eval(&self, facts: &dyn FactSource) -> Result<bool, EvalError> {
        self.eval_traced(facts, &mut Vec::new())
    }

    /// Like [`Predicate::eval`], also recording one line per atom actually
    /// evaluated.
    pub fn eval_traced(&self, facts: &dyn FactSource, notes: &mut Vec<String>) -> Result<bool, EvalError> {
        match self {
            Predicate::Equals { field, value } => {
                let fact = need(facts, field)?;
                let result = match (&fact, value) {
                    (FactValue::Bool(b), Value::Bool(v)) => b == v,
                    (FactValue::Ordinal(n), v) if v.is_u64() => v.as_u64() == Some(u64::from(*n)),
                    (FactValue::Text(s), Value::String(v)) => s == v,
                    (found, _) => {
                        return Err(EvalError::WrongType {
                            field: field.clone(),
                            expected: literal_type(value),
                            found: found.field_type(),
                        })
                    }
                };
                notes.push(format!("{field} = {fact} {} {value}", if result { "==" } else { "!=" }));
                Ok(result)
            }
            Predicate::ContainsTag { field, value } => match need(facts, field)? {
                FactValue::Tags(tags) => {
                    let result = tags.contains(value);
                    notes.push(format!(
                        "{field} {} '{value}'",
                        if result { "contains" } else { "lacks" }
                    ));
                    Ok(result)
                }
                other => Err(EvalError::WrongType {
                    field: field.clone(),
                    expected: FieldType::Tags,
                    found: other.field_type(),
                }),
            },
            Predicate::ThresholdGte { field, value } => match need(facts, field)? {
                FactValue::Ordinal(n) => {
                    let result = i64::from(n) >= *value;
                    notes.push(format!("{field} = {n} {} {value}", if result { ">=" } else { "<" }));
                    Ok(result)
                }
                other => Err(EvalError::WrongType {
                    field: field.clone(),
                    expected: FieldType::Ordinal,
                    found: other.field_type(),
                }),
            },
            Predicate::And { args } => {
                for a in args {
                    if !a.eval_traced(facts, notes)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Predicate::Or { args } => {
                for a in args {
                    if a.eval_traced(facts, notes)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Predicate::Not { arg } => Ok(!arg.eval_traced(facts, notes)?),
        }
    }
}

fn need(facts: &dyn FactSource, field: &str) -> Result<FactValue, EvalError> {
    facts.fact(field).ok_or_else(|| EvalError::MissingField(field.to_string()))
}

fn literal_type(v: &Value) -> FieldType {
    match v {
        Value::Bool(_) => FieldType::Bool,
        Value::Number(_) => FieldType::Ordinal,
        Value::Array(_) => FieldType::Tags,
        _ => FieldType::Text,
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Equals { field, value } => write!(f, "{field} == {value}"),
            Predicate::ContainsTag { field, value } => write!(f, "{field} contains '{value}'"),
            Predicate::ThresholdGte { field, value } => write!(f, "{field} >= {value}"),
            Predicate::And { args } | Predicate::Or { args } if args.is_empty() => {
                f.write_str(if matches!(self, Predicate::And { .. }) { "true" } else { "false" })
            }
            Predicate::And { args } | Predicate::Or { args } => {
                let sep = if matches!(self, Predicate::And { .. }) { " and " } else { " or " };
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Predicate::Not { arg } => write!(f, "not {arg}"),
        }
    }
}
