use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::matrix::{Acceptability, AcceptabilityPolicy, RiskLevel, RiskMatrix};
use super::RiskError;
use crate::catalog::Taxonomies;
use crate::model::{Ordinal, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Lasting {
    Temporary,
    Lasting,
}

/// A consequence of a risk for one affected-person profile.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsequenceRef {
    pub taxonomy_id: String,
    pub affected_profile: String,
    /// Asserted by the assessor; there is no computed test for significance.
    pub significant: bool,
    pub lasting: Lasting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Eliminate,
    Reduce,
    Mitigate,
    Monitor,
}

pub const MAX_DELTA: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationRef {
    pub taxonomy_id: String,
    pub strategy: Strategy,
    pub likelihood_delta: u8,
    pub severity_delta: u8,
}

impl MitigationRef {
    pub fn new(taxonomy_id: &str, strategy: Strategy, likelihood_delta: u8, severity_delta: u8) -> Self {
        Self {
            taxonomy_id: taxonomy_id.to_string(),
            strategy,
            likelihood_delta,
            severity_delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residual {
    pub likelihood: Ordinal,
    pub severity: Ordinal,
    pub level: RiskLevel,
    /// An Eliminate mitigation forced the level to Low.
    pub eliminated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskItem {
    pub id: String,
    pub risk_kind: String,
    pub sources: BTreeSet<String>,
    pub threat_description: String,
    /// Unset on drafts until a person scores them.
    pub likelihood: Option<Ordinal>,
    pub severity: Option<Ordinal>,
    pub consequences: Vec<ConsequenceRef>,
    pub mitigations: Vec<MitigationRef>,
    pub residual: Option<Residual>,
}

impl RiskItem {
    pub fn draft(id: impl Into<String>, risk_kind: &str, sources: &[&str], threat: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            risk_kind: risk_kind.to_string(),
            sources: sources.iter().map(|s| s.to_string()).collect(),
            threat_description: threat.into(),
            likelihood: None,
            severity: None,
            consequences: Vec::new(),
            mitigations: Vec::new(),
            residual: None,
        }
    }

    pub fn is_scored(&self) -> bool {
        self.likelihood.is_some() && self.severity.is_some()
    }

    pub fn scored(mut self, likelihood: u8, severity: u8) -> Self {
        self.likelihood = Some(Ordinal(likelihood));
        self.severity = Some(Ordinal(severity));
        self
    }

    pub fn initial_level(&self, m: &RiskMatrix) -> Option<RiskLevel> {
        m.level(self.likelihood?, self.severity?).ok()
    }

    /// Structural checks, plus taxonomy references when taxonomies are given.
    pub fn validate(&self, taxonomies: Option<&Taxonomies>) -> ValidationReport {
        let mut r = ValidationReport::default();
        if self.id.trim().is_empty() {
            r.push("id", "non-empty", "risk id is empty");
        }
        for (name, v) in [("likelihood", self.likelihood), ("severity", self.severity)] {
            if let Some(v) = v {
                if !v.is_valid() {
                    r.push(name, "range-1-5", format!("value {v} is outside 1-5"));
                }
            }
        }
        for (i, m) in self.mitigations.iter().enumerate() {
            if m.likelihood_delta > MAX_DELTA || m.severity_delta > MAX_DELTA {
                r.push(format!("mitigations[{i}]"), "delta-0-4", "mitigation deltas must be within 0-4");
            }
        }
        if let Some(t) = taxonomies {
            if !t.risks.contains(&self.risk_kind) {
                r.push("risk_kind", "known-taxonomy-id", format!("unknown risk '{}'", self.risk_kind));
            }
            for s in &self.sources {
                if !t.sources.contains(s) {
                    r.push("sources", "known-taxonomy-id", format!("unknown risk source '{s}'"));
                }
            }
            for (i, c) in self.consequences.iter().enumerate() {
                if !t.consequences.contains(&c.taxonomy_id) {
                    r.push(
                        format!("consequences[{i}].taxonomy_id"),
                        "known-taxonomy-id",
                        format!("unknown consequence '{}'", c.taxonomy_id),
                    );
                }
            }
            for (i, m) in self.mitigations.iter().enumerate() {
                if !t.mitigations.contains(&m.taxonomy_id) {
                    r.push(
                        format!("mitigations[{i}].taxonomy_id"),
                        "known-taxonomy-id",
                        format!("unknown mitigation '{}'", m.taxonomy_id),
                    );
                }
            }
        }
        r
    }
}

/// Fills in the residual: each axis is reduced by the sum of its deltas and
/// clamped to 1. An Eliminate mitigation makes the level Low whatever the
/// scores.
pub fn apply_mitigations(r: &RiskItem, m: &RiskMatrix) -> Result<RiskItem, RiskError> {
    let (Some(l), Some(s)) = (r.likelihood, r.severity) else {
        return Err(RiskError::Unscored(r.id.clone()));
    };
    if let Some(bad) = r
        .mitigations
        .iter()
        .find(|x| x.likelihood_delta > MAX_DELTA || x.severity_delta > MAX_DELTA)
    {
        return Err(RiskError::DeltaOutOfRange(bad.taxonomy_id.clone()));
    }
    let dl: u32 = r.mitigations.iter().map(|x| u32::from(x.likelihood_delta)).sum();
    let ds: u32 = r.mitigations.iter().map(|x| u32::from(x.severity_delta)).sum();
    let likelihood = l.saturating_reduce(dl);
    let severity = s.saturating_reduce(ds);
    let eliminated = r.mitigations.iter().any(|x| x.strategy == Strategy::Eliminate);
    let level = if eliminated {
        RiskLevel::Low
    } else {
        m.level(likelihood, severity)?
    };
    let mut out = r.clone();
    out.residual = Some(Residual {
        likelihood,
        severity,
        level,
        eliminated,
    });
    Ok(out)
}

pub fn residual_acceptability(r: &RiskItem, policy: &AcceptabilityPolicy) -> Result<Acceptability, RiskError> {
    let residual = r.residual.ok_or_else(|| RiskError::NoResidual(r.id.clone()))?;
    Ok(policy.get(residual.level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogSet;

    fn risk(l: u8, s: u8, mitigations: Vec<MitigationRef>) -> RiskItem {
        let mut r = RiskItem::draft("r1", "r-stops-working", &["s-system"], "shutdown").scored(l, s);
        r.mitigations = mitigations;
        r
    }

    #[test]
    fn reduce_lowers_likelihood() {
        let cats = CatalogSet::seed();
        let r = risk(4, 4, vec![MitigationRef::new("m-prevent-reduce", Strategy::Reduce, 2, 0)]);
        let out = apply_mitigations(&r, &cats.matrix).unwrap();
        let res = out.residual.unwrap();
        assert_eq!((res.likelihood, res.severity), (Ordinal(2), Ordinal(4)));
        assert!(!res.eliminated);
    }

    #[test]
    fn eliminate_forces_low() {
        let cats = CatalogSet::seed();
        let r = risk(5, 5, vec![MitigationRef::new("m-prevent-reduce", Strategy::Eliminate, 0, 0)]);
        let res = apply_mitigations(&r, &cats.matrix).unwrap().residual.unwrap();
        assert_eq!(res.level, RiskLevel::Low);
        assert!(res.eliminated);
    }

    #[test]
    fn no_mitigation_is_identity() {
        let cats = CatalogSet::seed();
        let r = risk(3, 4, vec![]);
        let res = apply_mitigations(&r, &cats.matrix).unwrap().residual.unwrap();
        assert_eq!((res.likelihood, res.severity), (Ordinal(3), Ordinal(4)));
        assert_eq!(Some(res.level), r.initial_level(&cats.matrix));
    }

    #[test]
    fn unscored_and_oversized_deltas() {
        let cats = CatalogSet::seed();
        let draft = RiskItem::draft("d", "r-stops-working", &[], "x");
        assert_eq!(apply_mitigations(&draft, &cats.matrix), Err(RiskError::Unscored("d".into())));
        let r = risk(3, 3, vec![MitigationRef::new("m-audit", Strategy::Reduce, 5, 0)]);
        assert!(apply_mitigations(&r, &cats.matrix).is_err());
        assert!(r.validate(None).has_violation_at("mitigations[0]"));
    }

    #[test]
    fn acceptability_defaults() {
        let cats = CatalogSet::seed();
        let low = apply_mitigations(&risk(1, 1, vec![]), &cats.matrix).unwrap();
        assert_eq!(residual_acceptability(&low, &cats.acceptability), Ok(Acceptability::Acceptable));
        let worst = apply_mitigations(&risk(5, 5, vec![]), &cats.matrix).unwrap();
        assert_eq!(residual_acceptability(&worst, &cats.acceptability), Ok(Acceptability::Unacceptable));
        let always = AcceptabilityPolicy::constant("c", Acceptability::ConsultAuthority);
        assert_eq!(residual_acceptability(&low, &always), Ok(Acceptability::ConsultAuthority));
    }

    #[test]
    fn taxonomy_references_are_checked() {
        let cats = CatalogSet::seed();
        let r = RiskItem::draft("x", "r-unknown", &["s-system"], "t");
        assert!(r.validate(Some(&cats.taxonomies)).has_violation_at("risk_kind"));
    }
}
