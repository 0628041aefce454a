use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RiskError;
use crate::catalog::{parse_document, CatalogError};
use crate::model::Ordinal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    Low,
    Medium,
    High,
    VeryHigh,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 4] = [RiskLevel::Low, RiskLevel::Medium, RiskLevel::High, RiskLevel::VeryHigh];
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// 5x5 lookup table; `cells[l - 1][s - 1]` is the level for likelihood `l`
/// and severity `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskMatrix {
    pub version: String,
    pub cells: [[RiskLevel; 5]; 5],
}

impl RiskMatrix {
    pub fn new(version: impl Into<String>, cells: [[RiskLevel; 5]; 5]) -> Result<Self, CatalogError> {
        let m = Self {
            version: version.into(),
            cells,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), CatalogError> {
        if self.cells[0][0] != RiskLevel::Low {
            return Err(CatalogError::Invalid("cell (1,1) must be Low".into()));
        }
        if self.cells[4][4] != RiskLevel::VeryHigh {
            return Err(CatalogError::Invalid("cell (5,5) must be VeryHigh".into()));
        }
        for l in 0..5 {
            for s in 0..5 {
                if l + 1 < 5 && self.cells[l + 1][s] < self.cells[l][s] {
                    return Err(CatalogError::Invalid(format!(
                        "level drops from likelihood {} to {} at severity {}",
                        l + 1,
                        l + 2,
                        s + 1
                    )));
                }
                if s + 1 < 5 && self.cells[l][s + 1] < self.cells[l][s] {
                    return Err(CatalogError::Invalid(format!(
                        "level drops from severity {} to {} at likelihood {}",
                        s + 1,
                        s + 2,
                        l + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn level(&self, likelihood: Ordinal, severity: Ordinal) -> Result<RiskLevel, RiskError> {
        score_risk(i64::from(likelihood.get()), i64::from(severity.get()), self)
    }

    pub fn checksum(&self) -> String {
        crate::canonical::digest(self).expect("matrix serializes")
    }
}

pub fn load_risk_matrix(bytes: &[u8]) -> Result<RiskMatrix, CatalogError> {
    let m: RiskMatrix = parse_document(bytes)?;
    m.check()?;
    Ok(m)
}

pub fn score_risk(likelihood: i64, severity: i64, m: &RiskMatrix) -> Result<RiskLevel, RiskError> {
    for (name, v) in [("likelihood", likelihood), ("severity", severity)] {
        if !(1..=5).contains(&v) {
            return Err(RiskError::OutOfRange { field: name, value: v });
        }
    }
    Ok(m.cells[(likelihood - 1) as usize][(severity - 1) as usize])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Acceptability {
    Acceptable,
    ConsultAuthority,
    Unacceptable,
}

/// Maps residual levels to what happens next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptabilityPolicy {
    pub version: String,
    pub levels: BTreeMap<RiskLevel, Acceptability>,
}

impl AcceptabilityPolicy {
    pub fn constant(version: &str, a: Acceptability) -> Self {
        Self {
            version: version.to_string(),
            levels: RiskLevel::ALL.iter().map(|&l| (l, a)).collect(),
        }
    }

    pub fn get(&self, level: RiskLevel) -> Acceptability {
        self.levels[&level]
    }
}

pub fn load_acceptability_policy(bytes: &[u8]) -> Result<AcceptabilityPolicy, CatalogError> {
    let p: AcceptabilityPolicy = parse_document(bytes)?;
    if let Some(l) = RiskLevel::ALL.iter().find(|l| !p.levels.contains_key(l)) {
        return Err(CatalogError::Invalid(format!("policy does not cover level {l}")));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use RiskLevel::*;

    #[test]
    fn non_monotone_matrix_is_rejected() {
        let mut cells = [[High; 5]; 5];
        cells[0][0] = Low;
        cells[4][4] = VeryHigh;
        assert!(RiskMatrix::new("ok", cells).is_ok());
        cells[2][3] = Low;
        assert!(RiskMatrix::new("bad", cells).is_err());
    }

    #[test]
    fn corners_are_fixed() {
        let cells = [[Medium; 5]; 5];
        assert!(RiskMatrix::new("bad", cells).is_err());
    }

    #[test]
    fn out_of_range_scores() {
        let mut cells = [[High; 5]; 5];
        cells[0][0] = Low;
        cells[4][4] = VeryHigh;
        let m = RiskMatrix::new("m", cells).unwrap();
        assert_eq!(score_risk(0, 3, &m), Err(RiskError::OutOfRange { field: "likelihood", value: 0 }));
        assert_eq!(score_risk(3, 6, &m), Err(RiskError::OutOfRange { field: "severity", value: 6 }));
    }

    #[test]
    fn policy_must_be_total() {
        let doc = r#"{"version":"p","levels":{"Low":"Acceptable"}}"#;
        assert!(load_acceptability_policy(doc.as_bytes()).is_err());
    }
}
