use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// EU member states plus the three EEA states (Iceland, Liechtenstein, Norway).
const MEMBERS: [(&str, &str); 30] = [
    ("AT", "Austria"),
    ("BE", "Belgium"),
    ("BG", "Bulgaria"),
    ("HR", "Croatia"),
    ("CY", "Cyprus"),
    ("CZ", "Czechia"),
    ("DK", "Denmark"),
    ("EE", "Estonia"),
    ("FI", "Finland"),
    ("FR", "France"),
    ("DE", "Germany"),
    ("GR", "Greece"),
    ("HU", "Hungary"),
    ("IE", "Ireland"),
    ("IT", "Italy"),
    ("LV", "Latvia"),
    ("LT", "Lithuania"),
    ("LU", "Luxembourg"),
    ("MT", "Malta"),
    ("NL", "Netherlands"),
    ("PL", "Poland"),
    ("PT", "Portugal"),
    ("RO", "Romania"),
    ("SK", "Slovakia"),
    ("SI", "Slovenia"),
    ("ES", "Spain"),
    ("SE", "Sweden"),
    ("IS", "Iceland"),
    ("LI", "Liechtenstein"),
    ("NO", "Norway"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown jurisdiction code '{0}' (expected one of the 30 EU/EEA country codes)")]
pub struct UnknownJurisdiction(pub String);

/// One of the 30 EU/EEA jurisdictions with a data protection authority.
///
/// Serialized as its two-letter code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jurisdiction {
    index: u8,
}

impl Jurisdiction {
    pub fn new(code: &str) -> Result<Self, UnknownJurisdiction> {
        let upper = code.trim().to_ascii_uppercase();
        // Greece is "EL" in EU institutional usage.
        let lookup = if upper == "EL" { "GR" } else { upper.as_str() };
        MEMBERS
            .iter()
            .position(|(c, _)| *c == lookup)
            .map(|i| Self { index: i as u8 })
            .ok_or(UnknownJurisdiction(code.to_string()))
    }

    pub fn code(&self) -> &'static str {
        MEMBERS[self.index as usize].0
    }

    pub fn name(&self) -> &'static str {
        MEMBERS[self.index as usize].1
    }

    pub fn all() -> impl Iterator<Item = Jurisdiction> {
        (0..MEMBERS.len() as u8).map(|index| Self { index })
    }
}

impl fmt::Display for Jurisdiction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Jurisdiction {
    type Err = UnknownJurisdiction;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl Serialize for Jurisdiction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Jurisdiction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        Jurisdiction::new(&code).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_thirty_admissible_codes() {
        let codes: std::collections::BTreeSet<_> = Jurisdiction::all().map(|j| j.code()).collect();
        assert_eq!(codes.len(), 30);
    }

    #[test]
    fn unknown_codes_are_rejected() {
        assert!(Jurisdiction::new("US").is_err());
        assert!(Jurisdiction::new("GB").is_err());
        assert!(Jurisdiction::new("").is_err());
    }

    #[test]
    fn lookup_is_case_insensitive_and_accepts_el() {
        assert_eq!(Jurisdiction::new("ie").unwrap().name(), "Ireland");
        assert_eq!(Jurisdiction::new("EL").unwrap().code(), "GR");
    }

    #[test]
    fn serializes_as_code() {
        let j = Jurisdiction::new("NO").unwrap();
        assert_eq!(serde_json::to_string(&j).unwrap(), "\"NO\"");
        let back: Jurisdiction = serde_json::from_str("\"NO\"").unwrap();
        assert_eq!(back, j);
        assert!(serde_json::from_str::<Jurisdiction>("\"XX\"").is_err());
    }
}
