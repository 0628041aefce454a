use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A value on the shared 1–5 ordinal scale (quality, scale, likelihood, severity).
///
/// Deserialization accepts any byte so that out-of-range values surface in
/// validation reports with a field path instead of as parse failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ordinal(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("ordinal {0} is outside the 1-5 range")]
pub struct OrdinalOutOfRange(pub i64);

impl Ordinal {
    pub const MIN: Ordinal = Ordinal(1);
    pub const MAX: Ordinal = Ordinal(5);

    pub fn new(value: i64) -> Result<Self, OrdinalOutOfRange> {
        if (1..=5).contains(&value) {
            Ok(Ordinal(value as u8))
        } else {
            Err(OrdinalOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn is_valid(self) -> bool {
        (1..=5).contains(&self.0)
    }

    /// `self - delta`, clamped to the bottom of the scale.
    pub fn saturating_reduce(self, delta: u32) -> Ordinal {
        let reduced = i64::from(self.0) - i64::from(delta);
        Ordinal(reduced.max(1) as u8)
    }
}

impl Default for Ordinal {
    fn default() -> Self {
        Ordinal::MIN
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataQuality {
    pub accuracy: Ordinal,
    pub completeness: Ordinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DataRole {
    Input,
    Output,
    Training,
    Validation,
    NotApplicable,
}

/// A category of personal data handled by the processing or the AI system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonalDataItem {
    pub name: String,
    /// Special category under GDPR Art.9.
    pub special_category: bool,
    pub is_inference: bool,
    pub quality: DataQuality,
    pub role_in_system: DataRole,
}

impl PersonalDataItem {
    pub fn new(name: impl Into<String>, role_in_system: DataRole) -> Self {
        Self {
            name: name.into(),
            special_category: false,
            is_inference: false,
            quality: DataQuality {
                accuracy: Ordinal(3),
                completeness: Ordinal(3),
            },
            role_in_system,
        }
    }

    pub fn special(mut self) -> Self {
        self.special_category = true;
        self
    }

    pub fn inferred(mut self) -> Self {
        self.is_inference = true;
        self
    }

    pub fn with_quality(mut self, accuracy: u8, completeness: u8) -> Self {
        self.quality = DataQuality {
            accuracy: Ordinal(accuracy),
            completeness: Ordinal(completeness),
        };
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinal_bounds() {
        assert!(Ordinal::new(0).is_err());
        assert!(Ordinal::new(6).is_err());
        assert_eq!(Ordinal::new(5).unwrap().get(), 5);
        assert!(!Ordinal(7).is_valid());
    }

    #[test]
    fn saturating_reduce_clamps_at_one() {
        assert_eq!(Ordinal(4).saturating_reduce(2), Ordinal(2));
        assert_eq!(Ordinal(2).saturating_reduce(9), Ordinal(1));
        assert_eq!(Ordinal(3).saturating_reduce(0), Ordinal(3));
    }
}
