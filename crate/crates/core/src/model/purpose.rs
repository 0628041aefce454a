use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PurposeKind {
    /// Purpose the AI system was developed for.
    Development,
    /// Purpose the AI system was placed on the market for.
    MarketPlacement,
    /// Purpose of collecting the data the system is built or operated with.
    DataCollection,
    /// Purpose the deployer actually uses the system for.
    Deployment,
}

/// A purpose, read together with the AI capabilities and domains it involves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Purpose {
    pub id: String,
    pub description: String,
    pub kind: PurposeKind,
    #[serde(default)]
    pub domain_tags: BTreeSet<String>,
    #[serde(default)]
    pub capability_tags: BTreeSet<String>,
}

impl Purpose {
    pub fn new(id: impl Into<String>, description: impl Into<String>, kind: PurposeKind) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            kind,
            domain_tags: BTreeSet::new(),
            capability_tags: BTreeSet::new(),
        }
    }

    pub fn with_domains<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.domain_tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn with_capabilities<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.capability_tags.extend(tags.into_iter().map(Into::into));
        self
    }
}
