use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityRole {
    Controller,
    Processor,
    Recipient,
    DataSubject,
    Deployer,
    Provider,
    AiUser,
    AiSubject,
}

impl EntityRole {
    pub const ALL: [EntityRole; 8] = [
        EntityRole::Controller,
        EntityRole::Processor,
        EntityRole::Recipient,
        EntityRole::DataSubject,
        EntityRole::Deployer,
        EntityRole::Provider,
        EntityRole::AiUser,
        EntityRole::AiSubject,
    ];
}

/// How an entity relates to the deployer of the AI system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relationship {
    Contractual,
    Employment,
    ServiceRecipient,
    #[serde(rename = "None")]
    Unrelated,
}

impl Relationship {
    pub const ALL: [Relationship; 4] = [
        Relationship::Contractual,
        Relationship::Employment,
        Relationship::ServiceRecipient,
        Relationship::Unrelated,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Relationship::Contractual => "Contractual",
            Relationship::Employment => "Employment",
            Relationship::ServiceRecipient => "ServiceRecipient",
            Relationship::Unrelated => "None",
        }
    }
}

/// A party involved in processing or in the AI system's operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityRef {
    pub id: String,
    pub name: String,
    pub roles: BTreeSet<EntityRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relationship_to_deployer: Option<Relationship>,
}

impl EntityRef {
    pub fn new(id: impl Into<String>, name: impl Into<String>, roles: &[EntityRole]) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            roles: roles.iter().copied().collect(),
            relationship_to_deployer: None,
        }
    }

    pub fn with_relationship(mut self, relationship: Relationship) -> Self {
        self.relationship_to_deployer = Some(relationship);
        self
    }

    pub fn has_role(&self, role: EntityRole) -> bool {
        self.roles.contains(&role)
    }
}
