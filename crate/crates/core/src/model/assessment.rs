use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::dpia::DpiaDescription;
use super::fria::FriaDescription;
use super::jurisdiction::Jurisdiction;
use super::profile::SystemProfile;
use crate::bridge::{Conflict, FieldProvenance};
use crate::intake::{AffectedPersonProfile, CompatibilityResult};
use crate::necessity::NecessityDecision;
use crate::reporting::audit::AuditEvent;
use crate::rights_impact::{Leftover, RightsImpact};
use crate::risk::RiskItem;

pub const SCHEMA_VERSION: &str = "1.0";
pub const STAGES: [u8; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum StageState {
    #[default]
    NotStarted,
    InProgress,
    Complete,
    Skipped,
}

impl StageState {
    pub fn is_settled(self) -> bool {
        matches!(self, StageState::Complete | StageState::Skipped)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageError {
    #[error("there is no stage {stage}")]
    UnknownStage { stage: u8 },
    #[error("stage {stage} cannot be completed before stages {blocking:?}")]
    OrderViolation { stage: u8, blocking: Vec<u8> },
    #[error("stage {stage} cannot be skipped")]
    NotSkippable { stage: u8 },
    #[error("stage {stage} cannot be reopened while stage {later} is complete")]
    LaterStageComplete { stage: u8, later: u8 },
    #[error("stage {stage} is not ready: {reasons:?}")]
    NotReady { stage: u8, reasons: Vec<String> },
}

/// Who changes an assessment, and when. Every mutating operation takes one
/// so that the audit trail and `updated_at` stay reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeContext {
    pub actor: String,
    pub at: DateTime<Utc>,
}

impl ChangeContext {
    pub fn new(actor: impl Into<String>, at: DateTime<Utc>) -> Self {
        Self {
            actor: actor.into(),
            at,
        }
    }

    pub fn now(actor: impl Into<String>) -> Self {
        Self::new(actor, Utc::now())
    }
}

/// Stage 3 bookkeeping: raw answers and where prefilled values came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntakeState {
    /// Raw answers keyed by question id.
    pub answers: BTreeMap<String, Value>,
    /// FRIA leaf path -> DPIA origin of the prefilled value.
    pub prefilled: BTreeMap<String, FieldProvenance>,
    pub conflicts: Vec<Conflict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assessment {
    pub id: String,
    pub schema_version: String,
    pub jurisdiction: Jurisdiction,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub stage_states: BTreeMap<u8, StageState>,
    pub system_profile: Option<SystemProfile>,
    pub necessity: Option<NecessityDecision>,
    pub dpia_necessity: Option<NecessityDecision>,
    pub dpia: Option<DpiaDescription>,
    pub fria: Option<FriaDescription>,
    pub intake: IntakeState,
    pub compatibility: Option<CompatibilityResult>,
    pub affected_profiles: Vec<AffectedPersonProfile>,
    pub risks: Vec<RiskItem>,
    pub impacts: Vec<RightsImpact>,
    pub impact_leftovers: Vec<Leftover>,
    /// Set when risks change after impacts were derived.
    pub impacts_stale: bool,
    /// Catalog name -> version used while assessing.
    pub catalog_versions: BTreeMap<String, String>,
    pub audit_log: Vec<AuditEvent>,
}

impl Assessment {
    pub fn new(id: impl Into<String>, jurisdiction: Jurisdiction, ctx: &ChangeContext) -> Self {
        let mut a = Self {
            id: id.into(),
            schema_version: SCHEMA_VERSION.to_string(),
            jurisdiction,
            created_at: ctx.at,
            updated_at: ctx.at,
            stage_states: STAGES.iter().map(|&n| (n, StageState::NotStarted)).collect(),
            system_profile: None,
            necessity: None,
            dpia_necessity: None,
            dpia: None,
            fria: None,
            intake: IntakeState::default(),
            compatibility: None,
            affected_profiles: Vec::new(),
            risks: Vec::new(),
            impacts: Vec::new(),
            impact_leftovers: Vec::new(),
            impacts_stale: false,
            catalog_versions: BTreeMap::new(),
            audit_log: Vec::new(),
        };
        let payload = serde_json::json!({ "id": a.id, "jurisdiction": a.jurisdiction });
        a.record(ctx, "assessment.created", &payload);
        a
    }

    pub fn stage(&self, n: u8) -> StageState {
        self.stage_states.get(&n).copied().unwrap_or_default()
    }

    /// Earlier stages that are neither complete nor skipped.
    pub fn blocking_stages(&self, n: u8) -> Vec<u8> {
        (1..n).filter(|&m| !self.stage(m).is_settled()).collect()
    }

    pub fn check_can_complete(&self, n: u8) -> Result<(), StageError> {
        known_stage(n)?;
        let blocking = self.blocking_stages(n);
        if blocking.is_empty() {
            Ok(())
        } else {
            Err(StageError::OrderViolation { stage: n, blocking })
        }
    }

    pub fn complete_stage(&self, n: u8, ctx: &ChangeContext) -> Result<Self, StageError> {
        let mut next = self.clone();
        next.set_stage(n, StageState::Complete)?;
        next.record(ctx, "stage.completed", &serde_json::json!({ "stage": n }));
        Ok(next)
    }

    pub fn skip_stage(&self, n: u8, ctx: &ChangeContext) -> Result<Self, StageError> {
        let mut next = self.clone();
        next.set_stage(n, StageState::Skipped)?;
        next.record(ctx, "stage.skipped", &serde_json::json!({ "stage": n }));
        Ok(next)
    }

    pub fn start_stage(&self, n: u8, ctx: &ChangeContext) -> Result<Self, StageError> {
        let mut next = self.clone();
        next.set_stage(n, StageState::InProgress)?;
        next.record(ctx, "stage.started", &serde_json::json!({ "stage": n }));
        Ok(next)
    }

    /// The single place stage states change. Enforces ordering for
    /// completion and refuses to unsettle a stage that a later, completed
    /// stage depends on.
    pub(crate) fn set_stage(&mut self, n: u8, state: StageState) -> Result<(), StageError> {
        known_stage(n)?;
        match state {
            StageState::Complete => self.check_can_complete(n)?,
            StageState::Skipped if n != 2 => return Err(StageError::NotSkippable { stage: n }),
            StageState::Skipped => {}
            StageState::NotStarted | StageState::InProgress => {
                if let Some(later) = ((n + 1)..=5).find(|&m| self.stage(m) == StageState::Complete) {
                    return Err(StageError::LaterStageComplete { stage: n, later });
                }
            }
        }
        self.stage_states.insert(n, state);
        Ok(())
    }

    /// Moves a stage to InProgress unless it is already past that point.
    pub(crate) fn touch_stage(&mut self, n: u8) {
        if self.stage(n) == StageState::NotStarted {
            let _ = self.set_stage(n, StageState::InProgress);
        }
    }

    /// Appends one audit event and advances `updated_at`.
    pub(crate) fn record<T: Serialize>(&mut self, ctx: &ChangeContext, action: &str, payload: &T) {
        let seq = self.audit_log.last().map_or(1, |e| e.seq + 1);
        self.audit_log.push(AuditEvent {
            seq,
            timestamp: ctx.at,
            actor: ctx.actor.clone(),
            action: action.to_string(),
            payload_digest: crate::canonical::digest(payload).expect("audit payloads are plain data"),
        });
        self.updated_at = ctx.at;
    }

    /// Stages that keep the FRIA report from compiling.
    pub fn stages_missing_for_report(&self) -> Vec<u8> {
        STAGES[..4]
            .iter()
            .copied()
            .filter(|&n| {
                let s = self.stage(n);
                if n == 2 {
                    !s.is_settled()
                } else {
                    s != StageState::Complete
                }
            })
            .collect()
    }
}

fn known_stage(n: u8) -> Result<(), StageError> {
    if STAGES.contains(&n) {
        Ok(())
    } else {
        Err(StageError::UnknownStage { stage: n })
    }
}
