//! Editing sessions. A session names who is working on an assessment; while
//! one is open, writes to that assessment must come through it.

use std::collections::HashMap;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub session_id: String,
    pub assessment_id: String,
    pub owner: String,
    pub opened_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    /// Another owner holds the assessment.
    Held(Session),
    Unknown(String),
    WrongAssessment { session: String, assessment: String },
}

#[derive(Debug, Default)]
pub struct Sessions {
    by_id: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub fn new() -> Self {
        Self::default()
    }

    fn holder<'a>(map: &'a HashMap<String, Session>, assessment: &str) -> Option<&'a Session> {
        map.values().find(|s| s.assessment_id == assessment)
    }

    /// Opens a session, or returns the owner's existing one.
    pub fn open(&self, assessment: &str, owner: &str, now: DateTime<Utc>) -> Result<Session, SessionError> {
        let mut map = self.by_id.lock().expect("session lock poisoned");
        if let Some(s) = Self::holder(&map, assessment) {
            return if s.owner == owner {
                Ok(s.clone())
            } else {
                Err(SessionError::Held(s.clone()))
            };
        }
        let s = Session {
            session_id: uuid::Uuid::new_v4().simple().to_string(),
            assessment_id: assessment.to_string(),
            owner: owner.to_string(),
            opened_at: now,
        };
        map.insert(s.session_id.clone(), s.clone());
        Ok(s)
    }

    pub fn get(&self, id: &str) -> Option<Session> {
        self.by_id.lock().expect("session lock poisoned").get(id).cloned()
    }

    pub fn close(&self, id: &str) -> Option<Session> {
        self.by_id.lock().expect("session lock poisoned").remove(id)
    }

    /// Who is writing: the session owner, or `fallback` when nobody holds
    /// the assessment and no session was named.
    pub fn writer(&self, assessment: &str, session: Option<&str>, fallback: &str) -> Result<String, SessionError> {
        let map = self.by_id.lock().expect("session lock poisoned");
        match session {
            Some(id) => {
                let s = map.get(id).ok_or_else(|| SessionError::Unknown(id.to_string()))?;
                if s.assessment_id != assessment {
                    return Err(SessionError::WrongAssessment {
                        session: id.to_string(),
                        assessment: assessment.to_string(),
                    });
                }
                Ok(s.owner.clone())
            }
            None => match Self::holder(&map, assessment) {
                Some(s) => Err(SessionError::Held(s.clone())),
                None => Ok(fallback.to_string()),
            },
        }
    }
}
