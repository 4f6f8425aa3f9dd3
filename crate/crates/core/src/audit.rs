use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::eho::{Outcome, Role, SubModule};
use crate::ids::Id;
use crate::store::Document;

/// One authorization decision taken against live state. Append-only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub id: Id,
    pub actor: Id,
    pub role: Option<Role>,
    /// Either a policy action (`create`, `read`, ...) or an operation name
    /// for checks that are role gates rather than matrix lookups.
    pub action: String,
    pub submodule: Option<SubModule>,
    pub target: Option<String>,
    pub decision: Outcome,
    pub reason: String,
    pub timestamp: DateTime<Utc>,
}

impl Document for AuditEvent {
    const COLLECTION: &'static str = "audit";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}
