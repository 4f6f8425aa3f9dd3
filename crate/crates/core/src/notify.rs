//! Per-recipient notifications emitted by other modules.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::clinic::{Actor, Clinic};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::store::{Batch, Document};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NotificationKind {
    FriendRequest,
    NewMessage,
    MotdUpdated,
    EmrAdded,
    RequestDecided,
    FeedHighlight,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub id: Id,
    pub recipient: Id,
    pub kind: NotificationKind,
    pub ref_id: Id,
    pub read: bool,
    pub created_at: DateTime<Utc>,
}

impl Document for Notification {
    const COLLECTION: &'static str = "notifications";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

impl Clinic {
    /// Stage a notification in `batch`; it becomes visible when the batch commits.
    pub(crate) fn notify(&self, batch: &mut Batch, recipient: &Id, kind: NotificationKind, ref_id: &Id) {
        batch.insert(&Notification {
            id: self.next_id(),
            recipient: recipient.clone(),
            kind,
            ref_id: ref_id.clone(),
            read: false,
            created_at: self.now(),
        });
    }

    /// The actor's notifications, newest first.
    pub fn list_notifications(&self, actor: &Actor, unread_only: bool) -> Result<Vec<Notification>> {
        let mut out: Vec<Notification> = self
            .store
            .scan::<Notification>()?
            .into_iter()
            .map(|v| v.value)
            .filter(|n| n.recipient == actor.id && (!unread_only || !n.read))
            .collect();
        out.sort_by(|a, b| (b.created_at, &b.id).cmp(&(a.created_at, &a.id)));
        Ok(out)
    }

    pub fn unread_count(&self, actor: &Actor) -> Result<usize> {
        Ok(self.list_notifications(actor, true)?.len())
    }

    /// Mark notifications read. Idempotent; fails without changing anything
    /// if any id belongs to someone else.
    pub fn mark_read(&self, actor: &Actor, ids: &[Id]) -> Result<()> {
        self.retrying(|| {
            let mut batch = Batch::new();
            for id in ids {
                let current = self
                    .store
                    .get::<Notification>(&id.0)?
                    .ok_or_else(|| ClinicError::NotFound("notification", id.0.clone()))?;
                if current.value.recipient != actor.id {
                    return Err(ClinicError::NotOwner(id.0.clone()));
                }
                if !current.value.read {
                    let mut n = current.value;
                    n.read = true;
                    batch.put(&n, current.version);
                }
            }
            self.store.commit(batch)?;
            Ok(())
        })
    }
}
