use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use parking_lot::RwLock;

use crate::audit::AuditEvent;
use crate::eho::policy::{EmpowermentPolicy, PolicyError};
use crate::eho::{Action, Decision, Outcome, Relation, Role, SubModule};
use crate::error::{ClinicError, Result};
use crate::ids::{Clock, Id, IdGen, SystemClock};
use crate::store::{Batch, DocStore};

/// The authenticated principal performing an operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Actor {
    pub id: Id,
    pub role: Role,
    /// For family delegates, the one patient they act for.
    pub delegate_of: Option<Id>,
}

impl Actor {
    pub fn new(id: impl Into<Id>, role: Role) -> Self {
        Actor { id: id.into(), role, delegate_of: None }
    }

    /// True if this actor is `owner` or the family delegate linked to `owner`.
    pub fn speaks_for(&self, owner: &Id) -> bool {
        &self.id == owner
            || (self.role == Role::FamilyDelegate && self.delegate_of.as_ref() == Some(owner))
    }
}

#[derive(Clone, Debug)]
pub struct ClinicConfig {
    pub presence_window: Duration,
    /// Rounds of salted SHA-256 applied to credentials.
    pub hash_rounds: u32,
    /// How far past "now" a diary entry may be dated.
    pub future_tolerance: Duration,
    /// Attempts made by operations that retry on a version conflict.
    pub max_retries: usize,
}

impl Default for ClinicConfig {
    fn default() -> Self {
        ClinicConfig {
            presence_window: Duration::seconds(90),
            hash_rounds: 10_000,
            future_tolerance: Duration::hours(24),
            max_retries: 8,
        }
    }
}

pub struct Clinic {
    pub(crate) store: DocStore,
    policy: RwLock<Arc<EmpowermentPolicy>>,
    clock: Arc<dyn Clock>,
    ids: IdGen,
    pub(crate) config: ClinicConfig,
    pub(crate) presence: RwLock<std::collections::HashMap<String, DateTime<Utc>>>,
    decisions: AtomicU64,
}

impl Clinic {
    pub fn new(store: DocStore, clock: Arc<dyn Clock>, config: ClinicConfig) -> Self {
        let ids = IdGen::new();
        for key in store.keys() {
            ids.observe(&Id(key));
        }
        Clinic {
            store,
            policy: RwLock::new(Arc::new(EmpowermentPolicy::default_policy())),
            clock,
            ids,
            config,
            presence: RwLock::new(Default::default()),
            decisions: AtomicU64::new(0),
        }
    }

    pub fn in_memory() -> Self {
        Clinic::new(DocStore::in_memory(), Arc::new(SystemClock), ClinicConfig::default())
    }

    pub fn with_clock(clock: Arc<dyn Clock>) -> Self {
        Clinic::new(DocStore::in_memory(), clock, ClinicConfig::default())
    }

    /// Start with `policy` instead of the shipped default.
    pub fn with_policy(self, policy: EmpowermentPolicy) -> Self {
        *self.policy.write() = Arc::new(policy);
        self
    }

    pub fn store(&self) -> &DocStore {
        &self.store
    }

    pub fn config(&self) -> &ClinicConfig {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub(crate) fn next_id(&self) -> Id {
        self.ids.next(self.clock.now())
    }

    /// Snapshot of the active policy. Callers keep using the snapshot for the
    /// whole request even if the policy is swapped meanwhile.
    pub fn policy(&self) -> Arc<EmpowermentPolicy> {
        self.policy.read().clone()
    }

    pub fn replace_policy(&self, policy: EmpowermentPolicy) -> Result<()> {
        let mut slot = self.policy.write();
        if policy.version() <= slot.version() {
            return Err(PolicyError::StaleVersion { current: slot.version(), new: policy.version() }.into());
        }
        *slot = Arc::new(policy);
        Ok(())
    }

    /// Number of authorization decisions taken (and audited) so far.
    pub fn decision_count(&self) -> u64 {
        self.decisions.load(Ordering::SeqCst)
    }

    pub fn audit_log(&self) -> Result<Vec<AuditEvent>> {
        Ok(self.store.scan::<AuditEvent>()?.into_iter().map(|v| v.value).collect())
    }

    pub(crate) fn relation(&self, actor: &Actor, owner: &Id, submodule: SubModule) -> Result<Relation> {
        if actor.speaks_for(owner) {
            return Ok(Relation::Owner);
        }
        if actor.role == Role::Clinician
            && submodule.is_emr()
            && self.has_active_grant(owner, &actor.id, submodule)?
        {
            return Ok(Relation::GrantedClinician);
        }
        if self.are_friends(&actor.id, owner)? {
            return Ok(Relation::Friend);
        }
        Ok(Relation::Unrelated)
    }

    /// Resolve `action` on `owner`'s `submodule` records for `actor` and
    /// record the decision in the audit log.
    pub(crate) fn authorize(
        &self,
        actor: &Actor,
        owner: &Id,
        submodule: SubModule,
        action: Action,
        target: Option<&Id>,
    ) -> Result<Decision> {
        let relation = self.relation(actor, owner, submodule)?;
        let decision = self.policy().resolve(actor.role, relation, submodule, action);
        self.record_decision(
            actor,
            action.as_str(),
            Some(submodule),
            target.map(|t| t.0.clone()).or_else(|| Some(owner.0.clone())),
            decision.outcome,
            &decision.reason,
        )?;
        Ok(decision)
    }

    /// Like [`Clinic::authorize`] but fails unless the outcome is a plain Allow.
    pub(crate) fn require(
        &self,
        actor: &Actor,
        owner: &Id,
        submodule: SubModule,
        action: Action,
        target: Option<&Id>,
    ) -> Result<()> {
        let decision = self.authorize(actor, owner, submodule, action, target)?;
        if decision.is_allow() {
            Ok(())
        } else {
            Err(ClinicError::PermissionDenied(decision.reason))
        }
    }

    /// Audit a check that is not a policy-matrix lookup (role gates,
    /// ownership checks) and turn a failed check into PermissionDenied.
    pub(crate) fn gate(
        &self,
        actor: &Actor,
        operation: &str,
        target: Option<&Id>,
        allowed: bool,
        reason: &str,
    ) -> Result<()> {
        let outcome = if allowed { Outcome::Allow } else { Outcome::Deny };
        self.record_decision(actor, operation, None, target.map(|t| t.0.clone()), outcome, reason)?;
        if allowed {
            Ok(())
        } else {
            Err(ClinicError::PermissionDenied(reason.to_owned()))
        }
    }

    pub(crate) fn record_decision(
        &self,
        actor: &Actor,
        action: &str,
        submodule: Option<SubModule>,
        target: Option<String>,
        decision: Outcome,
        reason: &str,
    ) -> Result<()> {
        let event = AuditEvent {
            id: self.next_id(),
            actor: actor.id.clone(),
            role: Some(actor.role),
            action: action.to_owned(),
            submodule,
            target,
            decision,
            reason: reason.to_owned(),
            timestamp: self.now(),
        };
        let mut batch = Batch::new();
        batch.insert(&event);
        self.store.commit(batch)?;
        self.decisions.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    /// Run a read-modify-write closure, re-running it when its commit loses
    /// a version race. The re-run sees the winner's state.
    pub(crate) fn retrying<T>(&self, mut op: impl FnMut() -> Result<T>) -> Result<T> {
        let mut attempt = 0;
        loop {
            match op() {
                Err(e) if e.is_conflict() && attempt + 1 < self.config.max_retries => attempt += 1,
                other => return other,
            }
        }
    }
}
