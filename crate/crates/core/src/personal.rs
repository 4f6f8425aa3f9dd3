//! Patient-authored personal records: diary (habits, exercise, spiritual and
//! emotional), the health plan, and the read-only account statement.

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::clinic::{Actor, Clinic};
use crate::eho::payload::{fields, FieldKind};
use crate::eho::{Action, HealthObject, Outcome, Role, SubModule};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::store::{Batch, Document};

impl Document for HealthObject {
    const COLLECTION: &'static str = "objects";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiaryEntry {
    pub submodule: SubModule,
    pub occurred_at: DateTime<Utc>,
    /// Named quantities; keys must be registered for the sub-module.
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    /// Named free-text fields such as `meal` or `activity`.
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
    #[serde(default)]
    pub note: String,
}

impl DiaryEntry {
    fn to_payload(&self) -> std::result::Result<Value, String> {
        let registry = fields(self.submodule).unwrap_or(&[]);
        let mut map = Map::new();
        map.insert("occurred_at".into(), Value::String(self.occurred_at.to_rfc3339()));
        if !self.note.is_empty() {
            map.insert("note".into(), Value::String(self.note.clone()));
        }
        for (k, v) in &self.labels {
            map.insert(k.clone(), Value::String(v.clone()));
        }
        for (k, &v) in &self.metrics {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("metric `{k}` must be finite and non-negative"));
            }
            let integral = matches!(
                registry.iter().find(|f| f.name == k).map(|f| f.kind),
                Some(FieldKind::Count | FieldKind::Mood)
            );
            let value = if integral && v.fract() == 0.0 {
                Value::from(v as u64)
            } else {
                serde_json::Number::from_f64(v).map(Value::Number).ok_or("bad number")?
            };
            map.insert(k.clone(), value);
        }
        Ok(Value::Object(map))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalStatus {
    Active,
    Met,
    Abandoned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Goal {
    pub title: String,
    pub target_metric: String,
    #[serde(default)]
    pub target_value: Option<f64>,
    pub due: NaiveDate,
    pub status: GoalStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HealthPlan {
    pub goals: Vec<Goal>,
}

impl HealthPlan {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for goal in &self.goals {
            if goal.title.trim().is_empty() {
                return Err("goal title must not be empty".into());
            }
            if goal.target_value.is_some_and(|v| !v.is_finite()) {
                return Err("goal target must be finite".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineItem {
    pub service: String,
    pub date: NaiveDate,
    /// Minor currency units.
    pub amount_cents: i64,
    pub covered: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountStatement {
    pub items: Vec<LineItem>,
    pub balance_cents: i64,
}

impl AccountStatement {
    pub fn uncovered_total(&self) -> i64 {
        self.items.iter().filter(|i| !i.covered).map(|i| i.amount_cents).sum()
    }

    pub fn push(&mut self, item: LineItem) {
        self.items.push(item);
        self.balance_cents = self.uncovered_total();
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.items.iter().any(|i| i.amount_cents < 0) {
            return Err("line item amounts must be non-negative".into());
        }
        if self.balance_cents != self.uncovered_total() {
            return Err("balance must equal the sum of uncovered amounts".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RevisionState {
    Pending,
    Accepted,
    Rejected,
}

/// A plan change proposed by someone whose decision was AllowAsRequest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRevisionRequest {
    pub id: Id,
    pub owner: Id,
    pub proposed_by: Id,
    pub plan: HealthPlan,
    pub state: RevisionState,
    pub created_at: DateTime<Utc>,
}

impl Document for PlanRevisionRequest {
    const COLLECTION: &'static str = "plan_revisions";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

/// Points at the single health object holding a patient's plan or statement.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct OwnerIndex {
    key: String,
    object: Id,
}

impl Document for OwnerIndex {
    const COLLECTION: &'static str = "owner_index";
    fn key(&self) -> String {
        self.key.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "lowercase")]
pub enum PlanOutcome {
    Applied(HealthObject),
    Pending(PlanRevisionRequest),
}

fn occurred_at(obj: &HealthObject) -> Option<DateTime<Utc>> {
    obj.payload
        .get("occurred_at")?
        .as_str()
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .map(|t| t.with_timezone(&Utc))
}

impl Clinic {
    /// Store a diary entry as a version-1 health object.
    pub fn record_entry(&self, actor: &Actor, owner: &Id, entry: &DiaryEntry) -> Result<HealthObject> {
        if !matches!(entry.submodule, SubModule::HB | SubModule::EX | SubModule::SE) {
            return Err(ClinicError::SchemaMismatch(entry.submodule, "diary entries are HB, EX or SE".into()));
        }
        self.require(actor, owner, entry.submodule, Action::Create, None)?;
        let now = self.now();
        if entry.occurred_at > now + self.config.future_tolerance {
            return Err(ClinicError::FutureTimestamp);
        }
        let payload = entry
            .to_payload()
            .map_err(|m| ClinicError::SchemaMismatch(entry.submodule, m))?;
        let obj = HealthObject::wrap(self.next_id(), entry.submodule, owner.clone(), actor.id.clone(), payload, now)
            .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
        let mut batch = Batch::new();
        batch.insert(&obj);
        self.store.commit(batch)?;
        Ok(obj)
    }

    /// Diary entries whose `occurred_at` lies in `[from, to]`, newest first,
    /// ties broken by id descending.
    pub fn view_timeline(
        &self,
        actor: &Actor,
        owner: &Id,
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    ) -> Result<Vec<HealthObject>> {
        self.gate(actor, "timeline.view", Some(owner), actor.speaks_for(owner), "timeline.owner-or-delegate")?;
        self.require(actor, owner, SubModule::HB, Action::Read, None)?;
        let mut entries: Vec<(DateTime<Utc>, HealthObject)> = self
            .store
            .scan::<HealthObject>()?
            .into_iter()
            .map(|v| v.value)
            .filter(|o| &o.owner == owner && matches!(o.submodule, SubModule::HB | SubModule::EX | SubModule::SE))
            .filter_map(|o| occurred_at(&o).map(|t| (t, o)))
            .filter(|(t, _)| *t >= from && *t <= to)
            .collect();
        entries.sort_by(|(ta, a), (tb, b)| (tb, &b.id).cmp(&(ta, &a.id)));
        Ok(entries.into_iter().map(|(_, o)| o).collect())
    }

    fn indexed_object(&self, key: &str) -> Result<Option<(u64, HealthObject)>> {
        let Some(index) = self.store.get::<OwnerIndex>(key)? else {
            return Ok(None);
        };
        let obj = self
            .store
            .get::<HealthObject>(&index.value.object.0)?
            .ok_or_else(|| ClinicError::NotFound("object", index.value.object.0.clone()))?;
        Ok(Some((obj.version, obj.value)))
    }

    pub fn health_plan(&self, actor: &Actor, owner: &Id) -> Result<Option<HealthObject>> {
        self.require(actor, owner, SubModule::HP, Action::Read, None)?;
        Ok(self.indexed_object(&format!("plan:{owner}"))?.map(|(_, o)| o))
    }

    /// Create or replace the owner's plan. `expected_version`, when given,
    /// must match the stored plan version (0 = no plan yet).
    pub fn upsert_health_plan(
        &self,
        actor: &Actor,
        owner: &Id,
        plan: &HealthPlan,
        expected_version: Option<u64>,
    ) -> Result<PlanOutcome> {
        let key = format!("plan:{owner}");
        let existing = self.indexed_object(&key)?;
        let action = if existing.is_some() { Action::Update } else { Action::Create };
        let decision = self.authorize(actor, owner, SubModule::HP, action, None)?;
        let payload = serde_json::to_value(plan).expect("plan serializes");
        crate::eho::validate_payload(SubModule::HP, &payload)
            .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;

        match decision.outcome {
            Outcome::Deny => Err(ClinicError::PermissionDenied(decision.reason)),
            Outcome::AllowAsRequest => {
                let request = PlanRevisionRequest {
                    id: self.next_id(),
                    owner: owner.clone(),
                    proposed_by: actor.id.clone(),
                    plan: plan.clone(),
                    state: RevisionState::Pending,
                    created_at: self.now(),
                };
                let mut batch = Batch::new();
                batch.insert(&request);
                self.store.commit(batch)?;
                Ok(PlanOutcome::Pending(request))
            }
            Outcome::Allow => self
                .apply_plan(owner, &actor.id, payload, existing, expected_version)
                .map(PlanOutcome::Applied),
        }
    }

    fn apply_plan(
        &self,
        owner: &Id,
        author: &Id,
        payload: Value,
        existing: Option<(u64, HealthObject)>,
        expected_version: Option<u64>,
    ) -> Result<HealthObject> {
        let key = format!("plan:{owner}");
        let found = existing.as_ref().map_or(0, |(v, _)| *v);
        if let Some(expected) = expected_version {
            if expected != found {
                return Err(crate::store::StoreError::VersionConflict {
                    collection: HealthObject::COLLECTION.into(),
                    key,
                    expected,
                    found,
                }
                .into());
            }
        }
        let now = self.now();
        let mut batch = Batch::new();
        let obj = match existing {
            Some((version, mut obj)) => {
                obj.revise(author.clone(), payload, now)
                    .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
                batch.put(&obj, version);
                obj
            }
            None => {
                let obj = HealthObject::wrap(self.next_id(), SubModule::HP, owner.clone(), author.clone(), payload, now)
                    .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
                // the index insert fails if a concurrent writer created a plan first
                batch.insert(&OwnerIndex { key, object: obj.id.clone() });
                batch.insert(&obj);
                obj
            }
        };
        self.store.commit(batch)?;
        let plans = self
            .store
            .scan::<HealthObject>()?
            .into_iter()
            .filter(|o| o.value.submodule == SubModule::HP && &o.value.owner == owner)
            .count();
        if plans > 1 {
            return Err(ClinicError::TwoActivePlans(owner.0.clone()));
        }
        Ok(obj)
    }

    pub fn pending_plan_revisions(&self, actor: &Actor, owner: &Id) -> Result<Vec<PlanRevisionRequest>> {
        self.require(actor, owner, SubModule::HP, Action::Read, None)?;
        Ok(self
            .store
            .scan::<PlanRevisionRequest>()?
            .into_iter()
            .map(|v| v.value)
            .filter(|r| &r.owner == owner && r.state == RevisionState::Pending)
            .collect())
    }

    /// The owner accepts or rejects a proposed plan revision.
    pub fn review_plan_revision(&self, actor: &Actor, revision: &Id, accept: bool) -> Result<PlanRevisionRequest> {
        let current = self
            .store
            .get::<PlanRevisionRequest>(&revision.0)?
            .ok_or_else(|| ClinicError::NotFound("plan revision", revision.0.clone()))?;
        let owner = current.value.owner.clone();
        let action = if self.indexed_object(&format!("plan:{owner}"))?.is_some() { Action::Update } else { Action::Create };
        self.require(actor, &owner, SubModule::HP, action, Some(revision))?;
        if current.value.state != RevisionState::Pending {
            return Err(ClinicError::IllegalTransition("revision already reviewed".into()));
        }
        let mut request = current.value;
        request.state = if accept { RevisionState::Accepted } else { RevisionState::Rejected };
        if accept {
            let payload = serde_json::to_value(&request.plan).expect("plan serializes");
            let existing = self.indexed_object(&format!("plan:{owner}"))?;
            self.apply_plan(&owner, &request.proposed_by, payload, existing, None)?;
        }
        let mut batch = Batch::new();
        batch.put(&request, current.version);
        self.store.commit(batch)?;
        Ok(request)
    }

    /// Account statement for the owner. Patients only ever read it.
    pub fn view_account(&self, actor: &Actor, owner: &Id) -> Result<AccountStatement> {
        self.require(actor, owner, SubModule::AC, Action::Read, None)?;
        match self.indexed_object(&format!("account:{owner}"))? {
            Some((_, obj)) => serde_json::from_value(obj.payload)
                .map_err(|e| ClinicError::SchemaMismatch(SubModule::AC, e.to_string())),
            None => Ok(AccountStatement::default()),
        }
    }

    /// Billing staff (Admin) append a line item; the balance is recomputed.
    pub fn add_line_item(&self, actor: &Actor, owner: &Id, item: LineItem) -> Result<AccountStatement> {
        self.gate(actor, "account.add-item", Some(owner), actor.role == Role::Admin, "account.admin-only")?;
        if item.amount_cents < 0 {
            return Err(ClinicError::SchemaMismatch(SubModule::AC, "amount must be non-negative".into()));
        }
        self.retrying(|| {
            let key = format!("account:{owner}");
            let now = self.now();
            let mut batch = Batch::new();
            let statement = match self.indexed_object(&key)? {
                Some((version, mut obj)) => {
                    let mut statement: AccountStatement = serde_json::from_value(obj.payload.clone())
                        .map_err(|e| ClinicError::SchemaMismatch(SubModule::AC, e.to_string()))?;
                    statement.push(item.clone());
                    obj.revise(actor.id.clone(), serde_json::to_value(&statement).unwrap(), now)
                        .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
                    batch.put(&obj, version);
                    statement
                }
                None => {
                    let mut statement = AccountStatement::default();
                    statement.push(item.clone());
                    let obj = HealthObject::wrap(
                        self.next_id(),
                        SubModule::AC,
                        owner.clone(),
                        actor.id.clone(),
                        serde_json::to_value(&statement).unwrap(),
                        now,
                    )
                    .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
                    batch.insert(&OwnerIndex { key: key.clone(), object: obj.id.clone() });
                    batch.insert(&obj);
                    statement
                }
            };
            self.store.commit(batch)?;
            Ok(statement)
        })
    }

    /// Online payment is not offered; statements are view-only.
    pub fn pay_online(&self, _actor: &Actor, _owner: &Id) -> Result<()> {
        Err(ClinicError::NotSupported("online payment"))
    }
}
