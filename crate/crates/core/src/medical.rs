//! Medical care: clinician-authored EMR entries, patient-controlled access
//! grants, and the request/decision workflow for appointments, refills and
//! referrals.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clinic::{Actor, Clinic};
use crate::eho::{Action, HealthObject, Role, SubModule};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::notify::NotificationKind;
use crate::social::{Message, MessageKind};
use crate::store::{Batch, Document};

/// Sub-modules whose records form the electronic medical record.
pub const EMR_KINDS: [SubModule; 4] = [SubModule::XM, SubModule::EP, SubModule::TM, SubModule::RS];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessGrant {
    pub id: Id,
    pub patient: Id,
    pub grantee: Id,
    pub scope: BTreeSet<SubModule>,
    pub granted_at: DateTime<Utc>,
    pub revoked_at: Option<DateTime<Utc>>,
}

impl AccessGrant {
    pub fn is_active(&self) -> bool {
        self.revoked_at.is_none()
    }
}

impl Document for AccessGrant {
    const COLLECTION: &'static str = "grants";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestKind {
    Appointment,
    Refill,
    Referral,
}

impl RequestKind {
    pub fn submodule(self) -> SubModule {
        match self {
            RequestKind::Appointment => SubModule::EA,
            RequestKind::Refill => SubModule::EP,
            RequestKind::Referral => SubModule::RS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestState {
    Pending,
    Approved,
    Rejected,
    Rescheduled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum RequestOutcome {
    Approve,
    Reject,
    Reschedule { counter_offer: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CareRequest {
    pub id: Id,
    pub patient: Id,
    pub kind: RequestKind,
    /// Slot interval for appointments, EP entry id for refills, specialty for referrals.
    pub detail: String,
    #[serde(default)]
    pub reason: String,
    pub state: RequestState,
    pub submitted_by: Id,
    pub submitted_at: DateTime<Utc>,
    pub decided_by: Option<Id>,
    pub decided_at: Option<DateTime<Utc>>,
    pub counter_offer: Option<String>,
    /// Record produced by an approval (appointment, updated prescription, referral).
    pub result: Option<Id>,
}

impl Document for CareRequest {
    const COLLECTION: &'static str = "requests";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

/// Parse an ISO-8601 `start/end` interval of two RFC 3339 instants.
pub fn parse_slot(slot: &str) -> Result<(DateTime<Utc>, DateTime<Utc>)> {
    let bad = || ClinicError::Validation(format!("`{slot}` is not an ISO-8601 start/end interval"));
    let (start, end) = slot.split_once('/').ok_or_else(bad)?;
    let start = DateTime::parse_from_rfc3339(start.trim()).map_err(|_| bad())?.with_timezone(&Utc);
    let end = DateTime::parse_from_rfc3339(end.trim()).map_err(|_| bad())?.with_timezone(&Utc);
    if start >= end {
        return Err(bad());
    }
    Ok((start, end))
}

/// One line of an EMR export. Field order is fixed by declaration order.
#[derive(Serialize)]
struct ExportLine<'a> {
    id: &'a Id,
    kind: SubModule,
    patient: &'a Id,
    author: &'a Id,
    created_at: DateTime<Utc>,
    updated_at: DateTime<Utc>,
    version: u64,
    payload: &'a Value,
}

fn refills(obj: &HealthObject) -> i64 {
    obj.payload.get("refills_remaining").and_then(Value::as_i64).unwrap_or(0)
}

impl Clinic {
    pub fn has_active_grant(&self, patient: &Id, grantee: &Id, kind: SubModule) -> Result<bool> {
        Ok(self.store.scan::<AccessGrant>()?.into_iter().any(|g| {
            let g = g.value;
            &g.patient == patient && &g.grantee == grantee && g.is_active() && g.scope.contains(&kind)
        }))
    }

    fn require_patient(&self, patient: &Id) -> Result<()> {
        match self.store.get::<crate::accounts::UserAccount>(&patient.0)? {
            Some(a) if a.value.role == Role::Patient => Ok(()),
            _ => Err(ClinicError::UnknownPatient(patient.0.clone())),
        }
    }

    /// Append an EMR entry of `kind` for `patient`. A `corrects` field must
    /// name an existing entry of the same kind for the same patient.
    pub fn record_emr(&self, actor: &Actor, patient: &Id, kind: SubModule, payload: Value) -> Result<HealthObject> {
        self.record_emr_in(actor, patient, kind, payload, Batch::new())
    }

    fn record_emr_in(
        &self,
        actor: &Actor,
        patient: &Id,
        kind: SubModule,
        payload: Value,
        mut batch: Batch,
    ) -> Result<HealthObject> {
        if !EMR_KINDS.contains(&kind) {
            return Err(ClinicError::Validation(format!("{kind} is not an EMR kind")));
        }
        self.gate(actor, "emr.record", Some(patient), actor.role == Role::Clinician, "emr.clinician-only")?;
        self.require_patient(patient)?;
        self.require(actor, patient, kind, Action::Create, None)?;
        if let Some(target) = payload.get("corrects").and_then(Value::as_str) {
            let ok = self
                .store
                .get::<HealthObject>(target)?
                .is_some_and(|o| &o.value.owner == patient && o.value.submodule == kind);
            if !ok {
                return Err(ClinicError::NotFound("emr entry", target.to_owned()));
            }
        }
        let obj = HealthObject::wrap(self.next_id(), kind, patient.clone(), actor.id.clone(), payload, self.now())
            .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
        batch.insert(&obj);
        self.notify(&mut batch, patient, NotificationKind::EmrAdded, &obj.id);
        self.store.commit(batch)?;
        Ok(obj)
    }

    /// Record the outcome of a consultation as an XM entry. When `thread`
    /// names a consultation message from the patient, it is closed as well.
    pub fn record_consultation(
        &self,
        actor: &Actor,
        patient: &Id,
        note: &str,
        diagnosis: &[String],
        thread: Option<&Id>,
    ) -> Result<HealthObject> {
        let mut batch = Batch::new();
        if let Some(thread) = thread {
            let msg = self
                .store
                .get::<Message>(&thread.0)?
                .ok_or_else(|| ClinicError::NotFound("message", thread.0.clone()))?;
            if msg.value.kind != MessageKind::Consultation || &msg.value.from != patient || msg.value.to != actor.id {
                return Err(ClinicError::Validation("not a consultation thread between these parties".into()));
            }
            let mut closed = msg.value;
            closed.closed_by = Some(actor.id.clone());
            batch.put(&closed, msg.version);
        }
        self.record_emr_in(actor, patient, SubModule::XM, json!({ "note": note, "diagnosis": diagnosis }), batch)
    }

    /// EMR entries cannot be edited; corrections are new entries.
    pub fn update_emr(&self, actor: &Actor, entry: &Id, _payload: Value) -> Result<HealthObject> {
        let obj = self
            .store
            .get::<HealthObject>(&entry.0)?
            .ok_or_else(|| ClinicError::NotFound("emr entry", entry.0.clone()))?
            .value;
        if !EMR_KINDS.contains(&obj.submodule) {
            return Err(ClinicError::NotFound("emr entry", entry.0.clone()));
        }
        self.gate(actor, "emr.update", Some(entry), false, "emr.immutable").ok();
        Err(ClinicError::ImmutableEntry(entry.0.clone()))
    }

    /// Entries of the requested kinds, newest first. With no kinds given,
    /// every EMR kind the actor may read is returned, and the call is
    /// denied only when none is readable.
    pub fn read_emr(&self, actor: &Actor, patient: &Id, kinds: &[SubModule]) -> Result<Vec<HealthObject>> {
        if let Some(k) = kinds.iter().find(|k| !EMR_KINDS.contains(k)) {
            return Err(ClinicError::Validation(format!("{k} is not an EMR kind")));
        }
        self.require_patient(patient)?;
        let kinds: BTreeSet<SubModule> = if kinds.is_empty() {
            let mut readable = BTreeSet::new();
            let mut last_denial = None;
            for kind in EMR_KINDS {
                let decision = self.authorize(actor, patient, kind, Action::Read, None)?;
                if decision.is_allow() {
                    readable.insert(kind);
                } else {
                    last_denial = Some(decision.reason);
                }
            }
            if readable.is_empty() {
                return Err(ClinicError::PermissionDenied(last_denial.unwrap_or_default()));
            }
            readable
        } else {
            for kind in kinds {
                self.require(actor, patient, *kind, Action::Read, None)?;
            }
            kinds.iter().copied().collect()
        };
        let mut out: Vec<HealthObject> = self
            .store
            .scan::<HealthObject>()?
            .into_iter()
            .map(|v| v.value)
            .filter(|o| &o.owner == patient && kinds.contains(&o.submodule))
            .collect();
        out.sort_by(|a, b| (b.created_at, &b.id).cmp(&(a.created_at, &a.id)));
        Ok(out)
    }

    /// Newline-delimited JSON, one entry per line, oldest first.
    pub fn export_emr(&self, actor: &Actor, patient: &Id) -> Result<String> {
        let mut entries = self.read_emr(actor, patient, &[])?;
        entries.reverse();
        let mut out = String::new();
        for e in &entries {
            let line = ExportLine {
                id: &e.id,
                kind: e.submodule,
                patient: &e.owner,
                author: &e.author,
                created_at: e.created_at,
                updated_at: e.updated_at,
                version: e.version,
                payload: &e.payload,
            };
            out.push_str(&serde_json::to_string(&line).expect("export line serializes"));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn grant_access(&self, actor: &Actor, grantee: &Id, scope: &[SubModule]) -> Result<AccessGrant> {
        self.gate(actor, "grant.create", Some(grantee), actor.role == Role::Patient, "grant.patient-only")?;
        if scope.is_empty() {
            return Err(ClinicError::Validation("grant scope must not be empty".into()));
        }
        if let Some(k) = scope.iter().find(|k| !EMR_KINDS.contains(k)) {
            return Err(ClinicError::Validation(format!("{k} is not an EMR kind")));
        }
        match self.store.get::<crate::accounts::UserAccount>(&grantee.0)? {
            Some(a) if a.value.role == Role::Clinician => {}
            _ => return Err(ClinicError::Validation(format!("{grantee} is not a clinician"))),
        }
        let grant = AccessGrant {
            id: self.next_id(),
            patient: actor.id.clone(),
            grantee: grantee.clone(),
            scope: scope.iter().copied().collect(),
            granted_at: self.now(),
            revoked_at: None,
        };
        let mut batch = Batch::new();
        batch.insert(&grant);
        self.store.commit(batch)?;
        Ok(grant)
    }

    pub fn revoke_access(&self, actor: &Actor, grant: &Id) -> Result<AccessGrant> {
        self.retrying(|| {
            let current = self
                .store
                .get::<AccessGrant>(&grant.0)?
                .ok_or_else(|| ClinicError::UnknownGrant(grant.0.clone()))?;
            let mut g = current.value;
            self.gate(actor, "grant.revoke", Some(grant), actor.id == g.patient, "grant.patient-only")?;
            if g.revoked_at.is_some() {
                return Err(ClinicError::AlreadyRevoked(grant.0.clone()));
            }
            g.revoked_at = Some(self.now().max(g.granted_at));
            let mut batch = Batch::new();
            batch.put(&g, current.version);
            self.store.commit(batch)?;
            Ok(g)
        })
    }

    pub fn list_grants(&self, actor: &Actor, patient: &Id) -> Result<Vec<AccessGrant>> {
        self.gate(actor, "grant.list", Some(patient), actor.speaks_for(patient), "grant.owner-or-delegate")?;
        let mut out: Vec<AccessGrant> = self
            .store
            .scan::<AccessGrant>()?
            .into_iter()
            .map(|g| g.value)
            .filter(|g| &g.patient == patient)
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn submit_request(
        &self,
        actor: &Actor,
        patient: &Id,
        kind: RequestKind,
        detail: &str,
        reason: &str,
    ) -> Result<CareRequest> {
        self.require_patient(patient)?;
        let decision = self.authorize(actor, patient, kind.submodule(), Action::Request, None)?;
        if !decision.permits() {
            return Err(ClinicError::PermissionDenied(decision.reason));
        }
        let detail = detail.trim();
        match kind {
            RequestKind::Appointment => {
                parse_slot(detail)?;
            }
            RequestKind::Refill => {
                let ep = self
                    .store
                    .get::<HealthObject>(detail)?
                    .filter(|o| &o.value.owner == patient && o.value.submodule == SubModule::EP)
                    .ok_or_else(|| ClinicError::NotFound("prescription", detail.to_owned()))?;
                if refills(&ep.value) <= 0 {
                    return Err(ClinicError::NoRefillsRemaining(detail.to_owned()));
                }
            }
            RequestKind::Referral => {
                if detail.is_empty() {
                    return Err(ClinicError::Validation("referral needs a target specialty".into()));
                }
            }
        }
        let request = CareRequest {
            id: self.next_id(),
            patient: patient.clone(),
            kind,
            detail: detail.to_owned(),
            reason: reason.to_owned(),
            state: RequestState::Pending,
            submitted_by: actor.id.clone(),
            submitted_at: self.now(),
            decided_by: None,
            decided_at: None,
            counter_offer: None,
            result: None,
        };
        let mut batch = Batch::new();
        batch.insert(&request);
        self.store.commit(batch)?;
        Ok(request)
    }

    pub fn get_request(&self, actor: &Actor, id: &Id) -> Result<(u64, CareRequest)> {
        let r = self
            .store
            .get::<CareRequest>(&id.0)?
            .ok_or_else(|| ClinicError::NotFound("request", id.0.clone()))?;
        let staff = matches!(actor.role, Role::Clinician | Role::Admin);
        self.gate(actor, "request.view", Some(id), staff || actor.speaks_for(&r.value.patient), "request.party-only")?;
        Ok((r.version, r.value))
    }

    /// Requests visible to the actor: all of them for clinicians and admins,
    /// the patient's own otherwise. Oldest first.
    pub fn list_requests(&self, actor: &Actor, state: Option<RequestState>) -> Result<Vec<CareRequest>> {
        let staff = matches!(actor.role, Role::Clinician | Role::Admin);
        let mut out: Vec<CareRequest> = self
            .store
            .scan::<CareRequest>()?
            .into_iter()
            .map(|r| r.value)
            .filter(|r| staff || actor.speaks_for(&r.patient))
            .filter(|r| state.is_none_or(|s| r.state == s))
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Take the single decision on a pending request. `expected_version`,
    /// when given, must match the stored request version. A request that
    /// has already been decided yields `IllegalTransition`, including when
    /// a concurrent decision won the race.
    pub fn decide_request(
        &self,
        actor: &Actor,
        id: &Id,
        outcome: RequestOutcome,
        expected_version: Option<u64>,
    ) -> Result<CareRequest> {
        let staff = matches!(actor.role, Role::Clinician | Role::Admin);
        self.gate(actor, "request.decide", Some(id), staff, "request.staff-only")?;
        if let RequestOutcome::Reschedule { counter_offer } = &outcome {
            parse_slot(counter_offer)?;
        }
        let attempt = || {
            let current = self
                .store
                .get::<CareRequest>(&id.0)?
                .ok_or_else(|| ClinicError::NotFound("request", id.0.clone()))?;
            let mut req = current.value;
            if req.state != RequestState::Pending {
                return Err(ClinicError::IllegalTransition(format!("request {id} is already {:?}", req.state)));
            }
            if let Some(expected) = expected_version {
                if expected != current.version {
                    return Err(crate::store::StoreError::VersionConflict {
                        collection: CareRequest::COLLECTION.into(),
                        key: id.0.clone(),
                        expected,
                        found: current.version,
                    }
                    .into());
                }
            }
            self.require(actor, &req.patient, req.kind.submodule(), Action::Approve, Some(id))?;
            let now = self.now();
            let mut batch = Batch::new();
            match &outcome {
                RequestOutcome::Reject => req.state = RequestState::Rejected,
                RequestOutcome::Reschedule { counter_offer } => {
                    req.state = RequestState::Rescheduled;
                    req.counter_offer = Some(counter_offer.clone());
                }
                RequestOutcome::Approve => {
                    req.state = RequestState::Approved;
                    req.result = Some(self.apply_approval(&req, actor, now, &mut batch)?);
                }
            }
            req.decided_by = Some(actor.id.clone());
            req.decided_at = Some(now);
            batch.put(&req, current.version);
            self.notify(&mut batch, &req.patient, NotificationKind::RequestDecided, &req.id);
            self.store.commit(batch)?;
            Ok(req)
        };
        // a caller-supplied version is a one-shot compare-and-set
        match expected_version {
            Some(_) => attempt(),
            None => self.retrying(attempt),
        }
    }

    fn apply_approval(&self, req: &CareRequest, actor: &Actor, now: DateTime<Utc>, batch: &mut Batch) -> Result<Id> {
        let wrap = |sm, payload| {
            HealthObject::wrap(self.next_id(), sm, req.patient.clone(), actor.id.clone(), payload, now)
                .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))
        };
        let obj = match req.kind {
            RequestKind::Appointment => wrap(
                SubModule::EA,
                json!({ "slot": req.detail, "reason": req.reason, "request": req.id }),
            )?,
            RequestKind::Referral => wrap(SubModule::RS, json!({ "specialty": req.detail, "reason": req.reason }))?,
            RequestKind::Refill => {
                let ep = self
                    .store
                    .get::<HealthObject>(&req.detail)?
                    .ok_or_else(|| ClinicError::NotFound("prescription", req.detail.clone()))?;
                let left = refills(&ep.value);
                if left <= 0 {
                    return Err(ClinicError::NoRefillsRemaining(req.detail.clone()));
                }
                let mut updated = ep.value;
                let mut payload = updated.payload.clone();
                payload["refills_remaining"] = json!(left - 1);
                updated
                    .revise(actor.id.clone(), payload, now)
                    .map_err(|e| ClinicError::SchemaMismatch(e.submodule, e.message))?;
                batch.put(&updated, ep.version);
                return Ok(updated.id);
            }
        };
        batch.insert(&obj);
        Ok(obj.id)
    }
}
