//! Care episodes: a patient problem worked through problem finding,
//! problem solving, choice, execution and evaluation, looping back to
//! problem finding until an evaluation declares it resolved.
//!
//! Evaluation is entered and left in the same step: the verdict carried by
//! the evaluation payload immediately moves the episode either into a new
//! cycle or to `Closed`. A stored episode therefore never rests in
//! `Evaluation`.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::care_cycle::Stage::*;
use crate::clinic::{Actor, Clinic};
use crate::eho::{HealthObject, Role};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::medical::CareRequest;
use crate::store::{Batch, Document};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    ProblemFinding,
    ProblemSolving,
    Choice,
    Execution,
    Evaluation,
    Closed,
}

impl Stage {
    pub const ALL: [Stage; 6] = [ProblemFinding, ProblemSolving, Choice, Execution, Evaluation, Closed];

    /// Stages reachable in one step.
    pub fn successors(self) -> &'static [Stage] {
        match self {
            ProblemFinding => &[ProblemSolving],
            ProblemSolving => &[Choice],
            Choice => &[Execution],
            Execution => &[Evaluation],
            Evaluation => &[ProblemFinding, Closed],
            Closed => &[],
        }
    }

    pub fn can_step_to(self, to: Stage) -> bool {
        self.successors().contains(&to)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemFinding => "problem-finding",
            ProblemSolving => "problem-solving",
            Choice => "choice",
            Execution => "execution",
            Evaluation => "evaluation",
            Closed => "closed",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub description: String,
    pub proposed_by: Id,
    #[serde(default)]
    pub supporting: Vec<Id>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub note: String,
    pub resolved: bool,
    pub evaluated_by: Id,
    pub at: DateTime<Utc>,
}

/// What the caller supplies when advancing into a stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StagePayload {
    Alternatives { alternatives: Vec<ProposedAlternative> },
    Choice { index: usize },
    Execution { refs: Vec<Id> },
    Evaluation { note: String, resolved: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposedAlternative {
    pub description: String,
    #[serde(default)]
    pub supporting: Vec<Id>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub number: u32,
    pub alternatives: Vec<Alternative>,
    pub chosen: Option<usize>,
    pub executions: Vec<Id>,
    pub evaluation: Option<Evaluation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEvent {
    pub cycle: u32,
    pub stage: Stage,
    pub by: Id,
    pub at: DateTime<Utc>,
    /// Records linked by this step (supporting evidence, executions).
    #[serde(default)]
    pub refs: Vec<Id>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CareEpisode {
    pub id: Id,
    pub patient: Id,
    pub stage: Stage,
    pub problem_statement: String,
    pub cycles: Vec<Cycle>,
    pub parent_episode: Option<Id>,
    pub opened_by: Id,
    pub events: Vec<StageEvent>,
}

impl Document for CareEpisode {
    const COLLECTION: &'static str = "episodes";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

impl CareEpisode {
    pub fn cycle_count(&self) -> u32 {
        self.cycles.len() as u32
    }

    pub fn current(&self) -> &Cycle {
        self.cycles.last().expect("an episode always has a cycle")
    }

    fn current_mut(&mut self) -> &mut Cycle {
        self.cycles.last_mut().expect("an episode always has a cycle")
    }

    /// Apply one step. Reference checks against the store are the caller's job.
    pub fn step(&mut self, to: Stage, payload: StagePayload, by: &Id, at: DateTime<Utc>) -> Result<()> {
        if self.stage == Closed || !self.stage.can_step_to(to) {
            return Err(ClinicError::IllegalTransition(format!("{} -> {}", self.stage, to)));
        }
        let missing = || ClinicError::MissingPayload(to.to_string());
        let cycle = self.cycle_count();
        let mut refs = Vec::new();
        match (to, payload) {
            (ProblemSolving, StagePayload::Alternatives { alternatives }) => {
                if alternatives.is_empty() || alternatives.iter().any(|a| a.description.trim().is_empty()) {
                    return Err(missing());
                }
                let cur = self.current_mut();
                for a in alternatives {
                    refs.extend(a.supporting.iter().cloned());
                    cur.alternatives.push(Alternative {
                        description: a.description,
                        proposed_by: by.clone(),
                        supporting: a.supporting,
                    });
                }
            }
            (Choice, StagePayload::Choice { index }) => {
                let cur = self.current_mut();
                if index >= cur.alternatives.len() {
                    return Err(ClinicError::UnknownAlternative(index));
                }
                cur.chosen = Some(index);
            }
            (Execution, StagePayload::Execution { refs: exec }) => {
                if exec.is_empty() {
                    return Err(missing());
                }
                refs = exec.clone();
                self.current_mut().executions = exec;
            }
            (Evaluation, StagePayload::Evaluation { note, resolved }) => {
                self.current_mut().evaluation = Some(Evaluation { note, resolved, evaluated_by: by.clone(), at });
                self.events.push(StageEvent { cycle, stage: Evaluation, by: by.clone(), at, refs });
                if resolved {
                    self.stage = Closed;
                } else {
                    self.cycles.push(Cycle { number: cycle + 1, ..Default::default() });
                    self.stage = ProblemFinding;
                    self.events.push(StageEvent { cycle: cycle + 1, stage: ProblemFinding, by: by.clone(), at, refs: vec![] });
                }
                return Ok(());
            }
            _ => return Err(missing()),
        }
        self.stage = to;
        self.events.push(StageEvent { cycle, stage: to, by: by.clone(), at, refs });
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle: u32,
    pub events: Vec<StageEvent>,
    pub chosen: Option<String>,
    pub resolved: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub episode: Id,
    pub patient: Id,
    pub problem_statement: String,
    pub stage: Stage,
    pub cycle_count: u32,
    pub cycles: Vec<CycleReport>,
    pub linked: Vec<Id>,
}

impl EpisodeReport {
    pub fn stage_event_count(&self) -> usize {
        self.cycles.iter().map(|c| c.events.len()).sum()
    }
}

impl Clinic {
    fn may_work_on(&self, actor: &Actor, patient: &Id) -> bool {
        actor.speaks_for(patient) || actor.role == Role::Clinician
    }

    pub fn open_episode(&self, actor: &Actor, patient: &Id, statement: &str, parent: Option<&Id>) -> Result<CareEpisode> {
        self.gate(actor, "episode.open", Some(patient), self.may_work_on(actor, patient), "episode.patient-or-clinician")?;
        if statement.trim().is_empty() {
            return Err(ClinicError::EmptyStatement);
        }
        match self.store.get::<crate::accounts::UserAccount>(&patient.0)? {
            Some(a) if a.value.role == Role::Patient => {}
            _ => return Err(ClinicError::UnknownPatient(patient.0.clone())),
        }
        if let Some(p) = parent {
            let parent_ep = self.store.get::<CareEpisode>(&p.0)?.ok_or_else(|| ClinicError::NotFound("episode", p.0.clone()))?;
            if &parent_ep.value.patient != patient {
                return Err(ClinicError::Validation("parent episode belongs to another patient".into()));
            }
        }
        let now = self.now();
        let episode = CareEpisode {
            id: self.next_id(),
            patient: patient.clone(),
            stage: ProblemFinding,
            problem_statement: statement.trim().to_owned(),
            cycles: vec![Cycle { number: 1, ..Default::default() }],
            parent_episode: parent.cloned(),
            opened_by: actor.id.clone(),
            events: vec![StageEvent { cycle: 1, stage: ProblemFinding, by: actor.id.clone(), at: now, refs: vec![] }],
        };
        let mut batch = Batch::new();
        batch.insert(&episode);
        self.store.commit(batch)?;
        Ok(episode)
    }

    pub fn episode(&self, actor: &Actor, id: &Id) -> Result<(u64, CareEpisode)> {
        let ep = self
            .store
            .get::<CareEpisode>(&id.0)?
            .ok_or_else(|| ClinicError::NotFound("episode", id.0.clone()))?;
        self.check_viewer(actor, &ep.value)?;
        Ok((ep.version, ep.value))
    }

    pub fn list_episodes(&self, actor: &Actor, patient: &Id) -> Result<Vec<CareEpisode>> {
        let mut out = Vec::new();
        for ep in self.store.scan::<CareEpisode>()? {
            if &ep.value.patient == patient && self.viewer_allowed(actor, &ep.value)? {
                out.push(ep.value);
            }
        }
        Ok(out)
    }

    fn viewer_allowed(&self, actor: &Actor, ep: &CareEpisode) -> Result<bool> {
        if actor.speaks_for(&ep.patient) {
            return Ok(true);
        }
        if actor.role != Role::Clinician {
            return Ok(false);
        }
        if ep.opened_by == actor.id || ep.events.iter().any(|e| e.by == actor.id) {
            return Ok(true);
        }
        Ok(self
            .store
            .scan::<crate::medical::AccessGrant>()?
            .into_iter()
            .any(|g| g.value.patient == ep.patient && g.value.grantee == actor.id && g.value.is_active()))
    }

    fn check_viewer(&self, actor: &Actor, ep: &CareEpisode) -> Result<()> {
        let allowed = self.viewer_allowed(actor, ep)?;
        self.gate(actor, "episode.view", Some(&ep.id), allowed, "episode.participants")
    }

    fn check_refs(&self, patient: &Id, refs: &[Id]) -> Result<()> {
        for r in refs {
            let owned = self.store.get::<HealthObject>(&r.0)?.is_some_and(|o| &o.value.owner == patient)
                || self.store.get::<CareRequest>(&r.0)?.is_some_and(|q| &q.value.patient == patient);
            if !owned {
                return Err(ClinicError::NotFound("record of this patient", r.0.clone()));
            }
        }
        Ok(())
    }

    /// Move an episode one stage forward. With `expected_version` the step
    /// is a one-shot compare-and-set; without it a lost race is re-evaluated
    /// against the winner's state (and usually becomes IllegalTransition).
    pub fn advance(
        &self,
        actor: &Actor,
        id: &Id,
        to: Stage,
        payload: StagePayload,
        expected_version: Option<u64>,
    ) -> Result<CareEpisode> {
        let attempt = || {
            let current = self
                .store
                .get::<CareEpisode>(&id.0)?
                .ok_or_else(|| ClinicError::NotFound("episode", id.0.clone()))?;
            let mut ep = current.value;
            self.gate(actor, "episode.advance", Some(id), self.may_work_on(actor, &ep.patient), "episode.patient-or-clinician")?;
            if let Some(expected) = expected_version {
                if expected != current.version {
                    return Err(crate::store::StoreError::VersionConflict {
                        collection: CareEpisode::COLLECTION.into(),
                        key: id.0.clone(),
                        expected,
                        found: current.version,
                    }
                    .into());
                }
            }
            match &payload {
                StagePayload::Alternatives { alternatives } => {
                    let refs: Vec<Id> = alternatives.iter().flat_map(|a| a.supporting.iter().cloned()).collect();
                    self.check_refs(&ep.patient, &refs)?;
                }
                StagePayload::Execution { refs } if ep.stage == Choice => self.check_refs(&ep.patient, refs)?,
                _ => {}
            }
            ep.step(to, payload.clone(), &actor.id, self.now())?;
            let mut batch = Batch::new();
            batch.put(&ep, current.version);
            self.store.commit(batch)?;
            Ok(ep)
        };
        match expected_version {
            Some(_) => attempt(),
            None => self.retrying(attempt),
        }
    }

    pub fn episode_report(&self, actor: &Actor, id: &Id) -> Result<EpisodeReport> {
        let (_, ep) = self.episode(actor, id)?;
        let mut linked: Vec<Id> = Vec::new();
        let cycles = ep
            .cycles
            .iter()
            .map(|c| {
                let events: Vec<StageEvent> = ep.events.iter().filter(|e| e.cycle == c.number).cloned().collect();
                for e in &events {
                    for r in &e.refs {
                        if !linked.contains(r) {
                            linked.push(r.clone());
                        }
                    }
                }
                CycleReport {
                    cycle: c.number,
                    events,
                    chosen: c.chosen.map(|i| c.alternatives[i].description.clone()),
                    resolved: c.evaluation.as_ref().map(|e| e.resolved),
                }
            })
            .collect();
        Ok(EpisodeReport {
            episode: ep.id.clone(),
            patient: ep.patient.clone(),
            problem_statement: ep.problem_statement.clone(),
            stage: ep.stage,
            cycle_count: ep.cycle_count(),
            cycles,
            linked,
        })
    }
}
