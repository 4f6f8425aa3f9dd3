//! Python bindings for the clinic core: the empowerment policy, survey
//! statistics, the care-cycle stage machine and a token-based facade over
//! a clinic data directory.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::de::DeserializeOwned;
use serde::Serialize;

use clinic_core::accounts::NewAccount;
use clinic_core::assessment::{self, InstrumentSpec, Phase, ResponseSheet, StatsError};
use clinic_core::care_cycle::{Stage, StagePayload};
use clinic_core::eho::policy::{load_policy, EmpowermentPolicy};
use clinic_core::eho::{Action, EmpowermentLevel, Relation, Role, SubModule};
use clinic_core::medical::{RequestKind, RequestOutcome, RequestState};
use clinic_core::personal::DiaryEntry;
use clinic_core::store::DocStore;
use clinic_core::{Actor, ClinicConfig, Id, SystemClock};

pyo3::create_exception!(clinic, ClinicError, pyo3::exceptions::PyException, "A clinic operation was refused.");

fn clinic_err(e: clinic_core::ClinicError) -> PyErr {
    ClinicError::new_err((e.code().to_string(), e.to_string()))
}

fn stats_err(e: StatsError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| PyValueError::new_err(format!("bad {what} `{s}`: {e}")))
}

/// Python object to a serde type, going through the stdlib json module.
fn from_py<T: DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

// ---------------------------------------------------------------- policy

/// The empowerment policy: a level per sub-module plus explicit overrides.
#[pyclass(name = "Policy", module = "clinic", frozen)]
struct PyPolicy(EmpowermentPolicy);

#[pymethods]
impl PyPolicy {
    #[staticmethod]
    fn default() -> Self {
        PyPolicy(EmpowermentPolicy::default_policy())
    }

    /// Parse policy text; raises ValueError naming the first problem.
    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        load_policy(text).map(PyPolicy).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn version(&self) -> u64 {
        self.0.version()
    }

    fn level(&self, submodule: &str) -> PyResult<String> {
        Ok(self.0.level(parse::<SubModule>("sub-module", submodule)?).to_string())
    }

    fn with_level(&self, submodule: &str, level: &str) -> PyResult<Self> {
        let sm = parse::<SubModule>("sub-module", submodule)?;
        let lv = parse::<EmpowermentLevel>("level", level)?;
        Ok(PyPolicy(self.0.with_level(sm, lv)))
    }

    /// Returns `(outcome, reason)`, outcome one of "Allow", "Deny", "AllowAsRequest".
    fn resolve(&self, role: &str, relation: &str, submodule: &str, action: &str) -> PyResult<(String, String)> {
        let d = self.0.resolve(
            parse::<Role>("role", role)?,
            parse::<Relation>("relation", relation)?,
            parse::<SubModule>("sub-module", submodule)?,
            parse::<Action>("action", action)?,
        );
        Ok((format!("{:?}", d.outcome), d.reason))
    }

    fn dump(&self) -> String {
        self.0.dump()
    }

    fn __repr__(&self) -> String {
        format!("Policy(version={}, overrides={})", self.0.version(), self.0.overrides().len())
    }
}

// ---------------------------------------------------------------- assessment

#[pyclass(name = "Instrument", module = "clinic", frozen)]
struct PyInstrument(InstrumentSpec);

#[pymethods]
impl PyInstrument {
    #[staticmethod]
    fn health_literacy() -> Self {
        PyInstrument(InstrumentSpec::health_literacy())
    }

    #[staticmethod]
    fn satisfaction() -> Self {
        PyInstrument(InstrumentSpec::satisfaction())
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn item_count(&self) -> usize {
        self.0.item_count()
    }

    #[getter]
    fn total_range(&self) -> (i64, i64) {
        (self.0.total_min(), self.0.total_max())
    }

    fn score(&self, answers: Vec<i64>) -> PyResult<i64> {
        let sheet = ResponseSheet { respondent: String::new(), phase: Phase::Pre, answers };
        assessment::score_response(&self.0, &sheet).map_err(stats_err)
    }

    fn band(&self, total: f64) -> &'static str {
        self.0.band(total)
    }
}

fn instrument_named(name: &str) -> PyResult<InstrumentSpec> {
    match name {
        "literacy" | "health-literacy" => Ok(InstrumentSpec::health_literacy()),
        "satisfaction" => Ok(InstrumentSpec::satisfaction()),
        other => Err(PyValueError::new_err(format!("unknown instrument `{other}`"))),
    }
}

/// `{"n", "mean", "sd"}` with the sample standard deviation.
#[pyfunction]
fn descriptive_stats<'py>(py: Python<'py>, scores: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let s = assessment::descriptive_stats(&scores).map_err(stats_err)?;
    to_py(py, &s)
}

/// Cronbach's alpha of a respondents-by-items matrix.
#[pyfunction]
fn cronbach_alpha(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    assessment::cronbach_alpha(&rows).map_err(stats_err)
}

/// Truncate toward zero at two decimals, the way the reports display values.
#[pyfunction]
fn present(x: f64) -> f64 {
    assessment::present(x)
}

/// Compare two phases given as `[(respondent, total), ...]`.
#[pyfunction]
#[pyo3(signature = (pre, post, instrument = "literacy"))]
fn pre_post_report<'py>(
    py: Python<'py>,
    pre: Vec<(String, f64)>,
    post: Vec<(String, f64)>,
    instrument: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let report = assessment::pre_post_report(&instrument_named(instrument)?, &pre, &post).map_err(stats_err)?;
    to_py(py, &report)
}

// ---------------------------------------------------------------- care cycle

#[pyfunction]
fn stages() -> Vec<&'static str> {
    Stage::ALL.iter().map(|s| s.as_str()).collect()
}

#[pyfunction]
fn stage_successors(stage: &str) -> PyResult<Vec<&'static str>> {
    let s: Stage = stage.parse().map_err(PyValueError::new_err)?;
    Ok(s.successors().iter().map(|s| s.as_str()).collect())
}

#[pyfunction]
fn can_step(from: &str, to: &str) -> PyResult<bool> {
    let a: Stage = from.parse().map_err(PyValueError::new_err)?;
    let b: Stage = to.parse().map_err(PyValueError::new_err)?;
    Ok(a.can_step_to(b))
}

// ---------------------------------------------------------------- clinic

/// A clinic backed by a data directory. Every operation except `register`
/// and `login` takes a session token, as the HTTP API does.
#[pyclass(name = "Clinic", module = "clinic", frozen)]
struct PyClinic(Arc<clinic_core::Clinic>);

impl PyClinic {
    fn actor(&self, token: &str) -> PyResult<Actor> {
        self.0.session_actor(token).map_err(clinic_err)
    }
}

#[pymethods]
impl PyClinic {
    #[new]
    #[pyo3(signature = (data_dir, policy = None))]
    fn new(data_dir: &str, policy: Option<&PyPolicy>) -> PyResult<Self> {
        let store = DocStore::open(data_dir).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let mut clinic = clinic_core::Clinic::new(store, Arc::new(SystemClock), ClinicConfig::default());
        if let Some(p) = policy {
            clinic = clinic.with_policy(p.0.clone());
        }
        Ok(PyClinic(Arc::new(clinic)))
    }

    /// Self-registration; the new account is a patient. Returns its id.
    #[pyo3(signature = (login, password, display_name = ""))]
    fn register(&self, login: &str, password: &str, display_name: &str) -> PyResult<String> {
        Ok(self.0.register(login, password, display_name).map_err(clinic_err)?.id.0)
    }

    /// Operator-level account creation with any role, no session needed.
    /// This is what `clinic seed` does; use it to bootstrap staff.
    fn provision_account(&self, py: Python<'_>, account: &Bound<'_, PyAny>) -> PyResult<String> {
        let new: NewAccount = from_py(py, account)?;
        Ok(self.0.insert_account(new).map_err(clinic_err)?.id.0)
    }

    /// Returns `(token, principal_id)`.
    fn login(&self, login: &str, password: &str) -> PyResult<(String, String)> {
        let s = self.0.authenticate(login, password).map_err(clinic_err)?;
        Ok((s.token, s.principal.0))
    }

    fn logout(&self, token: &str) -> PyResult<()> {
        self.0.logout(token).map_err(clinic_err)
    }

    /// Admin-only account creation from a dict with `login`, `password`,
    /// `role` and optional `display_name`, `delegate_of`, `birthday`.
    fn create_account(&self, py: Python<'_>, token: &str, account: &Bound<'_, PyAny>) -> PyResult<String> {
        let new: NewAccount = from_py(py, account)?;
        Ok(self.0.create_account(&self.actor(token)?, new).map_err(clinic_err)?.id.0)
    }

    fn record_entry<'py>(&self, py: Python<'py>, token: &str, patient: &str, entry: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let entry: DiaryEntry = from_py(py, entry)?;
        let obj = self.0.record_entry(&self.actor(token)?, &Id::from(patient), &entry).map_err(clinic_err)?;
        to_py(py, &obj)
    }

    fn record_emr<'py>(&self, py: Python<'py>, token: &str, patient: &str, kind: &str, payload: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let payload: serde_json::Value = from_py(py, payload)?;
        let kind = parse::<SubModule>("sub-module", kind)?;
        let obj = self.0.record_emr(&self.actor(token)?, &Id::from(patient), kind, payload).map_err(clinic_err)?;
        to_py(py, &obj)
    }

    #[pyo3(signature = (token, patient, kinds = Vec::new()))]
    fn read_emr<'py>(&self, py: Python<'py>, token: &str, patient: &str, kinds: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
        let kinds = kinds.iter().map(|k| parse::<SubModule>("sub-module", k)).collect::<PyResult<Vec<_>>>()?;
        let entries = self.0.read_emr(&self.actor(token)?, &Id::from(patient), &kinds).map_err(clinic_err)?;
        to_py(py, &entries)
    }

    fn export_emr(&self, token: &str, patient: &str) -> PyResult<String> {
        self.0.export_emr(&self.actor(token)?, &Id::from(patient)).map_err(clinic_err)
    }

    /// Grant a clinician access to some EMR kinds; returns the grant id.
    fn grant_access(&self, token: &str, grantee: &str, scope: Vec<String>) -> PyResult<String> {
        let scope = scope.iter().map(|k| parse::<SubModule>("sub-module", k)).collect::<PyResult<Vec<_>>>()?;
        Ok(self.0.grant_access(&self.actor(token)?, &Id::from(grantee), &scope).map_err(clinic_err)?.id.0)
    }

    fn revoke_access(&self, token: &str, grant: &str) -> PyResult<()> {
        self.0.revoke_access(&self.actor(token)?, &Id::from(grant)).map_err(clinic_err).map(drop)
    }

    /// `kind` is "Appointment", "Refill" or "Referral". Returns the request id.
    #[pyo3(signature = (token, patient, kind, detail, reason = ""))]
    fn submit_request(&self, token: &str, patient: &str, kind: &str, detail: &str, reason: &str) -> PyResult<String> {
        let kind: RequestKind = serde_json::from_value(serde_json::Value::String(kind.into()))
            .map_err(|_| PyValueError::new_err(format!("bad request kind `{kind}`")))?;
        let r = self.0.submit_request(&self.actor(token)?, &Id::from(patient), kind, detail, reason).map_err(clinic_err)?;
        Ok(r.id.0)
    }

    /// `outcome` is "approve", "reject" or "reschedule" (with `counter_offer`).
    /// Returns the new request state.
    #[pyo3(signature = (token, request, outcome, counter_offer = None, expected_version = None))]
    fn decide_request(
        &self,
        token: &str,
        request: &str,
        outcome: &str,
        counter_offer: Option<String>,
        expected_version: Option<u64>,
    ) -> PyResult<String> {
        let outcome = match (outcome, counter_offer) {
            ("approve", None) => RequestOutcome::Approve,
            ("reject", None) => RequestOutcome::Reject,
            ("reschedule", Some(counter_offer)) => RequestOutcome::Reschedule { counter_offer },
            (o, _) => return Err(PyValueError::new_err(format!("bad outcome `{o}`"))),
        };
        let r = self.0.decide_request(&self.actor(token)?, &Id::from(request), outcome, expected_version).map_err(clinic_err)?;
        Ok(state_name(r.state))
    }

    /// Returns `(version, state)`.
    fn request_state(&self, token: &str, request: &str) -> PyResult<(u64, String)> {
        let (v, r) = self.0.get_request(&self.actor(token)?, &Id::from(request)).map_err(clinic_err)?;
        Ok((v, state_name(r.state)))
    }

    /// Open a care episode; returns its id.
    #[pyo3(signature = (token, patient, problem_statement, parent = None))]
    fn open_episode(&self, token: &str, patient: &str, problem_statement: &str, parent: Option<&str>) -> PyResult<String> {
        let parent = parent.map(Id::from);
        let ep = self
            .0
            .open_episode(&self.actor(token)?, &Id::from(patient), problem_statement, parent.as_ref())
            .map_err(clinic_err)?;
        Ok(ep.id.0)
    }

    /// Step an episode. `payload` is a dict tagged by `type`, for example
    /// `{"type": "choice", "index": 0}`. Returns the stage reached.
    #[pyo3(signature = (token, episode, to, payload, expected_version = None))]
    fn advance(&self, py: Python<'_>, token: &str, episode: &str, to: &str, payload: &Bound<'_, PyAny>, expected_version: Option<u64>) -> PyResult<String> {
        let to: Stage = to.parse().map_err(PyValueError::new_err)?;
        let payload: StagePayload = from_py(py, payload)?;
        let ep = self.0.advance(&self.actor(token)?, &Id::from(episode), to, payload, expected_version).map_err(clinic_err)?;
        Ok(ep.stage.as_str().to_owned())
    }

    fn episode_report<'py>(&self, py: Python<'py>, token: &str, episode: &str) -> PyResult<Bound<'py, PyAny>> {
        let r = self.0.episode_report(&self.actor(token)?, &Id::from(episode)).map_err(clinic_err)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (token, unread_only = false))]
    fn notifications<'py>(&self, py: Python<'py>, token: &str, unread_only: bool) -> PyResult<Bound<'py, PyAny>> {
        let n = self.0.list_notifications(&self.actor(token)?, unread_only).map_err(clinic_err)?;
        to_py(py, &n)
    }
}

fn state_name(s: RequestState) -> String {
    format!("{s:?}")
}

#[pymodule]
fn clinic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ClinicError", m.py().get_type::<ClinicError>())?;
    m.add_class::<PyPolicy>()?;
    m.add_class::<PyInstrument>()?;
    m.add_class::<PyClinic>()?;
    m.add_function(wrap_pyfunction!(descriptive_stats, m)?)?;
    m.add_function(wrap_pyfunction!(cronbach_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(present, m)?)?;
    m.add_function(wrap_pyfunction!(pre_post_report, m)?)?;
    m.add_function(wrap_pyfunction!(stages, m)?)?;
    m.add_function(wrap_pyfunction!(stage_successors, m)?)?;
    m.add_function(wrap_pyfunction!(can_step, m)?)?;
    Ok(())
}
