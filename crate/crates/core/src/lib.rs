//! Domain core of the Clinic 2.0 patient-empowerment platform.
//!
//! Every record a patient or provider touches is a [`eho::HealthObject`]
//! (or one of the social / workflow documents built around it). Access to
//! those records goes through one total function, [`eho::policy::resolve`],
//! driven by a provider-configured [`eho::policy::EmpowermentPolicy`].
//!
//! The stateful operations live on [`Clinic`], which owns a versioned
//! document store, the active policy, a clock and the id generator. The
//! statistics in [`assessment`] are pure and do not need a `Clinic`.

pub mod accounts;
pub mod assessment;
pub mod audit;
pub mod care_cycle;
mod clinic;
pub mod eho;
mod error;
pub mod fixtures;
pub mod ids;
pub mod medical;
pub mod notify;
pub mod personal;
pub mod social;
pub mod store;

pub use clinic::{Actor, Clinic, ClinicConfig};
pub use error::{ClinicError, Result};
pub use ids::{Clock, Id, ManualClock, SystemClock};
