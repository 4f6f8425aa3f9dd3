//! HTTP service and admin tooling around [`clinic_core`].

pub mod api;
pub mod report;
pub mod seed;
