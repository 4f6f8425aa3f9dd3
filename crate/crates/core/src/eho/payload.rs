//! Payload schemas for each sub-module.
//!
//! Most sub-modules use a flat field registry. The health plan and the
//! account statement have nested structure and are validated by
//! deserializing into their typed form.

use chrono::DateTime;
use serde_json::{Map, Value};

use super::SubModule;
use crate::personal::{AccountStatement, HealthPlan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{submodule}: {message}")]
pub struct SchemaError {
    pub submodule: SubModule,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Text,
    /// Finite and >= 0.
    Quantity,
    /// Integer >= 0.
    Count,
    /// Integer in 1..=5.
    Mood,
    /// RFC 3339 timestamp.
    Timestamp,
    TextList,
}

#[derive(Clone, Copy, Debug)]
pub struct Field {
    pub name: &'static str,
    pub kind: FieldKind,
    pub unit: Option<&'static str>,
    pub required: bool,
}

const fn f(name: &'static str, kind: FieldKind, unit: Option<&'static str>, required: bool) -> Field {
    Field { name, kind, unit, required }
}

use FieldKind::*;

const IDENTITY: &[Field] = &[
    f("name", Text, None, true),
    f("address", Text, None, false),
    f("phone", Text, None, false),
    f("email", Text, None, false),
    f("login_id", Text, None, false),
];

const HABITS: &[Field] = &[
    f("occurred_at", Timestamp, None, false),
    f("note", Text, None, false),
    f("meal", Text, None, false),
    f("slept_hours", Quantity, Some("h"), false),
    f("water_l", Quantity, Some("L"), false),
    f("meals_count", Count, Some("count"), false),
    f("screen_hours", Quantity, Some("h"), false),
];

const EXERCISE: &[Field] = &[
    f("occurred_at", Timestamp, None, false),
    f("note", Text, None, false),
    f("activity", Text, None, false),
    f("duration_min", Quantity, Some("min"), false),
    f("distance_km", Quantity, Some("km"), false),
    f("steps", Count, Some("count"), false),
    f("calories_kcal", Quantity, Some("kcal"), false),
];

const SPIRITUAL: &[Field] = &[
    f("occurred_at", Timestamp, None, false),
    f("note", Text, None, false),
    f("reflection", Text, None, false),
    f("meditation_min", Quantity, Some("min"), false),
    f("mood", Mood, Some("scale 1-5"), false),
];

const CONVERSATION: &[Field] = &[f("body", Text, None, true), f("kind", Text, None, false)];

const KNOWLEDGE: &[Field] = &[f("title", Text, None, false), f("body", Text, None, true)];

const REFERRAL: &[Field] = &[
    f("specialty", Text, None, true),
    f("reason", Text, None, false),
    f("corrects", Text, None, false),
];

const EXAMINATION: &[Field] = &[
    f("note", Text, None, true),
    f("diagnosis", TextList, None, false),
    f("corrects", Text, None, false),
];

const APPOINTMENT: &[Field] = &[
    f("slot", Text, None, true),
    f("reason", Text, None, false),
    f("request", Text, None, false),
];

const PRESCRIPTION: &[Field] = &[
    f("drug", Text, None, true),
    f("dose", Text, None, true),
    f("refills_remaining", Count, Some("count"), true),
    f("corrects", Text, None, false),
];

const TREATMENT: &[Field] = &[f("plan", Text, None, true), f("corrects", Text, None, false)];

/// Flat field registry for a sub-module, or `None` for the typed ones (HP, AC).
pub fn fields(submodule: SubModule) -> Option<&'static [Field]> {
    use SubModule::*;
    Some(match submodule {
        ID => IDENTITY,
        HB => HABITS,
        EX => EXERCISE,
        SE => SPIRITUAL,
        HP | AC => return None,
        CS => CONVERSATION,
        KM => KNOWLEDGE,
        RS => REFERRAL,
        XM => EXAMINATION,
        EA => APPOINTMENT,
        EP => PRESCRIPTION,
        TM => TREATMENT,
    })
}

/// Unit of a named diary metric, if the registry knows it.
pub fn unit_of(submodule: SubModule, metric: &str) -> Option<&'static str> {
    fields(submodule)?
        .iter()
        .find(|field| field.name == metric)
        .and_then(|field| field.unit)
}

pub fn validate_payload(submodule: SubModule, payload: &Value) -> Result<(), SchemaError> {
    let fail = |message: String| SchemaError { submodule, message };
    let Some(obj) = payload.as_object() else {
        return Err(fail("payload must be an object".into()));
    };
    match submodule {
        SubModule::HP => {
            let plan: HealthPlan = serde_json::from_value(payload.clone())
                .map_err(|e| fail(e.to_string()))?;
            plan.validate().map_err(fail)
        }
        SubModule::AC => {
            let statement: AccountStatement = serde_json::from_value(payload.clone())
                .map_err(|e| fail(e.to_string()))?;
            statement.validate().map_err(fail)
        }
        other => check_fields(fields(other).unwrap_or(&[]), obj).map_err(fail),
    }
}

fn check_fields(registry: &[Field], obj: &Map<String, Value>) -> Result<(), String> {
    for key in obj.keys() {
        if !registry.iter().any(|field| field.name == key) {
            return Err(format!("unknown field `{key}`"));
        }
    }
    for field in registry {
        match obj.get(field.name) {
            None | Some(Value::Null) if field.required => {
                return Err(format!("missing field `{}`", field.name))
            }
            None | Some(Value::Null) => {}
            Some(value) => check_value(field, value)?,
        }
    }
    Ok(())
}

fn check_value(field: &Field, value: &Value) -> Result<(), String> {
    let bad = || format!("field `{}` has an invalid value", field.name);
    match field.kind {
        Text => {
            let s = value.as_str().ok_or_else(bad)?;
            if field.required && s.trim().is_empty() {
                return Err(format!("field `{}` must not be empty", field.name));
            }
        }
        Quantity => {
            let n = value.as_f64().ok_or_else(bad)?;
            if !n.is_finite() || n < 0.0 {
                return Err(format!("field `{}` must be finite and non-negative", field.name));
            }
        }
        Count => {
            value.as_u64().ok_or_else(bad)?;
        }
        Mood => {
            let n = value.as_u64().ok_or_else(bad)?;
            if !(1..=5).contains(&n) {
                return Err(format!("field `{}` must be between 1 and 5", field.name));
            }
        }
        Timestamp => {
            let s = value.as_str().ok_or_else(bad)?;
            DateTime::parse_from_rfc3339(s).map_err(|_| bad())?;
        }
        TextList => {
            let items = value.as_array().ok_or_else(bad)?;
            if !items.iter().all(Value::is_string) {
                return Err(bad());
            }
        }
    }
    Ok(())
}
