//! The Electronic Health Object model: object classes, the closed registry
//! of thirteen sub-modules, empowerment levels, roles and the record
//! envelope every stored health record uses.

pub mod payload;
pub mod policy;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ids::Id;

pub use payload::validate_payload;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    Personal,
    Social,
    Medical,
}

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $(#[serde(rename = $text)] $variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(other.to_owned()),
                }
            }
        }
    };
}

keyword_enum!(
    /// Sub-module codes. The registry is closed: parsing any other code fails.
    SubModule {
        ID => "ID",
        HB => "HB",
        EX => "EX",
        SE => "SE",
        HP => "HP",
        AC => "AC",
        CS => "CS",
        KM => "KM",
        RS => "RS",
        XM => "XM",
        EA => "EA",
        EP => "EP",
        TM => "TM",
    }
);

impl SubModule {
    pub fn object_class(self) -> ObjectClass {
        use SubModule::*;
        match self {
            ID | HB | EX | SE | HP | AC => ObjectClass::Personal,
            CS | KM => ObjectClass::Social,
            // referral sits with the other medical requests
            RS | XM | EA | EP | TM => ObjectClass::Medical,
        }
    }

    /// Sub-modules whose records are EMR entries authored by clinicians.
    pub fn is_emr(self) -> bool {
        matches!(self, SubModule::XM | SubModule::EP | SubModule::TM | SubModule::RS)
    }
}

keyword_enum!(
    /// Ordered `None < Partial < Full`.
    EmpowermentLevel {
        None => "none",
        Partial => "partial",
        Full => "full",
    }
);

keyword_enum!(
    Role {
        Patient => "patient",
        FamilyDelegate => "family-delegate",
        Clinician => "clinician",
        HealthEducator => "health-educator",
        Admin => "admin",
    }
);

impl Role {
    pub fn is_staff(self) -> bool {
        matches!(self, Role::Clinician | Role::HealthEducator | Role::Admin)
    }

    pub fn is_owner_side(self) -> bool {
        matches!(self, Role::Patient | Role::FamilyDelegate)
    }
}

keyword_enum!(
    /// How the acting principal relates to the owner of the target record.
    Relation {
        Owner => "owner",
        Friend => "friend",
        GrantedClinician => "granted-clinician",
        Unrelated => "unrelated",
    }
);

keyword_enum!(
    Action {
        Create => "create",
        Read => "read",
        Update => "update",
        Delete => "delete",
        Request => "request",
        Approve => "approve",
    }
);

impl Action {
    pub fn is_write(self) -> bool {
        !matches!(self, Action::Read)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Allow,
    Deny,
    AllowAsRequest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub outcome: Outcome,
    /// Identifier of the rule that produced the outcome. Never empty.
    pub reason: String,
}

impl Decision {
    pub fn is_allow(&self) -> bool {
        self.outcome == Outcome::Allow
    }

    pub fn permits(&self) -> bool {
        self.outcome != Outcome::Deny
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub version: u64,
    pub author: Id,
    pub at: DateTime<Utc>,
    pub payload: Value,
}

/// The universal record envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthObject {
    pub id: Id,
    pub object_class: ObjectClass,
    pub submodule: SubModule,
    pub owner: Id,
    pub author: Id,
    pub payload: Value,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub version: u64,
    /// Earlier revisions, oldest first. The current revision is not included.
    #[serde(default)]
    pub history: Vec<Revision>,
}

impl HealthObject {
    /// Build a version-1 object. The payload is checked against the
    /// sub-module schema and the object class derived from the code.
    pub fn wrap(
        id: Id,
        submodule: SubModule,
        owner: Id,
        author: Id,
        payload: Value,
        now: DateTime<Utc>,
    ) -> Result<Self, payload::SchemaError> {
        validate_payload(submodule, &payload)?;
        Ok(HealthObject {
            id,
            object_class: submodule.object_class(),
            submodule,
            owner,
            author,
            payload,
            created_at: now,
            updated_at: now,
            version: 1,
            history: Vec::new(),
        })
    }

    /// Replace the payload, keeping the previous revision in `history`.
    pub fn revise(
        &mut self,
        author: Id,
        payload: Value,
        now: DateTime<Utc>,
    ) -> Result<(), payload::SchemaError> {
        validate_payload(self.submodule, &payload)?;
        let previous = std::mem::replace(&mut self.payload, payload);
        self.history.push(Revision {
            version: self.version,
            author: std::mem::replace(&mut self.author, author),
            at: self.updated_at,
            payload: previous,
        });
        self.version += 1;
        self.updated_at = now;
        Ok(())
    }

    pub fn is_class_coherent(&self) -> bool {
        self.object_class == self.submodule.object_class()
    }
}
