use crate::eho::policy::PolicyError;
use crate::eho::SubModule;
use crate::store::StoreError;

pub type Result<T, E = ClinicError> = std::result::Result<T, E>;

/// Errors returned by the stateful operations on [`crate::Clinic`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClinicError {
    #[error("permission denied: {0}")]
    PermissionDenied(String),
    #[error("payload does not match the {0} schema: {1}")]
    SchemaMismatch(SubModule, String),
    #[error("timestamp is too far in the future")]
    FutureTimestamp,
    #[error("{0} {1} not found")]
    NotFound(&'static str, String),
    #[error("illegal transition: {0}")]
    IllegalTransition(String),
    #[error("cannot connect to yourself")]
    SelfConnection,
    #[error("parent post is missing or of the wrong kind")]
    MissingParent,
    #[error("body must not be empty")]
    EmptyBody,
    #[error("not visible to this principal")]
    NotVisible,
    #[error("unknown recipient {0}")]
    UnknownRecipient(String),
    #[error("unknown patient {0}")]
    UnknownPatient(String),
    #[error("entry {0} is immutable")]
    ImmutableEntry(String),
    #[error("unknown grant {0}")]
    UnknownGrant(String),
    #[error("grant {0} is already revoked")]
    AlreadyRevoked(String),
    #[error("no refills remaining on prescription {0}")]
    NoRefillsRemaining(String),
    #[error("problem statement must not be empty")]
    EmptyStatement,
    #[error("missing payload for stage {0}")]
    MissingPayload(String),
    #[error("alternative {0} does not exist")]
    UnknownAlternative(usize),
    #[error("more than one active health plan for {0}")]
    TwoActivePlans(String),
    #[error("bad credentials")]
    BadCredentials,
    #[error("unknown or terminated session")]
    UnknownToken,
    #[error("not the owner of {0}")]
    NotOwner(String),
    #[error("not supported: {0}")]
    NotSupported(&'static str),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("login id {0} is taken")]
    LoginTaken(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl ClinicError {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        use ClinicError::*;
        match self {
            PermissionDenied(_) => "PermissionDenied",
            SchemaMismatch(..) => "SchemaMismatch",
            FutureTimestamp => "FutureTimestamp",
            NotFound(..) => "NotFound",
            IllegalTransition(_) => "IllegalTransition",
            SelfConnection => "SelfConnection",
            MissingParent => "MissingParent",
            EmptyBody => "EmptyBody",
            NotVisible => "NotVisible",
            UnknownRecipient(_) => "UnknownRecipient",
            UnknownPatient(_) => "UnknownPatient",
            ImmutableEntry(_) => "ImmutableEntry",
            UnknownGrant(_) => "UnknownGrant",
            AlreadyRevoked(_) => "AlreadyRevoked",
            NoRefillsRemaining(_) => "NoRefillsRemaining",
            EmptyStatement => "EmptyStatement",
            MissingPayload(_) => "MissingPayload",
            UnknownAlternative(_) => "UnknownAlternative",
            TwoActivePlans(_) => "TwoActivePlans",
            BadCredentials => "BadCredentials",
            UnknownToken => "UnknownToken",
            NotOwner(_) => "NotOwner",
            NotSupported(_) => "NotSupported",
            Validation(_) => "ValidationError",
            LoginTaken(_) => "LoginTaken",
            Policy(_) => "PolicyError",
            Store(StoreError::VersionConflict { .. }) => "VersionConflict",
            Store(_) => "StoreError",
        }
    }

    pub fn is_conflict(&self) -> bool {
        matches!(self, ClinicError::Store(StoreError::VersionConflict { .. }))
    }
}
