//! Empowerment policy: configuration grammar, validation, and the total
//! permission matrix consulted before every read or write.
//!
//! ```text
//! # comment
//! version = 1
//! HB = full
//! XM = partial
//! TM = none
//! override HP update health-educator unrelated = request
//! ```
//!
//! All thirteen codes must be present exactly once. Override lines name a
//! single matrix cell `(sub-module, action, role, relation)` and replace its
//! outcome with `allow`, `deny` or `request`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Action, Decision, EmpowermentLevel, ObjectClass, Outcome, Relation, Role, SubModule};

pub const DEFAULT_POLICY: &str = include_str!("../../config/default.policy");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("MissingSubModule({0})")]
    MissingSubModule(SubModule),
    #[error("UnknownCode({code}) at line {line}")]
    UnknownCode { line: usize, code: String },
    #[error("DuplicateCode({code}) at line {line}")]
    DuplicateCode { line: usize, code: SubModule },
    #[error("ForbiddenOverride at line {line}: owner-side roles cannot be granted writes on other patients' records")]
    ForbiddenOverride { line: usize },
    #[error("ContradictoryOverride at line {line}")]
    Contradictory { line: usize },
    #[error("policy version {new} does not supersede {current}")]
    StaleVersion { current: u64, new: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Effect {
    Allow,
    Deny,
    Request,
}

impl Effect {
    fn as_str(self) -> &'static str {
        match self {
            Effect::Allow => "allow",
            Effect::Deny => "deny",
            Effect::Request => "request",
        }
    }

    fn outcome(self) -> Outcome {
        match self {
            Effect::Allow => Outcome::Allow,
            Effect::Deny => Outcome::Deny,
            Effect::Request => Outcome::AllowAsRequest,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub submodule: SubModule,
    pub action: Action,
    pub role: Role,
    pub relation: Relation,
    pub effect: Effect,
}

impl Override {
    fn key(&self) -> (SubModule, Action, Role, Relation) {
        (self.submodule, self.action, self.role, self.relation)
    }

    /// An override may never let an owner-side role write to someone else's records.
    fn is_forbidden(&self) -> bool {
        self.role.is_owner_side()
            && self.relation != Relation::Owner
            && self.action.is_write()
            && self.effect != Effect::Deny
    }
}

const CELLS: usize = 5 * 4 * 13 * 6;

fn cell(role: Role, relation: Relation, submodule: SubModule, action: Action) -> usize {
    (((role as usize) * 4 + relation as usize) * 13 + submodule as usize) * 6 + action as usize
}

/// A validated policy together with its compiled permission matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpowermentPolicy {
    version: u64,
    levels: BTreeMap<SubModule, EmpowermentLevel>,
    overrides: Vec<Override>,
    matrix: Vec<Decision>,
}

impl EmpowermentPolicy {
    /// Build from parts, applying the same validation as [`load_policy`].
    pub fn new(
        version: u64,
        levels: BTreeMap<SubModule, EmpowermentLevel>,
        overrides: Vec<Override>,
    ) -> Result<Self, PolicyError> {
        for &code in SubModule::ALL {
            if !levels.contains_key(&code) {
                return Err(PolicyError::MissingSubModule(code));
            }
        }
        let mut seen: BTreeMap<_, Effect> = BTreeMap::new();
        for (i, o) in overrides.iter().enumerate() {
            if o.is_forbidden() {
                return Err(PolicyError::ForbiddenOverride { line: i + 1 });
            }
            if let Some(prev) = seen.insert(o.key(), o.effect) {
                if prev != o.effect {
                    return Err(PolicyError::Contradictory { line: i + 1 });
                }
            }
        }
        let mut policy = EmpowermentPolicy { version, levels, overrides, matrix: Vec::new() };
        policy.compile();
        Ok(policy)
    }

    pub fn default_policy() -> Self {
        load_policy(DEFAULT_POLICY).expect("shipped default policy is valid")
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn level(&self, submodule: SubModule) -> EmpowermentLevel {
        self.levels[&submodule]
    }

    pub fn levels(&self) -> &BTreeMap<SubModule, EmpowermentLevel> {
        &self.levels
    }

    pub fn overrides(&self) -> &[Override] {
        &self.overrides
    }

    /// Copy of this policy with one level changed and the version bumped.
    pub fn with_level(&self, submodule: SubModule, level: EmpowermentLevel) -> Self {
        let mut levels = self.levels.clone();
        levels.insert(submodule, level);
        EmpowermentPolicy::new(self.version + 1, levels, self.overrides.clone())
            .expect("changing a level keeps a valid policy valid")
    }

    fn compile(&mut self) {
        let mut matrix = vec![
            Decision { outcome: Outcome::Deny, reason: String::new() };
            CELLS
        ];
        for &role in Role::ALL {
            for &relation in Relation::ALL {
                for &submodule in SubModule::ALL {
                    for &action in Action::ALL {
                        let level = self.levels[&submodule];
                        let (outcome, reason) = base_rule(level, role, relation, submodule, action);
                        matrix[cell(role, relation, submodule, action)] =
                            Decision { outcome, reason: reason.to_owned() };
                    }
                }
            }
        }
        for o in &self.overrides {
            matrix[cell(o.role, o.relation, o.submodule, o.action)] = Decision {
                outcome: o.effect.outcome(),
                reason: format!(
                    "override:{}:{}:{}:{}",
                    o.submodule, o.action, o.role, o.relation
                ),
            };
        }
        self.matrix = matrix;
    }

    pub fn resolve(
        &self,
        role: Role,
        relation: Relation,
        submodule: SubModule,
        action: Action,
    ) -> Decision {
        self.matrix[cell(role, relation, submodule, action)].clone()
    }

    /// Canonical text form. Canonical documents round-trip byte for byte.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version = {}", self.version);
        for (code, level) in &self.levels {
            let _ = writeln!(out, "{code} = {level}");
        }
        for o in &self.overrides {
            let _ = writeln!(
                out,
                "override {} {} {} {} = {}",
                o.submodule,
                o.action,
                o.role,
                o.relation,
                o.effect.as_str()
            );
        }
        out
    }
}

/// Free-function form of [`EmpowermentPolicy::resolve`].
pub fn resolve(
    policy: &EmpowermentPolicy,
    role: Role,
    relation: Relation,
    submodule: SubModule,
    action: Action,
) -> Decision {
    policy.resolve(role, relation, submodule, action)
}

/// The level-to-rights table. Partial means the owner reads and requests
/// while staff write and approve; None leaves the owner read access only.
fn base_rule(
    level: EmpowermentLevel,
    role: Role,
    relation: Relation,
    submodule: SubModule,
    action: Action,
) -> (Outcome, &'static str) {
    use Action::*;
    use EmpowermentLevel as L;
    use Outcome::*;

    let class = submodule.object_class();
    let open = level != L::None;

    if role.is_owner_side() {
        return match relation {
            Relation::Owner => {
                if role == Role::FamilyDelegate && class != ObjectClass::Social && action != Read {
                    return (Deny, "delegate.read-only");
                }
                owner_rule(level, action)
            }
            Relation::Friend if action == Read && class == ObjectClass::Social && open => {
                (Allow, "friend.social-read")
            }
            Relation::Friend => (Deny, "friend.no-access"),
            _ if action == Read && submodule == SubModule::KM && open => (Allow, "public.knowledge"),
            _ => (Deny, "isolation"),
        };
    }

    // Staff on their own records get whichever of the owner and staff
    // rules grants more, so raising a level never takes a right away.
    if relation == Relation::Owner {
        if action == Approve {
            return (Deny, "owner.no-self-approve");
        }
        let own = owner_rule(level, action);
        if level == L::Full {
            return own;
        }
        let staff = staff_rule(level, role, relation, submodule, action);
        return if strength(staff.0) > strength(own.0) { staff } else { own };
    }
    staff_rule(level, role, relation, submodule, action)
}

fn strength(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Deny => 0,
        Outcome::AllowAsRequest => 1,
        Outcome::Allow => 2,
    }
}

fn staff_rule(
    level: EmpowermentLevel,
    role: Role,
    relation: Relation,
    submodule: SubModule,
    action: Action,
) -> (Outcome, &'static str) {
    use Action::*;
    use EmpowermentLevel as L;
    use Outcome::*;

    let class = submodule.object_class();
    let open = level != L::None;
    match action {
        Read => {
            if relation == Relation::Owner {
                (Allow, "staff.own-read")
            } else if submodule == SubModule::KM && open {
                (Allow, "public.knowledge")
            } else if class == ObjectClass::Medical
                && role == Role::Clinician
                && relation == Relation::GrantedClinician
            {
                (Allow, "grant.read")
            } else if class == ObjectClass::Social && relation == Relation::Friend && open {
                (Allow, "friend.social-read")
            } else {
                (Deny, "staff.no-read")
            }
        }
        Approve => {
            if level == L::Full {
                (Deny, "staff.full-is-patient-controlled")
            } else if (role == Role::Clinician && class == ObjectClass::Medical)
                || (role == Role::HealthEducator && class != ObjectClass::Medical)
            {
                (Allow, "staff.approve")
            } else if role == Role::Admin
                && matches!(submodule, SubModule::EA | SubModule::EP | SubModule::RS)
            {
                (Allow, "admin.approve-request")
            } else {
                (Deny, "staff.approve-out-of-scope")
            }
        }
        Create | Update => {
            if level == L::Full {
                (Deny, "staff.full-is-patient-controlled")
            } else if role == Role::Clinician && class == ObjectClass::Medical {
                (Allow, "staff.write")
            } else if submodule == SubModule::KM && role != Role::Admin {
                (Allow, "staff.publish")
            } else {
                (Deny, "staff.write-out-of-scope")
            }
        }
        Delete => (Deny, "staff.no-delete"),
        Request => (Deny, "staff.no-request"),
    }
}

fn owner_rule(level: EmpowermentLevel, action: Action) -> (Outcome, &'static str) {
    use Action::*;
    use Outcome::*;
    match (level, action) {
        (_, Approve) => (Deny, "owner.no-self-approve"),
        (EmpowermentLevel::Full, _) => (Allow, "owner.full"),
        (EmpowermentLevel::Partial, Read) => (Allow, "owner.partial.read"),
        (EmpowermentLevel::Partial, Create | Request) => (AllowAsRequest, "owner.partial.request"),
        (EmpowermentLevel::Partial, _) => (Deny, "owner.partial.staff-writes"),
        (EmpowermentLevel::None, Read) => (Allow, "owner.none.read"),
        (EmpowermentLevel::None, _) => (Deny, "owner.none"),
    }
}

/// Parse and validate a policy document. Nothing is returned unless the
/// whole document is valid.
pub fn load_policy(text: &str) -> Result<EmpowermentPolicy, PolicyError> {
    let mut version = None;
    let mut levels = BTreeMap::new();
    let mut overrides = Vec::new();
    let mut override_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: &str| PolicyError::Syntax { line, message: message.to_owned() };
        let (lhs, rhs) = content.split_once('=').ok_or_else(|| syntax("expected `key = value`"))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());

        if lhs == "version" {
            if version.is_some() {
                return Err(syntax("duplicate version"));
            }
            version = Some(rhs.parse::<u64>().map_err(|_| syntax("version must be an integer"))?);
        } else if let Some(rest) = lhs.strip_prefix("override ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let [code, action, role, relation] = words[..] else {
                return Err(syntax("override needs: CODE ACTION ROLE RELATION"));
            };
            let submodule = code
                .parse::<SubModule>()
                .map_err(|code| PolicyError::UnknownCode { line, code })?;
            let effect = match rhs {
                "allow" => Effect::Allow,
                "deny" => Effect::Deny,
                "request" => Effect::Request,
                _ => return Err(syntax("effect must be allow, deny or request")),
            };
            overrides.push(Override {
                submodule,
                action: action.parse().map_err(|_| syntax("unknown action"))?,
                role: role.parse().map_err(|_| syntax("unknown role"))?,
                relation: relation.parse().map_err(|_| syntax("unknown relation"))?,
                effect,
            });
            override_lines.push(line);
        } else {
            let code = lhs
                .parse::<SubModule>()
                .map_err(|code| PolicyError::UnknownCode { line, code })?;
            let level = rhs
                .parse::<EmpowermentLevel>()
                .map_err(|_| syntax("level must be full, partial or none"))?;
            if levels.insert(code, level).is_some() {
                return Err(PolicyError::DuplicateCode { line, code });
            }
        }
    }

    let version = version.ok_or(PolicyError::Syntax { line: 0, message: "missing `version = N`".into() })?;
    // report override problems with their source line
    EmpowermentPolicy::new(version, levels, overrides).map_err(|e| match e {
        PolicyError::ForbiddenOverride { line } => {
            PolicyError::ForbiddenOverride { line: override_lines[line - 1] }
        }
        PolicyError::Contradictory { line } => {
            PolicyError::Contradictory { line: override_lines[line - 1] }
        }
        other => other,
    })
}
