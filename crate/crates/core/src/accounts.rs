//! Accounts, credentials, sessions and presence.

use chrono::{DateTime, NaiveDate, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

use crate::clinic::{Actor, Clinic};
use crate::eho::{Outcome, Role};
use crate::error::{ClinicError, Result};
use crate::ids::Id;
use crate::store::{Batch, Document};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Profile {
    pub display_name: String,
    pub picture_ref: Option<String>,
    pub birthday: Option<NaiveDate>,
    pub friends_and_family: Vec<String>,
    pub education: Option<String>,
    pub employment: Option<String>,
    pub interests: Vec<String>,
    pub contact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Credential {
    salt: String,
    hash: String,
    rounds: u32,
}

impl Credential {
    fn derive(password: &str, salt: &[u8], rounds: u32) -> [u8; 32] {
        let mut digest: [u8; 32] = Sha256::new().chain_update(salt).chain_update(password).finalize().into();
        for _ in 1..rounds {
            digest = Sha256::new().chain_update(salt).chain_update(digest).finalize().into();
        }
        digest
    }

    pub fn new(password: &str, rounds: u32) -> Self {
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        let hash = Self::derive(password, &salt, rounds);
        Credential { salt: hex::encode(salt), hash: hex::encode(hash), rounds }
    }

    pub fn verify(&self, password: &str) -> bool {
        let (Ok(salt), Ok(expected)) = (hex::decode(&self.salt), hex::decode(&self.hash)) else {
            return false;
        };
        let actual = Self::derive(password, &salt, self.rounds);
        actual.ct_eq(&expected[..]).into()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserAccount {
    pub id: Id,
    pub login: String,
    pub credential: Credential,
    pub role: Role,
    pub delegate_of: Option<Id>,
    pub profile: Profile,
    pub created_at: DateTime<Utc>,
}

impl UserAccount {
    pub fn actor(&self) -> Actor {
        Actor { id: self.id.clone(), role: self.role, delegate_of: self.delegate_of.clone() }
    }
}

impl Document for UserAccount {
    const COLLECTION: &'static str = "accounts";
    fn key(&self) -> String {
        self.id.0.clone()
    }
}

/// Uniqueness index: one document per (lower-cased) login id.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct LoginIndex {
    login: String,
    principal: Id,
}

impl Document for LoginIndex {
    const COLLECTION: &'static str = "logins";
    fn key(&self) -> String {
        self.login.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub principal: Id,
    pub created_at: DateTime<Utc>,
    pub last_seen: DateTime<Utc>,
    pub terminated: bool,
}

impl Document for Session {
    const COLLECTION: &'static str = "sessions";
    fn key(&self) -> String {
        self.token.clone()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct NewAccount {
    pub login: String,
    pub password: String,
    pub role: Role,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub delegate_of: Option<Id>,
    #[serde(default)]
    pub birthday: Option<NaiveDate>,
}

/// Public view of an account (no credential).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSummary {
    pub id: Id,
    pub login: String,
    pub role: Role,
    pub display_name: String,
}

impl From<&UserAccount> for UserSummary {
    fn from(a: &UserAccount) -> Self {
        UserSummary {
            id: a.id.clone(),
            login: a.login.clone(),
            role: a.role,
            display_name: a.profile.display_name.clone(),
        }
    }
}

impl Clinic {
    /// Self-service registration. Always creates a Patient.
    pub fn register(&self, login: &str, password: &str, display_name: &str) -> Result<UserAccount> {
        self.insert_account(NewAccount {
            login: login.to_owned(),
            password: password.to_owned(),
            role: Role::Patient,
            display_name: display_name.to_owned(),
            delegate_of: None,
            birthday: None,
        })
    }

    /// Admin-only account creation for any role.
    pub fn create_account(&self, admin: &Actor, new: NewAccount) -> Result<UserAccount> {
        self.gate(admin, "account.create", None, admin.role == Role::Admin, "account.admin-only")?;
        self.insert_account(new)
    }

    /// Unchecked account creation used by registration, admin creation and fixture seeding.
    pub fn insert_account(&self, new: NewAccount) -> Result<UserAccount> {
        let login = new.login.trim().to_lowercase();
        if login.is_empty() || new.password.is_empty() {
            return Err(ClinicError::Validation("login and password are required".into()));
        }
        match (new.role, &new.delegate_of) {
            (Role::FamilyDelegate, Some(patient)) => {
                let linked = self.account(patient)?;
                if linked.role != Role::Patient {
                    return Err(ClinicError::Validation("a delegate must link to a patient".into()));
                }
            }
            (Role::FamilyDelegate, None) => {
                return Err(ClinicError::Validation("a family delegate needs a linked patient".into()))
            }
            (_, Some(_)) => return Err(ClinicError::Validation("only family delegates link to a patient".into())),
            _ => {}
        }
        let account = UserAccount {
            id: self.next_id(),
            login: login.clone(),
            credential: Credential::new(&new.password, self.config.hash_rounds),
            role: new.role,
            delegate_of: new.delegate_of,
            profile: Profile {
                display_name: if new.display_name.is_empty() { login.clone() } else { new.display_name },
                birthday: new.birthday,
                ..Profile::default()
            },
            created_at: self.now(),
        };
        let mut batch = Batch::new();
        batch.insert(&LoginIndex { login: login.clone(), principal: account.id.clone() });
        batch.insert(&account);
        match self.store.commit(batch) {
            Err(crate::store::StoreError::VersionConflict { .. }) => Err(ClinicError::LoginTaken(login)),
            other => other.map(|_| account).map_err(Into::into),
        }
    }

    pub fn account(&self, id: &Id) -> Result<UserAccount> {
        self.store
            .get::<UserAccount>(&id.0)?
            .map(|v| v.value)
            .ok_or_else(|| ClinicError::NotFound("account", id.0.clone()))
    }

    pub fn account_by_login(&self, login: &str) -> Result<Option<UserAccount>> {
        match self.store.get::<LoginIndex>(&login.trim().to_lowercase())? {
            Some(index) => Ok(Some(self.account(&index.value.principal)?)),
            None => Ok(None),
        }
    }

    pub fn accounts(&self) -> Result<Vec<UserAccount>> {
        Ok(self.store.scan::<UserAccount>()?.into_iter().map(|v| v.value).collect())
    }

    pub fn actor(&self, id: &Id) -> Result<Actor> {
        Ok(self.account(id)?.actor())
    }

    pub fn update_profile(&self, actor: &Actor, profile: Profile) -> Result<UserAccount> {
        let updated = self.retrying(|| {
            let current = self
                .store
                .get::<UserAccount>(&actor.id.0)?
                .ok_or_else(|| ClinicError::NotFound("account", actor.id.0.clone()))?;
            let mut account = current.value;
            account.profile = profile.clone();
            let mut batch = Batch::new();
            batch.put(&account, current.version);
            batch.insert(&crate::social::ProfileChange {
                id: self.next_id(),
                subject: actor.id.clone(),
                created_at: self.now(),
            });
            self.store.commit(batch)?;
            Ok(account)
        })?;
        self.gate(actor, "profile.update", Some(&actor.id), true, "owner.profile")?;
        Ok(updated)
    }

    /// Check a login/password pair. Unknown logins and wrong passwords fail
    /// with the same error after the same amount of hashing work.
    pub fn authenticate(&self, login: &str, password: &str) -> Result<Session> {
        let account = self.account_by_login(login)?;
        let verified = match &account {
            Some(a) => a.credential.verify(password),
            None => {
                let dummy = Credential { salt: "00".repeat(16), hash: "00".repeat(32), rounds: self.config.hash_rounds };
                dummy.verify(password);
                false
            }
        };
        let audit_actor = match &account {
            Some(a) => a.actor(),
            None => Actor::new("anonymous", Role::Patient),
        };
        let target = Id(format!("login:{}", login.trim().to_lowercase()));
        if !verified {
            self.record_decision(&audit_actor, "authenticate", None, Some(target.0), Outcome::Deny, "bad-credentials")?;
            return Err(ClinicError::BadCredentials);
        }
        let account = account.expect("verified implies account");
        let mut token = [0u8; 32];
        rand::thread_rng().fill_bytes(&mut token);
        let now = self.now();
        let session = Session {
            token: hex::encode(token),
            principal: account.id.clone(),
            created_at: now,
            last_seen: now,
            terminated: false,
        };
        let mut batch = Batch::new();
        batch.insert(&session);
        self.store.commit(batch)?;
        self.presence.write().insert(session.token.clone(), now);
        self.record_decision(&audit_actor, "authenticate", None, Some(target.0), Outcome::Allow, "credentials-ok")?;
        Ok(session)
    }

    /// Resolve a bearer token to its actor, refreshing presence.
    pub fn session_actor(&self, token: &str) -> Result<Actor> {
        let session = self.store.get::<Session>(token)?.ok_or(ClinicError::UnknownToken)?.value;
        if session.terminated {
            return Err(ClinicError::UnknownToken);
        }
        self.presence.write().insert(session.token.clone(), self.now());
        self.actor(&session.principal)
    }

    /// Terminate a session in one call. Logging out twice is fine.
    pub fn logout(&self, token: &str) -> Result<()> {
        self.retrying(|| {
            let current = self.store.get::<Session>(token)?.ok_or(ClinicError::UnknownToken)?;
            if current.value.terminated {
                return Ok(());
            }
            let mut session = current.value;
            session.terminated = true;
            let mut batch = Batch::new();
            batch.put(&session, current.version);
            self.store.commit(batch)?;
            Ok(())
        })?;
        self.presence.write().remove(token);
        Ok(())
    }

    /// Online means some live session was seen within the presence window.
    pub fn is_online(&self, principal: &Id) -> Result<bool> {
        let now = self.now();
        let window = self.config.presence_window;
        let presence = self.presence.read();
        Ok(self.store.scan::<Session>()?.into_iter().any(|s| {
            let s = s.value;
            !s.terminated
                && &s.principal == principal
                && presence.get(&s.token).is_some_and(|seen| now - *seen <= window)
        }))
    }

    pub fn online_friends(&self, actor: &Actor) -> Result<Vec<Id>> {
        let mut out = Vec::new();
        for friend in self.friends(&actor.id)? {
            if self.is_online(&friend)? {
                out.push(friend);
            }
        }
        Ok(out)
    }

    pub fn find_users(&self, query: &str) -> Result<Vec<UserSummary>> {
        let q = query.to_lowercase();
        Ok(self
            .accounts()?
            .iter()
            .filter(|a| a.login.contains(&q) || a.profile.display_name.to_lowercase().contains(&q))
            .map(UserSummary::from)
            .collect())
    }
}
