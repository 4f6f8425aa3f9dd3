//! Fixture seeding. A fixture directory may contain `accounts.csv`,
//! `groups.csv` and `motd.csv`; each row carries a `fixture_id` and is
//! applied at most once per data directory.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use clinic_core::accounts::NewAccount;
use clinic_core::eho::Role;
use clinic_core::store::{Batch, Document};
use clinic_core::{Actor, Clinic, Id};

use crate::api::optional_date;

/// Marker recording that a fixture row has been applied.
#[derive(Serialize, Deserialize)]
struct SeedMark {
    fixture: String,
    applied_at: DateTime<Utc>,
}

impl Document for SeedMark {
    const COLLECTION: &'static str = "seed_marks";
    fn key(&self) -> String {
        self.fixture.clone()
    }
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct SeedSummary {
    pub applied: usize,
    pub skipped: usize,
}

#[derive(Deserialize)]
struct AccountRow {
    fixture_id: String,
    login: String,
    password: String,
    role: String,
    display_name: String,
    #[serde(default)]
    delegate_of: String,
    #[serde(default)]
    birthday: String,
}

#[derive(Deserialize)]
struct GroupRow {
    fixture_id: String,
    name: String,
    creator: String,
    #[serde(default)]
    members: String,
}

#[derive(Deserialize)]
struct MotdRow {
    fixture_id: String,
    educator: String,
    user: String,
    message: String,
    #[serde(default)]
    effective_at: String,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: T = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{}:{line}: {e}", path.display())
        })?;
        out.push((out.len() as u64 + 2, row));
    }
    Ok(out)
}

fn applied(clinic: &Clinic, key: &str) -> Result<bool> {
    Ok(clinic.store().get::<SeedMark>(key)?.is_some())
}

fn mark(clinic: &Clinic, key: String) -> Result<()> {
    let mut batch = Batch::new();
    batch.insert(&SeedMark { fixture: key, applied_at: clinic.now() });
    clinic.store().commit(batch)?;
    Ok(())
}

fn actor_by_login(clinic: &Clinic, login: &str, at: &str) -> Result<Actor> {
    clinic
        .account_by_login(login)?
        .map(|a| a.actor())
        .ok_or_else(|| anyhow!("{at}: unknown login `{login}`"))
}

/// Apply every fixture file present in `dir`.
pub fn seed(clinic: &Clinic, dir: &Path) -> Result<SeedSummary> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut summary = SeedSummary::default();
    let mut tally = |done: bool| if done { summary.applied += 1 } else { summary.skipped += 1 };

    let accounts = dir.join("accounts.csv");
    if accounts.exists() {
        for (line, row) in read_rows::<AccountRow>(&accounts)? {
            let key = format!("accounts:{}", row.fixture_id);
            if applied(clinic, &key)? {
                tally(false);
                continue;
            }
            let at = format!("{}:{line}", accounts.display());
            let role: Role = row.role.parse().map_err(|r| anyhow!("{at}: unknown role `{r}`"))?;
            let delegate_of = match row.delegate_of.trim() {
                "" => None,
                login => Some(actor_by_login(clinic, login, &at)?.id),
            };
            clinic
                .insert_account(NewAccount {
                    login: row.login,
                    password: row.password,
                    role,
                    display_name: row.display_name,
                    delegate_of,
                    birthday: optional_date(&row.birthday).map_err(|e| anyhow!("{at}: {e}"))?,
                })
                .with_context(|| at.clone())?;
            mark(clinic, key)?;
            tally(true);
        }
    }

    let groups = dir.join("groups.csv");
    if groups.exists() {
        for (line, row) in read_rows::<GroupRow>(&groups)? {
            let key = format!("groups:{}", row.fixture_id);
            if applied(clinic, &key)? {
                tally(false);
                continue;
            }
            let at = format!("{}:{line}", groups.display());
            let creator = actor_by_login(clinic, &row.creator, &at)?;
            let group = clinic.create_group(&creator, &row.name).with_context(|| at.clone())?;
            for login in row.members.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let member = actor_by_login(clinic, login, &at)?;
                clinic.join_group(&member, &group.id).with_context(|| at.clone())?;
            }
            mark(clinic, key)?;
            tally(true);
        }
    }

    let motd = dir.join("motd.csv");
    if motd.exists() {
        for (line, row) in read_rows::<MotdRow>(&motd)? {
            let key = format!("motd:{}", row.fixture_id);
            if applied(clinic, &key)? {
                tally(false);
                continue;
            }
            let at = format!("{}:{line}", motd.display());
            let educator = actor_by_login(clinic, &row.educator, &at)?;
            let user: Id = actor_by_login(clinic, &row.user, &at)?.id;
            let effective_at = match row.effective_at.trim() {
                "" => clinic.now(),
                s => DateTime::parse_from_rfc3339(s)
                    .map_err(|e| anyhow!("{at}: bad effective_at `{s}`: {e}"))?
                    .with_timezone(&Utc),
            };
            clinic.set_motd(&educator, &user, &row.message, effective_at).with_context(|| at.clone())?;
            mark(clinic, key)?;
            tally(true);
        }
    }
    Ok(summary)
}
