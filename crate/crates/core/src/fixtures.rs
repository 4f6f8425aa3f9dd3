//! Survey fixtures shipped with the crate: pre/post score vectors for the
//! literacy and satisfaction instruments, the printed summary figures that
//! accompanied them, and the demographic and agreement tables of the
//! preliminary survey.
//!
//! Every file is comma-separated with a header row.

use serde::Deserialize;

pub const LITERACY_PRE: &str = include_str!("../fixtures/literacy_pre.csv");
pub const LITERACY_POST: &str = include_str!("../fixtures/literacy_post.csv");
pub const SATISFACTION_PRE: &str = include_str!("../fixtures/satisfaction_pre.csv");
pub const SATISFACTION_POST: &str = include_str!("../fixtures/satisfaction_post.csv");
pub const PRINTED_TABLES: &str = include_str!("../fixtures/tables.csv");
pub const SURVEY_DEMOGRAPHICS: &str = include_str!("../fixtures/survey_demographics.csv");
pub const SURVEY_EMPOWERMENT: &str = include_str!("../fixtures/survey_empowerment.csv");

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
}

fn rows<T: for<'de> Deserialize<'de>>(text: &str, header: &[&str]) -> Result<Vec<T>, FixtureError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| FixtureError::Row { line: 1, message: e.to_string() })?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(FixtureError::Header {
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    reader
        .deserialize()
        .map(|r| {
            r.map_err(|e| FixtureError::Row {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    respondent: String,
    score: f64,
}

/// Parse a `respondent,score` file.
pub fn parse_scores(text: &str) -> Result<Vec<(String, f64)>, FixtureError> {
    Ok(rows::<ScoreRow>(text, &["respondent", "score"])?
        .into_iter()
        .map(|r| (r.respondent, r.score))
        .collect())
}

/// Figures printed next to each score table.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct PrintedTable {
    pub table: u8,
    pub instrument: String,
    pub phase: String,
    pub printed_mean: f64,
    pub printed_alpha: f64,
    pub printed_sd: f64,
}

pub fn printed_tables() -> Vec<PrintedTable> {
    rows(PRINTED_TABLES, &["table", "instrument", "phase", "printed_mean", "printed_alpha", "printed_sd"])
        .expect("shipped tables fixture parses")
}

pub fn printed_table(table: u8) -> PrintedTable {
    printed_tables().into_iter().find(|t| t.table == table).expect("table present in fixture")
}

/// Score vector shipped for a printed table number (4 to 7).
pub fn table_scores(table: u8) -> Vec<(String, f64)> {
    let text = match table {
        4 => LITERACY_PRE,
        5 => LITERACY_POST,
        6 => SATISFACTION_PRE,
        7 => SATISFACTION_POST,
        _ => panic!("no score fixture for table {table}"),
    };
    parse_scores(text).expect("shipped score fixture parses")
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct DemographicRow {
    pub item: String,
    pub sample: String,
    pub percentage: u32,
}

pub fn demographics() -> Result<Vec<DemographicRow>, FixtureError> {
    rows(SURVEY_DEMOGRAPHICS, &["item", "sample", "percentage"])
}

/// One agreement row. Some rows in the source table are incomplete and are
/// kept as printed, with the missing cells left empty.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct AgreementRow {
    pub section: String,
    pub statement: String,
    pub sub_modules: String,
    pub agreement_pct: Option<u32>,
}

pub fn empowerment_agreement() -> Result<Vec<AgreementRow>, FixtureError> {
    rows(SURVEY_EMPOWERMENT, &["section", "statement", "sub_modules", "agreement_pct"])
}
