//! Survey fixture reports for the admin CLI.

use std::path::Path;

use anyhow::{Context, Result};

use clinic_core::assessment::{pre_post_report, InstrumentSpec, PrePostReport};
use clinic_core::fixtures::{self, parse_scores};

/// The preliminary survey tables exactly as shipped, demographics first.
pub fn survey(table: Option<&str>) -> Result<String> {
    Ok(match table {
        None => format!("{}\n{}", fixtures::SURVEY_DEMOGRAPHICS, fixtures::SURVEY_EMPOWERMENT),
        Some("demographics") => fixtures::SURVEY_DEMOGRAPHICS.to_owned(),
        Some("empowerment") => fixtures::SURVEY_EMPOWERMENT.to_owned(),
        Some(other) => anyhow::bail!("unknown survey table `{other}` (expected demographics or empowerment)"),
    })
}

pub fn instrument(name: &str) -> Result<InstrumentSpec> {
    match name {
        "literacy" | "health-literacy" => Ok(InstrumentSpec::health_literacy()),
        "satisfaction" => Ok(InstrumentSpec::satisfaction()),
        other => anyhow::bail!("unknown instrument `{other}` (expected literacy or satisfaction)"),
    }
}

pub fn prepost(pre: &Path, post: &Path, instrument_name: &str) -> Result<PrePostReport> {
    let load = |p: &Path| -> Result<Vec<(String, f64)>> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        parse_scores(&text).with_context(|| p.display().to_string())
    };
    let spec = instrument(instrument_name)?;
    Ok(pre_post_report(&spec, &load(pre)?, &load(post)?)?)
}
