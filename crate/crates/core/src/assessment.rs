//! Questionnaire instruments, response scoring, descriptive statistics,
//! Cronbach's alpha and pre/post comparison reports.
//!
//! All computation is done in full precision. [`present`] is the only
//! place values are cut to two decimals, and it truncates toward zero
//! (90.4167 becomes 90.41) to match the survey tables this module
//! reproduces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("answer {0} is outside the item range")]
    OutOfRangeAnswer(usize),
    #[error("expected {expected} answers, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("total {0} is outside the instrument range")]
    OutOfRangeTotal(i64),
    #[error("at least two scores are required, got {0}")]
    TooFewScores(usize),
    #[error("item matrix must be rectangular with at least 2 rows and 2 columns")]
    DegenerateMatrix,
    #[error("total scores have zero variance")]
    ZeroTotalVariance,
    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstrumentKind {
    HealthLiteracy,
    Satisfaction,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Pre,
    Post,
}

/// How the answers of an instrument add up to a total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scale {
    /// `item_count` items, each answered in `item_min..=item_max`.
    Uniform { item_count: usize, item_min: i64, item_max: i64 },
    /// Only the total is known and must lie in `total_min..=total_max`;
    /// a response is a single pre-summed answer.
    Declared { total_min: i64, total_max: i64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstrumentSpec {
    pub name: String,
    pub kind: InstrumentKind,
    pub scale: Scale,
}

impl InstrumentSpec {
    pub fn uniform(name: &str, kind: InstrumentKind, item_count: usize, item_min: i64, item_max: i64) -> Result<Self, StatsError> {
        if item_count < 2 {
            return Err(StatsError::InvalidInstrument("need at least 2 items".into()));
        }
        if item_min >= item_max {
            return Err(StatsError::InvalidInstrument("item_min must be below item_max".into()));
        }
        Ok(InstrumentSpec { name: name.into(), kind, scale: Scale::Uniform { item_count, item_min, item_max } })
    }

    /// 30 items scored 1 to 4.
    pub fn health_literacy() -> Self {
        Self::uniform("health literacy", InstrumentKind::HealthLiteracy, 30, 1, 4).expect("valid literacy spec")
    }

    /// Totals between 32 and 81; the item structure is not known.
    pub fn satisfaction() -> Self {
        InstrumentSpec {
            name: "satisfaction".into(),
            kind: InstrumentKind::Satisfaction,
            scale: Scale::Declared { total_min: 32, total_max: 81 },
        }
    }

    pub fn item_count(&self) -> usize {
        match self.scale {
            Scale::Uniform { item_count, .. } => item_count,
            Scale::Declared { .. } => 1,
        }
    }

    pub fn item_range(&self) -> (i64, i64) {
        match self.scale {
            Scale::Uniform { item_min, item_max, .. } => (item_min, item_max),
            Scale::Declared { total_min, total_max } => (total_min, total_max),
        }
    }

    pub fn total_min(&self) -> i64 {
        match self.scale {
            Scale::Uniform { item_count, item_min, .. } => item_count as i64 * item_min,
            Scale::Declared { total_min, .. } => total_min,
        }
    }

    pub fn total_max(&self) -> i64 {
        match self.scale {
            Scale::Uniform { item_count, item_max, .. } => item_count as i64 * item_max,
            Scale::Declared { total_max, .. } => total_max,
        }
    }

    pub fn all_min(&self) -> Vec<i64> {
        vec![self.item_range().0; self.item_count()]
    }

    pub fn all_max(&self) -> Vec<i64> {
        vec![self.item_range().1; self.item_count()]
    }

    /// Qualitative band for a total: the instrument range split in thirds.
    pub fn band(&self, total: f64) -> &'static str {
        let (lo, hi) = (self.total_min() as f64, self.total_max() as f64);
        let third = (hi - lo) / 3.0;
        if total < lo + third {
            "low"
        } else if total < lo + 2.0 * third {
            "moderate"
        } else {
            "high"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseSheet {
    pub respondent: String,
    pub phase: Phase,
    pub answers: Vec<i64>,
}

pub fn score_response(spec: &InstrumentSpec, sheet: &ResponseSheet) -> Result<i64, StatsError> {
    if sheet.answers.len() != spec.item_count() {
        return Err(StatsError::LengthMismatch { expected: spec.item_count(), got: sheet.answers.len() });
    }
    let (lo, hi) = spec.item_range();
    if let Some(i) = sheet.answers.iter().position(|a| *a < lo || *a > hi) {
        return Err(StatsError::OutOfRangeAnswer(i));
    }
    let total: i64 = sheet.answers.iter().sum();
    if total < spec.total_min() || total > spec.total_max() {
        return Err(StatsError::OutOfRangeTotal(total));
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub alpha: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn descriptive_stats(scores: &[f64]) -> Result<StatsSummary, StatsError> {
    if scores.len() < 2 {
        return Err(StatsError::TooFewScores(scores.len()));
    }
    Ok(StatsSummary { n: scores.len(), mean: mean(scores), sd: sample_variance(scores).sqrt(), alpha: None })
}

/// Cronbach's alpha of a respondents x items matrix.
pub fn cronbach_alpha(rows: &[Vec<f64>]) -> Result<f64, StatsError> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if n < 2 || k < 2 || rows.iter().any(|r| r.len() != k) {
        return Err(StatsError::DegenerateMatrix);
    }
    let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let total_var = sample_variance(&totals);
    if total_var == 0.0 {
        return Err(StatsError::ZeroTotalVariance);
    }
    let item_var: f64 = (0..k)
        .map(|j| sample_variance(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .sum();
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

/// Cut to two decimals toward zero.
pub fn present(x: f64) -> f64 {
    // the epsilon keeps values like 75.25 (stored as 75.249999..) intact
    let scaled = x * 100.0;
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.trunc() / 100.0
}

pub fn format2(x: f64) -> String {
    format!("{:.2}", present(x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub stats: StatsSummary,
    pub presented_mean: f64,
    pub presented_sd: f64,
    pub band: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrePostReport {
    pub instrument: String,
    pub pre: PhaseSummary,
    pub post: PhaseSummary,
    /// Difference of the presented means; this is the figure quoted in reports.
    pub mean_delta: f64,
    /// Difference of the full-precision means.
    pub raw_mean_delta: f64,
    /// Post minus pre per respondent, present only when both phases cover
    /// exactly the same respondent ids.
    pub respondent_deltas: Option<BTreeMap<String, f64>>,
}

fn phase(spec: &InstrumentSpec, scores: &[f64]) -> Result<PhaseSummary, StatsError> {
    let (lo, hi) = (spec.total_min() as f64, spec.total_max() as f64);
    if let Some(&bad) = scores.iter().find(|&&x| !(lo..=hi).contains(&x)) {
        return Err(StatsError::OutOfRangeTotal(bad.round() as i64));
    }
    let stats = descriptive_stats(scores)?;
    Ok(PhaseSummary {
        presented_mean: present(stats.mean),
        presented_sd: present(stats.sd),
        band: spec.band(stats.mean).to_owned(),
        stats,
    })
}

/// Compare pre and post scores given as (respondent, score) pairs.
pub fn pre_post_report(
    spec: &InstrumentSpec,
    pre: &[(String, f64)],
    post: &[(String, f64)],
) -> Result<PrePostReport, StatsError> {
    let values = |xs: &[(String, f64)]| xs.iter().map(|(_, v)| *v).collect::<Vec<_>>();
    let pre_s = phase(spec, &values(pre))?;
    let post_s = phase(spec, &values(post))?;
    let pre_map: BTreeMap<&String, f64> = pre.iter().map(|(k, v)| (k, *v)).collect();
    let post_map: BTreeMap<&String, f64> = post.iter().map(|(k, v)| (k, *v)).collect();
    let aligned = pre_map.len() == pre.len()
        && post_map.len() == post.len()
        && pre_map.keys().eq(post_map.keys());
    let respondent_deltas =
        aligned.then(|| pre_map.iter().map(|(k, v)| ((*k).clone(), post_map[k] - v)).collect());
    Ok(PrePostReport {
        instrument: spec.name.clone(),
        mean_delta: present(post_s.presented_mean - pre_s.presented_mean),
        raw_mean_delta: post_s.stats.mean - pre_s.stats.mean,
        pre: pre_s,
        post: post_s,
        respondent_deltas,
    })
}

impl PrePostReport {
    pub fn to_text(&self) -> String {
        let sign = if self.mean_delta >= 0.0 { "+" } else { "-" };
        let mut out = format!("instrument: {}\n", self.instrument);
        for (label, p) in [("pre", &self.pre), ("post", &self.post)] {
            out.push_str(&format!(
                "{label:<5} n={:<3} mean={} sd={} band={}\n",
                p.stats.n,
                format2(p.stats.mean),
                format2(p.stats.sd),
                p.band
            ));
        }
        out.push_str(&format!("delta {sign}{:.2}\n", self.mean_delta.abs()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_sd(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let sum: f64 = xs.iter().sum();
        let sq: f64 = xs.iter().map(|x| x * x).sum();
        ((sq - sum * sum / n) / (n - 1.0)).sqrt()
    }

    #[test]
    fn constant_list() {
        let s = descriptive_stats(&[5.0; 4]).unwrap();
        assert_eq!((s.mean, s.sd), (5.0, 0.0));
    }

    #[test]
    fn too_few_scores() {
        assert_eq!(descriptive_stats(&[1.0]).unwrap_err(), StatsError::TooFewScores(1));
    }

    #[test]
    fn hand_matrix_alpha() {
        let m = vec![vec![2.0, 3.0, 3.0, 4.0], vec![1.0, 2.0, 2.0, 2.0], vec![4.0, 4.0, 3.0, 4.0]];
        // item variances 2.3333, 1, 0.3333, 1.3333 => 5; totals 12, 7, 15 => var 16.3333
        let expected = 4.0 / 3.0 * (1.0 - 5.0 / (49.0 / 3.0));
        assert!((cronbach_alpha(&m).unwrap() - expected).abs() < 1e-12);
        assert!((oracle_sd(&[12.0, 7.0, 15.0]).powi(2) - 49.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn alpha_errors() {
        assert_eq!(cronbach_alpha(&[vec![1.0, 2.0]]).unwrap_err(), StatsError::DegenerateMatrix);
        assert_eq!(cronbach_alpha(&[vec![1.0, 2.0], vec![1.0]]).unwrap_err(), StatsError::DegenerateMatrix);
        assert_eq!(cronbach_alpha(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err(), StatsError::ZeroTotalVariance);
    }

    #[test]
    fn present_truncates() {
        assert_eq!(present(90.416_666), 90.41);
        assert_eq!(present(75.25), 75.25);
        assert_eq!(present(2.562_85), 2.56);
        assert_eq!(present(-1.239), -1.23);
        assert_eq!(format2(71.333_33), "71.33");
    }

    #[test]
    fn scoring() {
        let lit = InstrumentSpec::health_literacy();
        let sheet = |answers| ResponseSheet { respondent: "r".into(), phase: Phase::Pre, answers };
        assert_eq!(score_response(&lit, &sheet(lit.all_min())).unwrap(), 30);
        assert_eq!(score_response(&lit, &sheet(lit.all_max())).unwrap(), 120);
        let mut bad = lit.all_max();
        bad[7] = 5;
        assert_eq!(score_response(&lit, &sheet(bad)).unwrap_err(), StatsError::OutOfRangeAnswer(7));
        assert!(matches!(score_response(&lit, &sheet(vec![1; 29])), Err(StatsError::LengthMismatch { .. })));
        let sat = InstrumentSpec::satisfaction();
        assert_eq!(score_response(&sat, &sheet(vec![32])).unwrap(), 32);
        assert_eq!(score_response(&sat, &sheet(vec![82])).unwrap_err(), StatsError::OutOfRangeAnswer(0));
    }

    #[test]
    fn invalid_instruments() {
        assert!(InstrumentSpec::uniform("x", InstrumentKind::Custom, 1, 1, 5).is_err());
        assert!(InstrumentSpec::uniform("x", InstrumentKind::Custom, 5, 3, 3).is_err());
    }

    #[test]
    fn identical_pre_post() {
        let spec = InstrumentSpec::health_literacy();
        let xs: Vec<(String, f64)> = [40.0, 50.0, 60.0].iter().enumerate().map(|(i, v)| (i.to_string(), *v)).collect();
        let r = pre_post_report(&spec, &xs, &xs).unwrap();
        assert_eq!(r.mean_delta, 0.0);
        assert!(r.respondent_deltas.unwrap().values().all(|d| *d == 0.0));
    }

    #[test]
    fn misaligned_ids_give_no_per_respondent_deltas() {
        let spec = InstrumentSpec::health_literacy();
        let pre = vec![("a".to_string(), 40.0), ("b".to_string(), 50.0)];
        let post = vec![("a".to_string(), 45.0), ("c".to_string(), 55.0)];
        assert!(pre_post_report(&spec, &pre, &post).unwrap().respondent_deltas.is_none());
    }

    #[test]
    fn totals_outside_the_instrument_range_are_rejected() {
        let spec = InstrumentSpec::health_literacy();
        let ok = vec![("a".to_string(), 30.0), ("b".to_string(), 120.0)];
        let bad = vec![("a".to_string(), 29.0), ("b".to_string(), 50.0)];
        assert!(pre_post_report(&spec, &ok, &ok).is_ok());
        assert_eq!(pre_post_report(&spec, &bad, &ok).unwrap_err(), StatsError::OutOfRangeTotal(29));
    }

    #[test]
    fn bands() {
        let lit = InstrumentSpec::health_literacy();
        assert_eq!(lit.band(30.0), "low");
        assert_eq!(lit.band(75.25), "moderate");
        assert_eq!(lit.band(90.41), "high");
    }
}
