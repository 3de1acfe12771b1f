//! RMSE and per-condition summaries, recomputable from the record table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;
use crate::error::{Error, Result};
use crate::localization::{Method, SearchMode};
use crate::timefreq::FrontendKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rmse {
    /// Degrees.
    pub rmse: f64,
    /// Records with an estimate.
    pub count: usize,
    pub no_estimate: usize,
}

/// `sqrt(mean((estimate - truth)^2))` over records with an estimate.
pub fn rmse<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> Result<Rmse> {
    let (mut sum, mut count, mut missing) = (0.0, 0usize, 0usize);
    for r in records {
        match r.error() {
            Some(e) => {
                sum += e * e;
                count += 1;
            }
            None => missing += 1,
        }
    }
    if count == 0 {
        return Err(Error::invalid("RMSE of a group without estimates"));
    }
    Ok(Rmse {
        rmse: (sum / count as f64).sqrt(),
        count,
        no_estimate: missing,
    })
}

/// Method, front-end and search mode of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub method: Method,
    pub frontend: FrontendKind,
    pub search: SearchMode,
}

impl Condition {
    pub fn of(r: &RunRecord) -> Self {
        Condition {
            method: r.method,
            frontend: r.frontend,
            search: r.search,
        }
    }

    /// e.g. `DPD-AFB-1D`.
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.method, self.frontend, self.search).to_uppercase()
    }
}

/// The factor a summary row is resolved over; all other factors are
/// averaged out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Overall,
    Snr,
    T60,
    Lateral,
}

impl Factor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Factor::Overall => "overall",
            Factor::Snr => "snr",
            Factor::T60 => "t60",
            Factor::Lateral => "lateral",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub factor: Factor,
    /// Factor value; the bin centre for lateral angles, absent for
    /// `Overall`.
    pub level: Option<f64>,
    pub rmse: Option<f64>,
    pub runs: usize,
    pub no_estimate: usize,
    pub failure_rate: f64,
    pub mean_pass_fraction: Option<f64>,
}

fn level_of(r: &RunRecord, factor: Factor, lateral_bin: f64) -> Option<f64> {
    match factor {
        Factor::Overall => None,
        Factor::Snr => r.snr,
        Factor::T60 => r.t60,
        Factor::Lateral => {
            let last = (180.0 / lateral_bin).ceil() - 1.0;
            Some(((r.truth / lateral_bin).floor().min(last) + 0.5) * lateral_bin)
        }
    }
}

fn summary(
    condition: Condition,
    factor: Factor,
    level: Option<f64>,
    group: &[&RunRecord],
) -> ConditionSummary {
    let fractions: Vec<f64> = group.iter().filter_map(|r| r.pass_fraction()).collect();
    let no_estimate = group.iter().filter(|r| r.estimate.is_none()).count();
    ConditionSummary {
        condition,
        factor,
        level,
        rmse: rmse(group.iter().copied()).ok().map(|r| r.rmse),
        runs: group.len(),
        no_estimate,
        failure_rate: no_estimate as f64 / group.len() as f64,
        mean_pass_fraction: (!fractions.is_empty())
            .then(|| fractions.iter().sum::<f64>() / fractions.len() as f64),
    }
}

/// Summaries per condition: overall, then against SNR, T60 and lateral
/// angle (bins of `lateral_bin` degrees). Records without a value for a
/// factor do not contribute to that factor's rows.
pub fn summarize(records: &[RunRecord], lateral_bin: f64) -> Vec<ConditionSummary> {
    let mut conditions: Vec<Condition> = records.iter().map(Condition::of).collect();
    conditions.sort();
    conditions.dedup();
    let mut out = Vec::new();
    for &condition in &conditions {
        let mine: Vec<&RunRecord> = records
            .iter()
            .filter(|r| Condition::of(r) == condition)
            .collect();
        out.push(summary(condition, Factor::Overall, None, &mine));
        for factor in [Factor::Snr, Factor::T60, Factor::Lateral] {
            let mut levels: Vec<f64> = mine
                .iter()
                .filter_map(|r| level_of(r, factor, lateral_bin))
                .collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            for level in levels {
                let group: Vec<&RunRecord> = mine
                    .iter()
                    .copied()
                    .filter(|r| level_of(r, factor, lateral_bin) == Some(level))
                    .collect();
                out.push(summary(condition, factor, Some(level), &group));
            }
        }
    }
    out
}

/// Gnuplot data: one row per level, one RMSE column per condition, `NaN`
/// where a condition has no estimate at that level.
pub fn plot_data(summaries: &[ConditionSummary], factor: Factor) -> String {
    let rows: Vec<&ConditionSummary> = summaries.iter().filter(|s| s.factor == factor).collect();
    let mut conditions: Vec<Condition> = rows.iter().map(|s| s.condition).collect();
    conditions.sort();
    conditions.dedup();
    let mut levels: Vec<f64> = rows.iter().filter_map(|s| s.level).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut text = format!("# {}", factor.as_str());
    for c in &conditions {
        text.push(' ');
        text.push_str(&c.label());
    }
    text.push('\n');
    for level in levels {
        write!(text, "{level}").unwrap();
        for c in &conditions {
            let value = rows
                .iter()
                .find(|s| s.condition == *c && s.level == Some(level))
                .and_then(|s| s.rmse);
            match value {
                Some(v) => write!(text, " {v:.6}").unwrap(),
                None => text.push_str(" NaN"),
            }
        }
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::StageTimings;
    use proptest::prelude::*;

    fn record(truth: f64, estimate: Option<f64>, snr: f64, method: Method) -> RunRecord {
        RunRecord {
            scenario: 0,
            method,
            frontend: FrontendKind::Afb,
            search: SearchMode::OneD,
            snr: Some(snr),
            t60: Some(0.4),
            distance_factor: Some(1.0),
            truth,
            estimate,
            pass_count: 5,
            total_bins: 100,
            timings: StageTimings::default(),
        }
    }

    #[test]
    fn rmse_examples() {
        let r = [
            record(10.0, Some(13.0), 0.0, Method::Dpd),
            record(20.0, Some(16.0), 0.0, Method::Dpd),
        ];
        assert!((rmse(&r).unwrap().rmse - 3.5355).abs() < 5e-5);
        assert_eq!(rmse(&r[..1]).unwrap().rmse, 3.0);
        let exact = [record(40.0, Some(40.0), 0.0, Method::Dpd)];
        assert_eq!(rmse(&exact).unwrap().rmse, 0.0);
        let single = [record(40.0, Some(50.0), 0.0, Method::Dpd)];
        assert_eq!(rmse(&single).unwrap().rmse, 10.0);
        let missing = [record(40.0, None, 0.0, Method::Dpd), single[0].clone()];
        assert_eq!(rmse(&missing).unwrap().no_estimate, 1);
        assert!(rmse(&missing[..1]).is_err());
        assert!(rmse(&[]).is_err());
    }

    /// Mean of squares first, then the root, in a separate pass.
    fn two_pass(errors: &[f64]) -> f64 {
        let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
        let mut total = 0.0;
        for s in &squares {
            total += s;
        }
        (total / squares.len() as f64).sqrt()
    }

    proptest! {
        #[test]
        fn rmse_matches_two_pass(pairs in prop::collection::vec((0.0..180.0f64, 0.0..180.0f64), 1..50)) {
            let records: Vec<RunRecord> =
                pairs.iter().map(|&(t, e)| record(t, Some(e), 0.0, Method::Dpd)).collect();
            let errors: Vec<f64> = pairs.iter().map(|&(t, e)| e - t).collect();
            prop_assert_eq!(rmse(&records).unwrap().rmse, two_pass(&errors));
        }
    }

    #[test]
    fn marginalises_over_other_factors() {
        let records = vec![
            record(10.0, Some(12.0), -5.0, Method::Dpd),
            record(100.0, Some(96.0), -5.0, Method::Dpd),
            record(100.0, None, 15.0, Method::Dpd),
            record(50.0, Some(51.0), 15.0, Method::Je),
        ];
        let s = summarize(&records, 20.0);
        let find = |m: Method, f: Factor, level: Option<f64>| {
            s.iter()
                .find(|x| x.condition.method == m && x.factor == f && x.level == level)
                .unwrap()
        };
        let low = find(Method::Dpd, Factor::Snr, Some(-5.0));
        assert_eq!(low.runs, 2);
        assert!((low.rmse.unwrap() - 10f64.sqrt()).abs() < 1e-12);
        let high = find(Method::Dpd, Factor::Snr, Some(15.0));
        assert_eq!((high.rmse, high.failure_rate), (None, 1.0));
        assert_eq!(find(Method::Dpd, Factor::Overall, None).no_estimate, 1);
        assert_eq!(find(Method::Dpd, Factor::Lateral, Some(110.0)).runs, 2);
        assert_eq!(
            find(Method::Je, Factor::Lateral, Some(50.0)).rmse,
            Some(1.0)
        );
        let fraction = find(Method::Dpd, Factor::Overall, None).mean_pass_fraction;
        assert!((fraction.unwrap() - 0.05).abs() < 1e-15);

        let plot = plot_data(&s, Factor::Snr);
        let lines: Vec<&str> = plot.lines().collect();
        assert_eq!(lines[0], "# snr DPD-AFB-1D JE-AFB-1D");
        assert_eq!(lines[1], format!("-5 {:.6} NaN", 10f64.sqrt()));
        assert_eq!(lines[2], "15 NaN 1.000000");
    }

    #[test]
    fn lateral_bins_cover_the_ends() {
        let r = record(180.0, Some(180.0), 0.0, Method::Dpd);
        assert_eq!(level_of(&r, Factor::Lateral, 20.0), Some(170.0));
        let r = record(0.0, Some(0.0), 0.0, Method::Dpd);
        assert_eq!(level_of(&r, Factor::Lateral, 20.0), Some(10.0));
    }
}
