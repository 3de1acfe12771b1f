//! Per-run records and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::localization::{Method, SearchMode, StageTimings};
use crate::timefreq::FrontendKind;

/// One (scenario, method, front-end, search) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: usize,
    pub method: Method,
    pub frontend: FrontendKind,
    pub search: SearchMode,
    /// Scenario conditions; absent for measured BRIRs.
    pub snr: Option<f64>,
    pub t60: Option<f64>,
    pub distance_factor: Option<f64>,
    /// Lateral degrees.
    pub truth: f64,
    /// Lateral degrees, `None` for a no-estimate run.
    pub estimate: Option<f64>,
    pub pass_count: usize,
    pub total_bins: usize,
    pub timings: StageTimings,
}

impl RunRecord {
    pub fn error(&self) -> Option<f64> {
        self.estimate.map(|e| e - self.truth)
    }

    pub fn pass_fraction(&self) -> Option<f64> {
        (self.total_bins > 0).then(|| self.pass_count as f64 / self.total_bins as f64)
    }
}

/// CSV column order. Timings are left out so that the file is a pure
/// function of the inputs and seed.
pub const CSV_COLUMNS: [&str; 12] = [
    "scenario",
    "method",
    "frontend",
    "search",
    "snr",
    "t60",
    "distance_factor",
    "truth",
    "estimate",
    "no_estimate",
    "pass_count",
    "total_bins",
];

#[derive(Serialize, Deserialize)]
struct Row {
    scenario: usize,
    method: Method,
    frontend: FrontendKind,
    search: SearchMode,
    snr: Option<f64>,
    t60: Option<f64>,
    distance_factor: Option<f64>,
    truth: f64,
    estimate: Option<f64>,
    no_estimate: bool,
    pass_count: usize,
    total_bins: usize,
}

pub fn write_records_csv(out: impl Write, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            scenario: r.scenario,
            method: r.method,
            frontend: r.frontend,
            search: r.search,
            snr: r.snr,
            t60: r.t60,
            distance_factor: r.distance_factor,
            truth: r.truth,
            estimate: r.estimate,
            no_estimate: r.estimate.is_none(),
            pass_count: r.pass_count,
            total_bins: r.total_bins,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Inverse of [`write_records_csv`]; timings come back as zero.
pub fn read_records_csv(input: impl Read) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                scenario: row.scenario,
                method: row.method,
                frontend: row.frontend,
                search: row.search,
                snr: row.snr,
                t60: row.t60,
                distance_factor: row.distance_factor,
                truth: row.truth,
                estimate: if row.no_estimate { None } else { row.estimate },
                pass_count: row.pass_count,
                total_bins: row.total_bins,
                timings: StageTimings::default(),
            })
        })
        .collect()
}

/// Timings keyed like the records, for a separate file.
pub fn write_timings_csv(out: impl Write, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "method",
        "frontend",
        "search",
        "frontend_ms",
        "focusing_ms",
        "smoothing_ms",
        "dpd_ms",
        "search_ms",
        "total_ms",
    ])?;
    for r in records {
        let t = &r.timings;
        w.write_record([
            r.scenario.to_string(),
            r.method.to_string(),
            r.frontend.to_string(),
            r.search.to_string(),
            format!("{:.3}", t.frontend),
            format!("{:.3}", t.focusing),
            format!("{:.3}", t.smoothing),
            format!("{:.3}", t.dpd),
            format!("{:.3}", t.search),
            format!("{:.3}", t.total),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
