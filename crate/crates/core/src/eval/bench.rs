//! Wall-clock comparison of the 1-D and 2-D searches on one input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::{localize, LocalizationConfig, Prepared, SearchMode};
use crate::timefreq::BinauralSignal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub iterations: usize,
    /// Median full-pipeline milliseconds.
    pub t_1d: f64,
    pub t_2d: f64,
    pub ratio: f64,
    /// Median milliseconds of the search stage alone.
    pub search_1d: f64,
    pub search_2d: f64,
    pub search_ratio: f64,
    /// MUSIC evaluations per bin.
    pub grid_1d: usize,
    pub grid_2d: usize,
    pub pass_count: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Run the full algorithm `iterations` times per search mode on `signal`,
/// alternating the modes after one warm-up run each, and report medians.
pub fn bench_search(
    signal: &BinauralSignal,
    prepared: &Prepared,
    config: &LocalizationConfig,
    iterations: usize,
) -> Result<BenchResult> {
    if iterations < 5 {
        return Err(Error::invalid("bench needs at least 5 iterations"));
    }
    let configs = [SearchMode::OneD, SearchMode::TwoD].map(|mode| {
        let mut c = config.clone();
        c.search.mode = mode;
        c
    });
    let mut pass_count = 0;
    for c in &configs {
        pass_count = localize(signal, prepared, c)?.pass_count;
    }
    let mut total = [Vec::new(), Vec::new()];
    let mut search = [Vec::new(), Vec::new()];
    for _ in 0..iterations {
        for (i, c) in configs.iter().enumerate() {
            let report = localize(signal, prepared, c)?;
            total[i].push(report.timings.total);
            search[i].push(report.timings.search);
        }
    }
    let [t_1d, t_2d] = total.map(|mut v| median(&mut v));
    let [search_1d, search_2d] = search.map(|mut v| median(&mut v));
    let (grid_1d, grid_2d) = prepared.grid_sizes();
    Ok(BenchResult {
        iterations,
        t_1d,
        t_2d,
        ratio: t_2d / t_1d,
        search_1d,
        search_2d,
        search_ratio: search_2d / search_1d,
        grid_1d,
        grid_2d,
        pass_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }
}
