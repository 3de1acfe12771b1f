//! Experiment harness: sweeps over simulated scenarios, RMSE summaries
//! per condition and the 1-D versus 2-D runtime benchmark.

mod bench;
mod record;
mod summary;
mod sweep;

pub use bench::{bench_search, BenchResult};
pub use record::{read_records_csv, write_records_csv, write_timings_csv, RunRecord, CSV_COLUMNS};
pub use summary::{plot_data, rmse, summarize, Condition, ConditionSummary, Factor, Rmse};
pub use sweep::{
    plan, run_sweep, speech_sources, sweep_summary, write_sweep_outputs, AbortedScenario,
    ExternalCase, PlannedRun, ScenarioDiagnostics, SweepConfig, SweepOutcome, SweepSummary,
};
