//! Experiment driver: sweeps, per-run evaluation of every method on a shared
//! demonstration, CSV results and aggregates.
//!
//! A results file starts with the resolved settings as `# key = value`
//! lines, followed by a CSV table with the columns in [`RESULT_COLUMNS`].
//! Reals are written with 17 significant digits so files are bit-exact
//! across platforms, and rows are ordered by `(run_id, method)`.

mod batch;
mod config;
mod records;
mod replay;
mod run;

pub use batch::{
    aggregate_path, emit_plot_data, run_batch, run_batch_to_file, run_batch_with, sibling_path,
    BatchOutcome,
};
pub use config::{
    parse_settings, Domain, EnvSize, ExperimentConfig, Method, OccupancyStart, PolicyEstimator,
    SweepAxis, SweepPoint, WORKERS_ENV,
};
pub use records::{
    aggregate, format_real, mean_stderr, read_aggregate, read_results, sort_canonical,
    write_aggregate, write_comments, write_results, AggregateRow, ResultsFile, ResultsWriter,
    RunRecord, AGGREGATE_COLUMNS, RESULT_COLUMNS,
};
pub use replay::{recorded_config, replay_run, replay_setup, Replay};
pub use run::{
    prepare_run, run_id, run_seed, run_single, run_with_seed, MethodOutput, MethodRunner, RunSetup,
    EVAL_TOL,
};
