use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use super::config::{ExperimentConfig, SweepAxis};
use super::records::{
    aggregate, read_results, sort_canonical, write_aggregate, write_results, AggregateRow,
    ResultsWriter, RunRecord,
};
use super::run::run_single;
use crate::error::{Error, Result};

/// Records of a finished batch, canonically ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub records: Vec<RunRecord>,
    pub aggregate: Vec<AggregateRow>,
}

impl BatchOutcome {
    pub fn error_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_error()).count()
    }
}

/// Runs every `(sweep point, run)` pair on `config.workers` threads.
/// `on_run` sees each run's records as soon as the run finishes, in
/// completion order.
pub fn run_batch_with<F>(config: &ExperimentConfig, on_run: F) -> Result<BatchOutcome>
where
    F: Fn(&[RunRecord]) -> Result<()> + Sync,
{
    config.validate()?;
    let jobs: Vec<_> = config
        .sweep_points()
        .into_iter()
        .flat_map(|p| (0..config.n_runs).map(move |i| (p, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let collected = Mutex::new(Vec::with_capacity(jobs.len() * config.methods.len()));
    pool.install(|| {
        jobs.par_iter().try_for_each(|(point, run_index)| {
            let records = run_single(config, point, *run_index);
            on_run(&records)?;
            collected
                .lock()
                .expect("no panics while held")
                .extend(records);
            Ok::<_, Error>(())
        })
    })?;
    let mut records = collected.into_inner().expect("no panics while held");
    sort_canonical(&mut records);
    let aggregate = aggregate(&records);
    Ok(BatchOutcome { records, aggregate })
}

pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutcome> {
    run_batch_with(config, |_| Ok(()))
}

/// `path` with `suffix` appended to its file name.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Path of the aggregate written next to a results file.
pub fn aggregate_path(results: &Path) -> PathBuf {
    let stem = results.file_stem().unwrap_or_default().to_os_string();
    let mut name = stem;
    name.push(".aggregate.csv");
    results.with_file_name(name)
}

fn write_file_atomic(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let tmp = sibling_path(path, ".tmp");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        write(&mut out)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs the batch and writes the results file at `out` plus its aggregate.
///
/// Records are appended to `<out>.partial` as runs finish, so an interrupted
/// batch leaves every completed run on disk. The partial file is replaced by
/// the canonically ordered results file on success.
pub fn run_batch_to_file(config: &ExperimentConfig, out: &Path) -> Result<BatchOutcome> {
    let settings = config.settings();
    let partial = sibling_path(out, ".partial");
    let writer = Mutex::new(ResultsWriter::new(
        BufWriter::new(File::create(&partial)?),
        &settings,
    )?);
    let outcome = run_batch_with(config, |records| {
        let mut w = writer.lock().expect("no panics while held");
        for r in records {
            w.write(r)?;
        }
        w.flush()
    })?;
    drop(writer);
    write_file_atomic(out, |f| write_results(f, &settings, &outcome.records))?;
    fs::remove_file(&partial)?;
    write_file_atomic(&aggregate_path(out), |f| {
        write_aggregate(f, Some(config.sweep_axis()), &outcome.aggregate)
    })?;
    Ok(outcome)
}

/// Reads a results file and writes one aggregate file per sweep axis found
/// in it. A single axis goes to `out`; several go to `out` with `.<axis>`
/// inserted before the extension. Returns the files written.
pub fn emit_plot_data(results: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let file = read_results(BufReader::new(File::open(results)?))?;
    let rows = aggregate(&file.records);
    let mut axes: Vec<SweepAxis> = Vec::new();
    for r in &file.records {
        if !axes.contains(&r.sweep_axis) {
            axes.push(r.sweep_axis);
        }
    }
    if axes.len() <= 1 {
        let axis = axes.first().copied();
        write_file_atomic(out, |f| write_aggregate(f, axis, &rows))?;
        return Ok(vec![out.to_path_buf()]);
    }
    let stem = out
        .file_stem()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let ext = out
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    axes.iter()
        .map(|&axis| {
            let path = out.with_file_name(format!("{stem}.{axis}{ext}"));
            let subset: Vec<_> = rows
                .iter()
                .filter(|r| r.sweep_axis == axis)
                .cloned()
                .collect();
            write_file_atomic(&path, |f| write_aggregate(f, Some(axis), &subset))?;
            Ok(path)
        })
        .collect()
}
