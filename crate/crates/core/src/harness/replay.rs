use super::config::ExperimentConfig;
use super::records::{sort_canonical, ResultsFile, RunRecord};
use super::run::{prepare_run, run_with_seed, RunSetup};
use crate::error::{Error, Result};

/// A run re-derived from its recorded seed next to the recorded records.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub run_id: u64,
    pub seed: u64,
    pub recorded: Vec<RunRecord>,
    pub replayed: Vec<RunRecord>,
}

impl Replay {
    /// True when every replayed record equals its recorded counterpart,
    /// wall time aside.
    pub fn matches(&self) -> bool {
        let strip = |r: &RunRecord| RunRecord {
            wall_time_ms: None,
            ..r.clone()
        };
        self.recorded.len() == self.replayed.len()
            && self
                .recorded
                .iter()
                .zip(&self.replayed)
                .all(|(a, b)| strip(a) == strip(b))
    }
}

/// Configuration echoed in the header of a results file.
pub fn recorded_config(file: &ResultsFile) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    config.apply(&file.settings)?;
    config.validate()?;
    Ok(config)
}

fn locate(
    config: &ExperimentConfig,
    file: &ResultsFile,
    run_id: u64,
) -> Result<(super::config::SweepPoint, u64, Vec<RunRecord>)> {
    let recorded: Vec<RunRecord> = file
        .records
        .iter()
        .filter(|r| r.run_id == run_id)
        .cloned()
        .collect();
    let seed = recorded
        .first()
        .map(|r| r.seed)
        .ok_or_else(|| Error::Format(format!("no records for run {run_id}")))?;
    let sweep_index = (run_id / config.n_runs as u64) as usize;
    let point = *config
        .sweep_points()
        .get(sweep_index)
        .ok_or_else(|| Error::Format(format!("run {run_id} lies outside the recorded sweep")))?;
    Ok((point, seed, recorded))
}

/// Re-runs `run_id` from the seed recorded for it.
pub fn replay_run(file: &ResultsFile, run_id: u64) -> Result<Replay> {
    let config = recorded_config(file)?;
    let (point, seed, recorded) = locate(&config, file, run_id)?;
    let mut recorded = recorded;
    let mut replayed = run_with_seed(&config, &point, run_id, seed);
    sort_canonical(&mut recorded);
    sort_canonical(&mut replayed);
    Ok(Replay {
        run_id,
        seed,
        recorded,
        replayed,
    })
}

/// Environment, true reward and demonstration of a recorded run.
pub fn replay_setup(file: &ResultsFile, run_id: u64) -> Result<RunSetup> {
    let config = recorded_config(file)?;
    let (point, seed, _) = locate(&config, file, run_id)?;
    prepare_run(&config, &point, seed)
}
