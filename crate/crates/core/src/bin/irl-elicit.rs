use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irl_elicit::harness::{
    emit_plot_data, format_real, parse_settings, read_results, replay_run, replay_setup,
    run_batch_to_file, ExperimentConfig, WORKERS_ENV,
};
use irl_elicit::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "irl-elicit",
    version,
    about = "Bayesian inverse reinforcement learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of experiments and write results plus aggregates.
    Run(Box<RunArgs>),
    /// Write plot-ready aggregates of a results file.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-derive a recorded run from its seed and compare.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        /// Run to replay; defaults to the first run in the file.
        #[arg(long)]
        run_id: Option<u64>,
        /// Write the run's environment, true reward and demonstration as JSON.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Flags mirror the config-file keys; flags override file values.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// random-mdp or maze.
    #[arg(long)]
    domain: Option<String>,
    /// State count(s) of random MDPs, comma-separated to sweep.
    #[arg(long)]
    states: Option<String>,
    /// Maze size(s) as WxH, comma-separated to sweep.
    #[arg(long)]
    maze: Option<String>,
    #[arg(long)]
    actions: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Demonstrator inverse temperature(s).
    #[arg(long)]
    eta: Option<String>,
    /// Demonstration length(s).
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    /// Comma-separated subset of soft,mh,gibbs,lp,policywalk,mwal.
    #[arg(long)]
    methods: Option<String>,
    /// Chain iterations, burn-in included.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    thin: Option<String>,
    #[arg(long)]
    q_tol: Option<String>,
    /// augmented or marginal-corrected.
    #[arg(long)]
    gibbs_acceptance: Option<String>,
    /// Beta prior parameters A,B.
    #[arg(long)]
    alpha_beta: Option<String>,
    /// Gamma prior on the inverse temperature, SHAPE,RATE.
    #[arg(long)]
    gamma_prior: Option<String>,
    #[arg(long)]
    pw_confidence: Option<String>,
    #[arg(long)]
    lp_penalty: Option<String>,
    #[arg(long)]
    lp_r_max: Option<String>,
    #[arg(long)]
    mwal_accuracy: Option<String>,
    /// Round cap for MWAL, or `none`.
    #[arg(long)]
    mwal_max_rounds: Option<String>,
    /// Reward point estimate of the samplers: mean or map.
    #[arg(long)]
    estimate: Option<String>,
    /// auto, ml or laplace.
    #[arg(long)]
    policy_estimator: Option<String>,
    /// initial or first-state.
    #[arg(long)]
    occupancy_start: Option<String>,
    #[arg(long)]
    tie_tol: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Fill the wall_time_ms column (makes results non-reproducible).
    #[arg(long)]
    record_timing: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> BTreeMap<String, String> {
        let flags = [
            ("domain", &self.domain),
            ("states", &self.states),
            ("maze", &self.maze),
            ("actions", &self.actions),
            ("gamma", &self.gamma),
            ("eta", &self.eta),
            ("horizon", &self.horizon),
            ("runs", &self.runs),
            ("methods", &self.methods),
            ("samples", &self.samples),
            ("burn-in", &self.burn_in),
            ("thin", &self.thin),
            ("q-tol", &self.q_tol),
            ("gibbs-acceptance", &self.gibbs_acceptance),
            ("alpha-beta", &self.alpha_beta),
            ("gamma-prior", &self.gamma_prior),
            ("pw-confidence", &self.pw_confidence),
            ("lp-penalty", &self.lp_penalty),
            ("lp-r-max", &self.lp_r_max),
            ("mwal-accuracy", &self.mwal_accuracy),
            ("mwal-max-rounds", &self.mwal_max_rounds),
            ("estimate", &self.estimate),
            ("policy-estimator", &self.policy_estimator),
            ("occupancy-start", &self.occupancy_start),
            ("tie-tol", &self.tie_tol),
            ("seed", &self.seed),
            ("workers", &self.workers),
        ];
        let mut out: BTreeMap<String, String> = flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.record_timing {
            out.insert("record-timing".into(), "true".into());
        }
        if let Some(path) = &self.out {
            out.insert("out".into(), path.display().to_string());
        }
        out
    }

    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            config.apply(&parse_settings(&text)?)?;
        }
        config.apply(&self.settings())?;
        config.validate()?;
        Ok(config)
    }
}

fn run(args: &RunArgs) -> Result<ExitCode, Error> {
    let config = match args.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let Some(out) = config.out.clone() else {
        eprintln!("config error: no output path (--out)");
        return Ok(ExitCode::from(EXIT_CONFIG));
    };
    let outcome = run_batch_to_file(&config, &out)?;
    let errors = outcome.error_count();
    eprintln!(
        "{} records written to {} ({errors} errors)",
        outcome.records.len(),
        out.display()
    );
    let mut stdout = std::io::stdout().lock();
    for row in &outcome.aggregate {
        writeln!(
            stdout,
            "{}={} {:<10} mean {} stderr {} n {}",
            row.sweep_axis,
            row.sweep_value,
            row.method,
            format_real(row.mean_loss),
            format_real(row.stderr),
            row.n
        )?;
    }
    Ok(if errors > 0 {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    })
}

fn replay(input: &PathBuf, run_id: Option<u64>, dump: Option<&PathBuf>) -> Result<ExitCode, Error> {
    let file = read_results(BufReader::new(File::open(input)?))?;
    let run_id = match run_id.or_else(|| file.records.first().map(|r| r.run_id)) {
        Some(id) => id,
        None => {
            eprintln!("{} holds no records", input.display());
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let replay = replay_run(&file, run_id)?;
    for (old, new) in replay.recorded.iter().zip(&replay.replayed) {
        let show = |r: &irl_elicit::harness::RunRecord| match (&r.loss, &r.error) {
            (Some(l), _) => format_real(*l),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".into(),
        };
        println!(
            "run {run_id} {:<10} recorded {} replayed {}",
            old.method,
            show(old),
            show(new)
        );
    }
    if let Some(path) = dump {
        let setup = replay_setup(&file, run_id)?;
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &setup)?;
        out.flush()?;
    }
    if replay.matches() {
        println!("run {run_id} (seed {}) reproduced exactly", replay.seed);
        Ok(ExitCode::SUCCESS)
    } else {
        println!(
            "run {run_id} (seed {}) does not match its records",
            replay.seed
        );
        Ok(ExitCode::from(EXIT_PARTIAL))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Aggregate { input, out } => emit_plot_data(input, out).map(|paths| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }),
        Command::Replay {
            input,
            run_id,
            dump,
        } => replay(input, *run_id, dump.as_ref()),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        match e {
            Error::Config(_) | Error::Format(_) | Error::Csv(_) | Error::Io(_) => {
                ExitCode::from(EXIT_CONFIG)
            }
            _ => ExitCode::from(EXIT_PARTIAL),
        }
    })
}
