use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    DEFAULT_ACCURACY, DEFAULT_CONFIDENCE, DEFAULT_LP_PENALTY, DEFAULT_MAX_ROUNDS, DEFAULT_R_MAX,
};
use crate::error::{Error, Result};
use crate::samplers::{GammaPrior, GibbsAcceptance, PointEstimate, SamplerConfig};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "IRL_ELICIT_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    RandomMdp,
    Maze,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::RandomMdp => "random-mdp",
            Domain::Maze => "maze",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-mdp" => Ok(Domain::RandomMdp),
            "maze" => Ok(Domain::Maze),
            _ => Err(Error::Config(format!("unknown domain '{s}'"))),
        }
    }
}

/// Compared methods, in canonical output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Soft,
    Mh,
    Gibbs,
    Lp,
    PolicyWalk,
    Mwal,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Soft,
        Method::Mh,
        Method::Gibbs,
        Method::Lp,
        Method::PolicyWalk,
        Method::Mwal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Soft => "soft",
            Method::Mh => "mh",
            Method::Gibbs => "gibbs",
            Method::Lp => "lp",
            Method::PolicyWalk => "policywalk",
            Method::Mwal => "mwal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Eta,
    Horizon,
    States,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Eta => "eta",
            SweepAxis::Horizon => "T",
            SweepAxis::States => "n_states",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(SweepAxis::Eta),
            "T" => Ok(SweepAxis::Horizon),
            "n_states" => Ok(SweepAxis::States),
            _ => Err(Error::Config(format!("unknown sweep axis '{s}'"))),
        }
    }
}

/// Size of one environment: a state count for random MDPs, a grid for mazes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvSize {
    States(usize),
    Grid { width: usize, height: usize },
}

impl EnvSize {
    /// Value reported on the state-count axis (grid cells for mazes).
    pub fn magnitude(self) -> usize {
        match self {
            EnvSize::States(n) => n,
            EnvSize::Grid { width, height } => width * height,
        }
    }
}

impl fmt::Display for EnvSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSize::States(n) => write!(f, "{n}"),
            EnvSize::Grid { width, height } => write!(f, "{width}x{height}"),
        }
    }
}

/// Which policy estimate the LP and MWAL baselines consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyEstimator {
    /// Maximum likelihood on random MDPs, Laplace-smoothed on mazes.
    Auto,
    MaxLikelihood,
    Laplace,
}

impl FromStr for PolicyEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(PolicyEstimator::Auto),
            "ml" => Ok(PolicyEstimator::MaxLikelihood),
            "laplace" => Ok(PolicyEstimator::Laplace),
            _ => Err(Error::Config(format!("unknown policy estimator '{s}'"))),
        }
    }
}

impl fmt::Display for PolicyEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyEstimator::Auto => "auto",
            PolicyEstimator::MaxLikelihood => "ml",
            PolicyEstimator::Laplace => "laplace",
        })
    }
}

/// Start distribution for the MWAL demonstrator occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OccupancyStart {
    Initial,
    FirstState,
}

impl FromStr for OccupancyStart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(OccupancyStart::Initial),
            "first-state" => Ok(OccupancyStart::FirstState),
            _ => Err(Error::Config(format!("unknown occupancy start '{s}'"))),
        }
    }
}

impl fmt::Display for OccupancyStart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OccupancyStart::Initial => "initial",
            OccupancyStart::FirstState => "first-state",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub sizes: Vec<EnvSize>,
    pub n_actions: usize,
    pub discount: f64,
    pub etas: Vec<f64>,
    pub horizons: Vec<usize>,
    pub n_runs: usize,
    pub methods: Vec<Method>,
    pub sampler: SamplerConfig,
    pub beta_prior: (f64, f64),
    pub gamma_prior: GammaPrior,
    pub pw_confidence: f64,
    pub lp_penalty: f64,
    pub lp_r_max: f64,
    pub mwal_accuracy: f64,
    pub mwal_max_rounds: Option<usize>,
    pub point_estimate: PointEstimate,
    pub policy_estimator: PolicyEstimator,
    pub occupancy_start: OccupancyStart,
    pub tie_tol: f64,
    pub master_seed: u64,
    pub record_timing: bool,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::RandomMdp,
            sizes: vec![EnvSize::States(16)],
            n_actions: 4,
            discount: 0.95,
            etas: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            horizons: vec![500],
            n_runs: 100,
            methods: Method::ALL.to_vec(),
            sampler: SamplerConfig::default(),
            beta_prior: (1.0, 1.0),
            gamma_prior: GammaPrior::default(),
            pw_confidence: DEFAULT_CONFIDENCE,
            lp_penalty: DEFAULT_LP_PENALTY,
            lp_r_max: DEFAULT_R_MAX,
            mwal_accuracy: DEFAULT_ACCURACY,
            mwal_max_rounds: Some(DEFAULT_MAX_ROUNDS),
            point_estimate: PointEstimate::PosteriorMean,
            policy_estimator: PolicyEstimator::Auto,
            occupancy_start: OccupancyStart::Initial,
            tie_tol: 1e-9,
            master_seed: 0,
            record_timing: false,
            workers: 1,
            out: None,
        }
    }
}

/// One point on the sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub size: EnvSize,
    pub eta: f64,
    pub horizon: usize,
}

impl SweepPoint {
    pub fn value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::Eta => self.eta,
            SweepAxis::Horizon => self.horizon as f64,
            SweepAxis::States => self.size.magnitude() as f64,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    match parse_list::<f64>(key, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Config(format!(
            "{key}: expected two comma-separated numbers"
        ))),
    }
}

fn parse_grid(value: &str) -> Result<EnvSize> {
    let (w, h) = value
        .trim()
        .split_once('x')
        .ok_or_else(|| Error::Config(format!("maze: expected WxH, got '{value}'")))?;
    Ok(EnvSize::Grid {
        width: parse_one("maze", w)?,
        height: parse_one("maze", h)?,
    })
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Applies `key = value` settings named after the command-line flags.
    pub fn apply(&mut self, settings: &BTreeMap<String, String>) -> Result<()> {
        // Domain first: it decides how `states` and `maze` are read.
        if let Some(d) = settings.get("domain") {
            self.domain = d.parse()?;
        }
        for (key, value) in settings {
            let v = value.as_str();
            match key.as_str() {
                "domain" => {}
                "states" => {
                    self.sizes = parse_list::<usize>(key, v)?
                        .into_iter()
                        .map(EnvSize::States)
                        .collect()
                }
                "maze" => {
                    self.sizes = v.split(',').map(parse_grid).collect::<Result<_>>()?;
                }
                "actions" => self.n_actions = parse_one(key, v)?,
                "gamma" => self.discount = parse_one(key, v)?,
                "eta" => self.etas = parse_list(key, v)?,
                "horizon" => self.horizons = parse_list(key, v)?,
                "runs" => self.n_runs = parse_one(key, v)?,
                "methods" => self.methods = parse_list(key, v)?,
                "samples" => self.sampler.n_samples = parse_one(key, v)?,
                "burn-in" => self.sampler.burn_in = parse_one(key, v)?,
                "thin" => self.sampler.thin = parse_one(key, v)?,
                "q-tol" => self.sampler.q_tol = parse_one(key, v)?,
                "gibbs-acceptance" => {
                    self.sampler.gibbs_acceptance = match v {
                        "augmented" => GibbsAcceptance::Augmented,
                        "marginal-corrected" => GibbsAcceptance::MarginalCorrected,
                        _ => return Err(Error::Config(format!("{key}: unknown mode '{v}'"))),
                    }
                }
                "alpha-beta" => self.beta_prior = parse_pair(key, v)?,
                "gamma-prior" => {
                    let (shape, rate) = parse_pair(key, v)?;
                    self.gamma_prior = GammaPrior { shape, rate };
                }
                "pw-confidence" => self.pw_confidence = parse_one(key, v)?,
                "lp-penalty" => self.lp_penalty = parse_one(key, v)?,
                "lp-r-max" => self.lp_r_max = parse_one(key, v)?,
                "mwal-accuracy" => self.mwal_accuracy = parse_one(key, v)?,
                "mwal-max-rounds" => {
                    self.mwal_max_rounds = match v {
                        "none" => None,
                        _ => Some(parse_one(key, v)?),
                    }
                }
                "estimate" => {
                    self.point_estimate = match v {
                        "mean" => PointEstimate::PosteriorMean,
                        "map" => PointEstimate::Map,
                        _ => return Err(Error::Config(format!("{key}: unknown estimate '{v}'"))),
                    }
                }
                "policy-estimator" => self.policy_estimator = parse_one(key, v)?,
                "occupancy-start" => self.occupancy_start = parse_one(key, v)?,
                "tie-tol" => self.tie_tol = parse_one(key, v)?,
                "seed" => self.master_seed = parse_one(key, v)?,
                "record-timing" => self.record_timing = parse_one(key, v)?,
                "workers" => self.workers = parse_one(key, v)?,
                "out" => self.out = Some(PathBuf::from(v)),
                _ => return Err(Error::Config(format!("unknown setting '{key}'"))),
            }
        }
        // A domain switch without an explicit size picks that domain's
        // default size.
        let sized = settings.contains_key("states") || settings.contains_key("maze");
        if !sized {
            match (self.domain, self.sizes.first()) {
                (Domain::Maze, Some(EnvSize::States(_))) => {
                    self.sizes = vec![EnvSize::Grid {
                        width: 8,
                        height: 8,
                    }]
                }
                (Domain::RandomMdp, Some(EnvSize::Grid { .. })) => {
                    self.sizes = vec![EnvSize::States(16)]
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Settings that determine the results, in the `key = value` form read by
    /// [`ExperimentConfig::apply`]. Output path and worker count are left
    /// out: they do not affect any record.
    pub fn settings(&self) -> Vec<(&'static str, String)> {
        let size_key = match self.domain {
            Domain::RandomMdp => "states",
            Domain::Maze => "maze",
        };
        vec![
            ("domain", self.domain.to_string()),
            (size_key, join(&self.sizes)),
            ("actions", self.n_actions.to_string()),
            ("gamma", format!("{:?}", self.discount)),
            (
                "eta",
                join(
                    &self
                        .etas
                        .iter()
                        .map(|e| format!("{e:?}"))
                        .collect::<Vec<_>>(),
                ),
            ),
            ("horizon", join(&self.horizons)),
            ("runs", self.n_runs.to_string()),
            ("methods", join(&self.methods)),
            ("samples", self.sampler.n_samples.to_string()),
            ("burn-in", self.sampler.burn_in.to_string()),
            ("thin", self.sampler.thin.to_string()),
            ("q-tol", format!("{:?}", self.sampler.q_tol)),
            (
                "gibbs-acceptance",
                match self.sampler.gibbs_acceptance {
                    GibbsAcceptance::Augmented => "augmented",
                    GibbsAcceptance::MarginalCorrected => "marginal-corrected",
                }
                .to_string(),
            ),
            (
                "alpha-beta",
                format!("{:?},{:?}", self.beta_prior.0, self.beta_prior.1),
            ),
            (
                "gamma-prior",
                format!("{:?},{:?}", self.gamma_prior.shape, self.gamma_prior.rate),
            ),
            ("pw-confidence", format!("{:?}", self.pw_confidence)),
            ("lp-penalty", format!("{:?}", self.lp_penalty)),
            ("lp-r-max", format!("{:?}", self.lp_r_max)),
            ("mwal-accuracy", format!("{:?}", self.mwal_accuracy)),
            (
                "mwal-max-rounds",
                self.mwal_max_rounds
                    .map_or_else(|| "none".to_string(), |r| r.to_string()),
            ),
            (
                "estimate",
                match self.point_estimate {
                    PointEstimate::PosteriorMean => "mean",
                    PointEstimate::Map => "map",
                }
                .to_string(),
            ),
            ("policy-estimator", self.policy_estimator.to_string()),
            ("occupancy-start", self.occupancy_start.to_string()),
            ("tie-tol", format!("{:?}", self.tie_tol)),
            ("seed", self.master_seed.to_string()),
            ("record-timing", self.record_timing.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.sizes.is_empty() || self.etas.is_empty() || self.horizons.is_empty() {
            return fail("sweep lists must not be empty".into());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        if methods.len() != self.methods.len() {
            return fail("methods listed more than once".into());
        }
        let swept = [self.sizes.len(), self.etas.len(), self.horizons.len()]
            .iter()
            .filter(|n| **n > 1)
            .count();
        if swept > 1 {
            return fail("only one of states/maze, eta and horizon may list several values".into());
        }
        for size in &self.sizes {
            match (self.domain, size) {
                (Domain::RandomMdp, EnvSize::States(n)) if *n >= 4 => {}
                (Domain::Maze, EnvSize::Grid { width, height }) if width * height >= 4 => {}
                _ => {
                    return fail(format!(
                        "environment size {size} invalid for {}",
                        self.domain
                    ))
                }
            }
        }
        if self.domain == Domain::Maze && self.n_actions != 4 {
            return fail("mazes have exactly 4 actions".into());
        }
        if self.n_actions == 0 {
            return fail("actions must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.discount) {
            return fail(format!("gamma {} not in [0, 1)", self.discount));
        }
        if self.etas.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return fail("eta values must be finite and non-negative".into());
        }
        if !(self.beta_prior.0 > 0.0 && self.beta_prior.1 > 0.0) {
            return fail("alpha-beta must be positive".into());
        }
        if !(self.tie_tol >= 0.0) {
            return fail("tie-tol must be non-negative".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        self.gamma_prior
            .validate()
            .and_then(|_| self.sampler.validate())
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sweep_axis(&self) -> SweepAxis {
        if self.sizes.len() > 1 {
            SweepAxis::States
        } else if self.horizons.len() > 1 {
            SweepAxis::Horizon
        } else {
            SweepAxis::Eta
        }
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let (size, eta, horizon) = (self.sizes[0], self.etas[0], self.horizons[0]);
        let make = |index, size, eta, horizon| SweepPoint {
            index,
            size,
            eta,
            horizon,
        };
        match self.sweep_axis() {
            SweepAxis::States => self
                .sizes
                .iter()
                .enumerate()
                .map(|(i, s)| make(i, *s, eta, horizon))
                .collect(),
            SweepAxis::Horizon => self
                .horizons
                .iter()
                .enumerate()
                .map(|(i, h)| make(i, size, eta, *h))
                .collect(),
            SweepAxis::Eta => self
                .etas
                .iter()
                .enumerate()
                .map(|(i, e)| make(i, size, *e, horizon))
                .collect(),
        }
    }
}

/// Parses a flat `key = value` document. Blank lines and lines starting with
/// `#` are skipped.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}
