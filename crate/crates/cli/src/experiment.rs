//! Experiment runners: repeated seeded trials per vertex count, written as a
//! per-trial CSV and an aggregated summary CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use diamondperc::diamond::{diamond_percolation, DiamondConfig};
use diamondperc::graph::{sample_er, sample_ppm, PpmParams};
use diamondperc::metrics::{is_refinement, pair_counts};
use diamondperc::partition::{balanced_partition, powerlaw_partition, Partition};
use diamondperc::rng::{seeded, stream_seed};
use diamondperc::stats::{mean, normal_interval, wilson_interval, Z95};
use diamondperc::theory::{delta_lower_bound_seeded, WeakRecoveryBound};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::rule::Rule;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "DIAMONDPERC_THREADS";

/// Stream index reserved for the Monte Carlo `Δ` estimate of `weak_balanced`.
const DELTA_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Mean correlation on power-law PPM graphs.
    AlmostExactPowerlaw,
    /// Exact-recovery frequency on power-law PPM graphs.
    ExactPowerlaw,
    /// Detected community size of one vertex in `ER(s, p)`; `n_values` are
    /// the community sizes `s`.
    DeltaEstimate,
    /// Balanced PPM against the Monte Carlo weak-recovery bound.
    WeakBalanced,
    /// Correlation of randomly permuted balanced partitions with the original.
    BaselineCheck,
}

fn default_threshold() -> u32 {
    2
}

/// One experiment as read from a JSON configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_values: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub p: Option<f64>,
    /// Inter-community probability as a rule in `n`, e.g. `"5/n"`.
    #[serde(default)]
    pub q_rule: Option<String>,
    #[serde(default)]
    pub tau: Option<f64>,
    /// Community count as a rule in `n`, e.g. `"n^(2/3)"` (rounded down).
    #[serde(default)]
    pub k_rule: Option<String>,
    #[serde(default)]
    pub s: Option<usize>,
    /// Literal community count; shorthand for a constant `k_rule`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: u32,
    /// Samples behind the `Δ` estimate of `weak_balanced` (default 5000).
    #[serde(default)]
    pub delta_trials: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub out_path: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("bad experiment config: {e}")))
    }
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    /// Empty when the correlation is undefined (e.g. all-singleton output).
    pub rho: Option<f64>,
    pub exact: bool,
    pub refinement: bool,
    #[serde(rename = "m_C")]
    pub m_c: u64,
    #[serde(rename = "m_T")]
    pub m_t: u64,
    pub runtime_ms: f64,
    /// Detected community size of vertex 0 (`delta_estimate` only).
    pub c1_size: Option<usize>,
}

impl TrialRow {
    /// The row without its timing column, for reproducibility checks.
    pub fn outcome(&self) -> (usize, usize, u64, Option<f64>, bool, bool, u64, u64, Option<usize>) {
        (
            self.n,
            self.trial,
            self.seed,
            self.rho,
            self.exact,
            self.refinement,
            self.m_c,
            self.m_t,
            self.c1_size,
        )
    }
}

/// One row of the summary CSV (per vertex count).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub trials: usize,
    pub rho_mean: Option<f64>,
    pub rho_ci_low: Option<f64>,
    pub rho_ci_high: Option<f64>,
    pub exact_frac: f64,
    pub exact_ci_low: f64,
    pub exact_ci_high: f64,
    pub refinement_frac: f64,
    /// Trials whose correlation was undefined; excluded from `rho_mean`.
    pub rho_undefined: usize,
    pub delta: Option<f64>,
    pub delta_se: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Clone)]
enum Model {
    Powerlaw { tau: f64, k: Rule, p: f64, q: Rule },
    Delta { p: f64 },
    Balanced { s: usize, k: Rule, p: f64, q: Rule, delta_trials: usize },
    Baseline { s: usize, k: Rule },
}

/// A validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    model: Model,
    detector: DiamondConfig,
}

fn need<T: Copy>(v: Option<T>, what: &str, kind: ExperimentKind) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("{kind:?} experiment needs '{what}'")))
}

fn check_probability(p: f64, what: &str) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::usage(format!("{what} = {p} is not a probability")));
    }
    Ok(p)
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        let kind = config.experiment;
        if config.trials < 1 {
            return Err(CliError::usage("trials must be at least 1"));
        }
        if config.n_values.is_empty() {
            return Err(CliError::usage("n_values must not be empty"));
        }
        if config.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::usage("n_values must be strictly increasing"));
        }
        if config.n_values.len() as u64 > u32::MAX as u64 || config.trials as u64 > u32::MAX as u64 {
            return Err(CliError::usage("too many vertex counts or trials"));
        }
        let detector = DiamondConfig::new(config.threshold)?;
        let k_rule = |default: Option<Rule>| -> Result<Rule, CliError> {
            match (&config.k_rule, config.k) {
                (Some(_), Some(_)) => Err(CliError::usage("give either 'k' or 'k_rule', not both")),
                (Some(r), None) => Rule::parse(r),
                (None, Some(k)) => Ok(Rule::constant(k as f64)),
                (None, None) => default.ok_or_else(|| CliError::usage(format!("{kind:?} experiment needs 'k' or 'k_rule'"))),
            }
        };
        let q_rule = || -> Result<Rule, CliError> {
            Rule::parse(config.q_rule.as_deref().ok_or_else(|| CliError::usage(format!("{kind:?} experiment needs 'q_rule'")))?)
        };
        let model = match kind {
            ExperimentKind::AlmostExactPowerlaw | ExperimentKind::ExactPowerlaw => {
                let tau = need(config.tau, "tau", kind)?;
                if !(tau > 2.0) {
                    return Err(CliError::usage("tau must exceed 2"));
                }
                Model::Powerlaw {
                    tau,
                    k: k_rule(None)?,
                    p: check_probability(need(config.p, "p", kind)?, "p")?,
                    q: q_rule()?,
                }
            }
            ExperimentKind::DeltaEstimate => {
                if config.n_values[0] < 2 {
                    return Err(CliError::usage("delta_estimate community sizes must be at least 2"));
                }
                Model::Delta {
                    p: check_probability(need(config.p, "p", kind)?, "p")?,
                }
            }
            ExperimentKind::WeakBalanced => {
                let s = need(config.s, "s", kind)?;
                if s < 2 {
                    return Err(CliError::usage("s must be at least 2"));
                }
                let delta_trials = config.delta_trials.unwrap_or(5000);
                if delta_trials < 1 {
                    return Err(CliError::usage("delta_trials must be at least 1"));
                }
                Model::Balanced {
                    s,
                    k: k_rule(Some(Rule::parse(&format!("n/{s}"))?))?,
                    p: check_probability(need(config.p, "p", kind)?, "p")?,
                    q: q_rule()?,
                    delta_trials,
                }
            }
            ExperimentKind::BaselineCheck => {
                let s = need(config.s, "s", kind)?;
                Model::Baseline {
                    s,
                    k: k_rule(Some(Rule::parse(&format!("n/{s}"))?))?,
                }
            }
        };
        let exp = Self { config, model, detector };
        for n_index in 0..exp.config.n_values.len() {
            exp.check_parameters(n_index)?;
        }
        Ok(exp)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Rejects parameter rules that are invalid at a vertex count before any
    /// trial runs.
    fn check_parameters(&self, n_index: usize) -> Result<(), CliError> {
        let n = self.config.n_values[n_index];
        match &self.model {
            Model::Powerlaw { k, q, .. } => {
                k.count(n)?;
                q.probability(n)?;
            }
            Model::Delta { .. } => {}
            Model::Balanced { s, k, q, .. } => {
                balanced_partition(n, k.count(n)?, *s)?;
                q.probability(n)?;
            }
            Model::Baseline { s, k } => {
                let t = balanced_partition(n, k.count(n)?, *s)?;
                let m_t = t.intra_pair_count();
                if n < 2 || m_t == 0 || m_t as u128 * 2 == n as u128 * (n as u128 - 1) {
                    return Err(CliError::usage("baseline_check needs a partition with 0 < m_T < N"));
                }
            }
        }
        Ok(())
    }

    /// Seed of trial `trial` at the `n_index`-th vertex count.
    pub fn trial_seed(&self, n_index: usize, trial: usize) -> u64 {
        stream_seed(self.config.seed, ((n_index as u64) << 32) | trial as u64)
    }

    /// Runs a single trial; rows produced by [`Experiment::run`] are
    /// reproduced exactly apart from `runtime_ms`.
    pub fn run_trial(&self, n_index: usize, trial: usize) -> Result<TrialRow, CliError> {
        let n = self.config.n_values[n_index];
        let seed = self.trial_seed(n_index, trial);
        let mut rng = seeded(seed);
        let start = Instant::now();
        let mut c1_size = None;
        let (c, t) = match &self.model {
            Model::Powerlaw { tau, k, p, q } => {
                let t = powerlaw_partition(*tau, k.count(n)?, n, &mut rng)?;
                let g = sample_ppm(&t, PpmParams::new(*p, q.probability(n)?)?, &mut rng)?;
                (diamond_percolation(&g, self.detector), t)
            }
            Model::Delta { p } => {
                let h = sample_er(n, *p, &mut rng)?;
                let c = diamond_percolation(&h, self.detector);
                c1_size = Some(c.block_size_of(0));
                (c, Partition::one_block(n))
            }
            Model::Balanced { s, k, p, q, .. } => {
                let t = balanced_partition(n, k.count(n)?, *s)?;
                let g = sample_ppm(&t, PpmParams::new(*p, q.probability(n)?)?, &mut rng)?;
                (diamond_percolation(&g, self.detector), t)
            }
            Model::Baseline { s, k } => {
                let t = balanced_partition(n, k.count(n)?, *s)?;
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                (t.permute_vertices(&perm)?, t)
            }
        };
        let counts = pair_counts(&c, &t)?;
        let rho = match counts.correlation() {
            Ok(r) => Some(r),
            Err(diamondperc::Error::UndefinedCorrelation { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let refinement = is_refinement(&c, &t)?;
        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(TrialRow {
            n,
            trial,
            seed,
            rho,
            exact: c == t,
            refinement,
            m_c: counts.m_c,
            m_t: counts.m_t,
            runtime_ms: (runtime_ms * 1e3).round() / 1e3,
            c1_size,
        })
    }

    /// Runs every trial on a pool of at most `DIAMONDPERC_THREADS` workers.
    /// Rows come back in `(n, trial)` order.
    pub fn run(&self) -> Result<ExperimentOutput, CliError> {
        let pool = worker_pool()?;
        let mut rows = Vec::with_capacity(self.config.n_values.len() * self.config.trials);
        let mut summary = Vec::with_capacity(self.config.n_values.len());
        for n_index in 0..self.config.n_values.len() {
            let block: Vec<TrialRow> = pool.install(|| {
                (0..self.config.trials)
                    .into_par_iter()
                    .map(|trial| self.run_trial(n_index, trial))
                    .collect::<Result<_, _>>()
            })?;
            summary.push(self.summarize(n_index, &block)?);
            rows.extend(block);
        }
        Ok(ExperimentOutput { rows, summary })
    }

    fn summarize(&self, n_index: usize, rows: &[TrialRow]) -> Result<SummaryRow, CliError> {
        let n = self.config.n_values[n_index];
        let trials = rows.len();
        let rhos: Vec<f64> = rows.iter().filter_map(|r| r.rho).collect();
        let (rho_mean, rho_ci_low, rho_ci_high) = if rhos.is_empty() {
            (None, None, None)
        } else {
            let (lo, hi) = normal_interval(&rhos, Z95);
            (Some(mean(&rhos)), Some(lo), Some(hi))
        };
        let exact = rows.iter().filter(|r| r.exact).count();
        let (exact_ci_low, exact_ci_high) = wilson_interval(exact, trials, Z95);
        let refinement = rows.iter().filter(|r| r.refinement).count();
        let delta = match &self.model {
            Model::Delta { .. } => {
                let sizes: Vec<usize> = rows.iter().filter_map(|r| r.c1_size).collect();
                Some(WeakRecoveryBound::from_sizes(n, &sizes))
            }
            Model::Balanced { s, p, delta_trials, .. } => {
                let seed = stream_seed(self.config.seed, DELTA_STREAM);
                Some(delta_lower_bound_seeded(*s, *p, *delta_trials, seed)?)
            }
            _ => None,
        };
        Ok(SummaryRow {
            n,
            trials,
            rho_mean,
            rho_ci_low,
            rho_ci_high,
            exact_frac: exact as f64 / trials as f64,
            exact_ci_low,
            exact_ci_high,
            refinement_frac: refinement as f64 / trials as f64,
            rho_undefined: trials - rhos.len(),
            delta: delta.map(|d| d.delta),
            delta_se: delta.map(|d| d.std_error),
        })
    }
}

/// Worker pool sized by `DIAMONDPERC_THREADS` (default: all cores).
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(|e| CliError::usage(e.to_string()))
}

/// Companion path of the summary CSV: `runs.csv` becomes `runs_summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv") => out.with_file_name(format!(
            "{}_summary.csv",
            out.file_stem().and_then(|s| s.to_str()).unwrap_or("out")
        )),
        _ => {
            let mut s = out.as_os_str().to_owned();
            s.push("_summary.csv");
            PathBuf::from(s)
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
