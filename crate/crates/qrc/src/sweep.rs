//! Parameter-sweep orchestration across reservoir realizations, with
//! reproducible random streams, bounded worker parallelism, failure isolation
//! per realization, and best-case aggregation over the survivors.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::seeds::stream_rng;
use crate::tasks::{
    run_signal_task, run_stmc_task, Direction, GammaGrid, ReservoirParams, SignalTaskConfig,
    StmcTaskConfig, TaskResult,
};

/// Which benchmark a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Signal,
    Stmc,
}

/// One reservoir system in a sweep: a qudit dimension or the classical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Qudit(usize),
    Named(String),
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::Qudit(d) if *d >= 1 => Ok(()),
            SystemSpec::Qudit(d) => Err(Error::InvalidDimension(*d)),
            SystemSpec::Named(s) if s == "classical" => Ok(()),
            SystemSpec::Named(s) => Err(Error::Config(format!(
                "unknown system '{s}'; use a qudit dimension or \"classical\""
            ))),
        }
    }

    fn is_quantum(&self) -> bool {
        matches!(self, SystemSpec::Qudit(_))
    }
}

/// Nonlinearity axis: an explicit list, or random draws from an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KerrSpec {
    Values {
        values: Vec<f64>,
    },
    Random {
        count: usize,
        interval: [f64; 2],
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl KerrSpec {
    /// Concrete K values; random draws come from the "sweep-kerr" stream so
    /// resizing other axes never changes them.
    pub fn materialize(&self, master_seed: u64) -> Result<Vec<f64>> {
        match self {
            KerrSpec::Values { values } => {
                if values.is_empty() {
                    return Err(Error::Config("kerr value list is empty".into()));
                }
                Ok(values.clone())
            }
            KerrSpec::Random {
                count,
                interval,
                seed,
            } => {
                if *count == 0 {
                    return Err(Error::Config("kerr draw count is zero".into()));
                }
                let lo = interval[0].min(interval[1]);
                let hi = interval[0].max(interval[1]);
                let mut rng = stream_rng(seed.unwrap_or(master_seed), "sweep-kerr");
                Ok((0..*count).map(|_| rng.gen_range(lo..=hi)).collect())
            }
        }
    }
}

/// Signal-task template: everything but the reservoir. Sampling window and
/// count default per reservoir kind when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalTemplate {
    pub signal_frequency: f64,
    pub bias: f64,
    pub j_train: usize,
    pub j_test: usize,
    pub phase_interval: [f64; 2],
    pub amplitude_interval: [f64; 2],
    pub window: Option<f64>,
    pub num_samples: Option<usize>,
    pub gamma_grid: GammaGrid,
    pub integrator: IntegratorConfig,
}

impl Default for SignalTemplate {
    fn default() -> Self {
        Self {
            signal_frequency: 6.0,
            bias: 10.0,
            j_train: 10,
            j_test: 3000,
            phase_interval: [0.0, std::f64::consts::FRAC_PI_2],
            amplitude_interval: [1.0, 10.0],
            window: None,
            num_samples: None,
            gamma_grid: GammaGrid::signed(),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl SignalTemplate {
    pub fn resolve(&self, reservoir: ReservoirParams, seed: u64) -> SignalTaskConfig {
        let defaults = SignalTaskConfig::new(reservoir);
        SignalTaskConfig {
            reservoir,
            signal_frequency: self.signal_frequency,
            bias: self.bias,
            j_train: self.j_train,
            j_test: self.j_test,
            phase_interval: self.phase_interval,
            amplitude_interval: self.amplitude_interval,
            window: self.window.unwrap_or(defaults.window),
            num_samples: self.num_samples.unwrap_or(defaults.num_samples),
            gamma_grid: self.gamma_grid,
            seed,
            integrator: self.integrator,
        }
    }
}

/// Memory-capacity template: everything but the reservoir. The hold time
/// defaults per reservoir kind when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StmcTemplate {
    pub hold_time: Option<f64>,
    pub amplitude_interval: [f64; 2],
    pub j_train: usize,
    pub j_test: usize,
    pub samples_per_segment: usize,
    pub k_max: usize,
    pub gamma_grid: GammaGrid,
    pub integrator: IntegratorConfig,
}

impl Default for StmcTemplate {
    fn default() -> Self {
        Self {
            hold_time: None,
            amplitude_interval: [1.0, 10.0],
            j_train: 3000,
            j_test: 4000,
            samples_per_segment: 100,
            k_max: 30,
            gamma_grid: GammaGrid::positive(),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl StmcTemplate {
    pub fn resolve(&self, reservoir: ReservoirParams, seed: u64) -> StmcTaskConfig {
        let defaults = StmcTaskConfig::new(reservoir);
        StmcTaskConfig {
            reservoir,
            hold_time: self.hold_time.unwrap_or(defaults.hold_time),
            amplitude_interval: self.amplitude_interval,
            j_train: self.j_train,
            j_test: self.j_test,
            samples_per_segment: self.samples_per_segment,
            k_max: self.k_max,
            gamma_grid: self.gamma_grid,
            seed,
            integrator: self.integrator,
        }
    }
}

/// Full description of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub task: TaskKind,
    pub systems: Vec<SystemSpec>,
    pub kerr: KerrSpec,
    /// Signal-frequency axis (signal task only).
    #[serde(default)]
    pub signal_frequencies: Vec<f64>,
    /// Reservoir-frequency axis; empty means the paper convention
    /// (Omega = 0 for signal, Omega = kappa quantum / 0 classical for STMC).
    #[serde(default)]
    pub reservoir_frequencies: Vec<f64>,
    /// Hold-time axis (STMC only); empty means the kind default.
    #[serde(default)]
    pub hold_times: Vec<f64>,
    /// Amplitude-interval axis (STMC only); empty means the template value.
    #[serde(default)]
    pub amplitude_intervals: Vec<[f64; 2]>,
    /// Training-size axis; empty means the template value.
    #[serde(default)]
    pub j_train_values: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses all available.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub signal: Option<SignalTemplate>,
    #[serde(default)]
    pub stmc: Option<StmcTemplate>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.systems.is_empty() {
            return Err(Error::Config("sweep needs at least one system".into()));
        }
        for s in &self.systems {
            s.validate()?;
        }
        match self.task {
            TaskKind::Signal => {
                if self.signal_frequencies.is_empty() {
                    return Err(Error::Config(
                        "signal sweep needs signal_frequencies".into(),
                    ));
                }
                if self.stmc.is_some() {
                    return Err(Error::Config(
                        "signal sweep carries an stmc template".into(),
                    ));
                }
            }
            TaskKind::Stmc => {
                if !self.signal_frequencies.is_empty() {
                    return Err(Error::Config(
                        "stmc sweep does not take signal_frequencies".into(),
                    ));
                }
                if self.signal.is_some() {
                    return Err(Error::Config(
                        "stmc sweep carries a signal template".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A fully resolved runnable configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResolvedConfig {
    Signal(SignalTaskConfig),
    Stmc(StmcTaskConfig),
}

impl ResolvedConfig {
    pub fn run(&self) -> Result<TaskResult> {
        match self {
            ResolvedConfig::Signal(cfg) => run_signal_task(cfg).map(TaskResult::Signal),
            ResolvedConfig::Stmc(cfg) => run_stmc_task(cfg).map(TaskResult::Stmc),
        }
    }
}

/// Identity of one realization within a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub id: usize,
    pub system: String,
    pub kerr: f64,
    pub reservoir_frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub signal_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hold_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitude_interval: Option<[f64; 2]>,
    pub j_train: usize,
    pub config: ResolvedConfig,
}

/// Outcome of one realization; failures carry no metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RealizationOutcome {
    Ok { result: TaskResult },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub id: usize,
    pub system: String,
    pub kerr: f64,
    pub reservoir_frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub signal_frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hold_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitude_interval: Option<[f64; 2]>,
    pub j_train: usize,
    pub outcome: RealizationOutcome,
}

impl RealizationResult {
    pub fn result(&self) -> Option<&TaskResult> {
        match &self.outcome {
            RealizationOutcome::Ok { result } => Some(result),
            RealizationOutcome::Failed { .. } => None,
        }
    }
}

/// Best metric within one aggregation group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCaseRecord {
    pub system: String,
    pub j_train: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hold_time: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub realization_id: usize,
}

/// Per-realization table plus the best-case record per (group, metric).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub spec: SweepSpec,
    pub realizations: Vec<RealizationResult>,
    pub best: Vec<BestCaseRecord>,
}

/// Materialize the Cartesian expansion of a sweep, in a fixed deterministic
/// order, with a unique id per realization.
pub fn expand_sweep(spec: &SweepSpec) -> Result<Vec<Realization>> {
    spec.validate()?;
    let kerr_values = spec.kerr.materialize(spec.seed)?;
    let mut out = Vec::new();
    let mut id = 0usize;

    for system in &spec.systems {
        let omega_defaults = match spec.task {
            TaskKind::Signal => vec![0.0],
            TaskKind::Stmc => {
                if system.is_quantum() {
                    vec![1.0]
                } else {
                    vec![0.0]
                }
            }
        };
        let omegas = if spec.reservoir_frequencies.is_empty() {
            omega_defaults
        } else {
            spec.reservoir_frequencies.clone()
        };
        for &kerr in &kerr_values {
            for &omega in &omegas {
                let reservoir = match system {
                    SystemSpec::Qudit(d) => ReservoirParams::qudit(*d, omega, kerr)?,
                    SystemSpec::Named(_) => ReservoirParams::classical(omega, kerr)?,
                };
                match spec.task {
                    TaskKind::Signal => {
                        let template = spec.signal.clone().unwrap_or_default();
                        let j_trains = if spec.j_train_values.is_empty() {
                            vec![template.j_train]
                        } else {
                            spec.j_train_values.clone()
                        };
                        for &freq in &spec.signal_frequencies {
                            for &j_train in &j_trains {
                                let mut cfg = template.resolve(reservoir, spec.seed);
                                cfg.signal_frequency = freq;
                                cfg.j_train = j_train;
                                out.push(Realization {
                                    id,
                                    system: reservoir.label(),
                                    kerr,
                                    reservoir_frequency: omega,
                                    signal_frequency: Some(freq),
                                    hold_time: None,
                                    amplitude_interval: None,
                                    j_train,
                                    config: ResolvedConfig::Signal(cfg),
                                });
                                id += 1;
                            }
                        }
                    }
                    TaskKind::Stmc => {
                        let template = spec.stmc.clone().unwrap_or_default();
                        let hold_times = if spec.hold_times.is_empty() {
                            vec![template
                                .hold_time
                                .unwrap_or(if system.is_quantum() { 0.5 } else { 5.0 })]
                        } else {
                            spec.hold_times.clone()
                        };
                        let intervals = if spec.amplitude_intervals.is_empty() {
                            vec![template.amplitude_interval]
                        } else {
                            spec.amplitude_intervals.clone()
                        };
                        let j_trains = if spec.j_train_values.is_empty() {
                            vec![template.j_train]
                        } else {
                            spec.j_train_values.clone()
                        };
                        for &hold in &hold_times {
                            for &interval in &intervals {
                                for &j_train in &j_trains {
                                    let mut cfg = template.resolve(reservoir, spec.seed);
                                    cfg.hold_time = hold;
                                    cfg.amplitude_interval = interval;
                                    cfg.j_train = j_train;
                                    out.push(Realization {
                                        id,
                                        system: reservoir.label(),
                                        kerr,
                                        reservoir_frequency: omega,
                                        signal_frequency: None,
                                        hold_time: Some(hold),
                                        amplitude_interval: Some(interval),
                                        j_train,
                                        config: ResolvedConfig::Stmc(cfg),
                                    });
                                    id += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Config("sweep expansion is empty".into()));
    }
    Ok(out)
}

/// Extremal ok-realization under the metric, ties broken by id order.
pub fn best_case<'a, F>(
    results: &'a [RealizationResult],
    metric: F,
    direction: Direction,
) -> Option<&'a RealizationResult>
where
    F: Fn(&TaskResult) -> Option<f64>,
{
    let mut best: Option<(&RealizationResult, f64)> = None;
    for r in results {
        let Some(task) = r.result() else { continue };
        let Some(value) = metric(task) else { continue };
        let take = match &best {
            None => true,
            Some((_, best_value)) => match direction {
                Direction::Minimize => value < *best_value,
                Direction::Maximize => value > *best_value,
            },
        };
        if take {
            best = Some((r, value));
        }
    }
    best.map(|(r, _)| r)
}

fn group_keys(results: &[RealizationResult]) -> Vec<(String, usize, Option<f64>)> {
    let mut keys: Vec<(String, usize, Option<f64>)> = Vec::new();
    for r in results {
        let key = (r.system.clone(), r.j_train, r.hold_time);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys
}

fn aggregate_best(results: &[RealizationResult], task: TaskKind) -> Vec<BestCaseRecord> {
    let mut records = Vec::new();
    for (system, j_train, hold_time) in group_keys(results) {
        let group: Vec<RealizationResult> = results
            .iter()
            .filter(|r| r.system == system && r.j_train == j_train && r.hold_time == hold_time)
            .cloned()
            .collect();
        match task {
            TaskKind::Signal => {
                let metrics: [(&str, fn(&TaskResult) -> Option<f64>); 2] = [
                    ("amplitude_rmse", |t| t.as_signal().map(|s| s.amplitude_rmse)),
                    ("phase_rmse", |t| t.as_signal().map(|s| s.phase_rmse)),
                ];
                for (name, metric) in metrics {
                    if let Some(winner) = best_case(&group, metric, Direction::Minimize) {
                        records.push(BestCaseRecord {
                            system: system.clone(),
                            j_train,
                            hold_time,
                            metric: name.to_string(),
                            value: metric(winner.result().unwrap()).unwrap(),
                            realization_id: winner.id,
                        });
                    }
                }
            }
            TaskKind::Stmc => {
                let metric = |t: &TaskResult| t.as_stmc().map(|s| s.stmc);
                if let Some(winner) = best_case(&group, metric, Direction::Maximize) {
                    records.push(BestCaseRecord {
                        system: system.clone(),
                        j_train,
                        hold_time,
                        metric: "stmc".to_string(),
                        value: metric(winner.result().unwrap()).unwrap(),
                        realization_id: winner.id,
                    });
                }
            }
        }
    }
    records
}

/// Execute every realization of the sweep with bounded parallelism.
///
/// The summary is a pure function of (spec, seeds): results are aggregated in
/// realization-id order no matter how many workers run or in which order they
/// finish, and one diverging realization only marks itself failed.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    run_sweep_with_progress(spec, |_, _| {})
}

/// `run_sweep` with a per-realization completion hook (for stderr progress).
/// The hook receives each finished realization and the total count; it runs
/// in completion order and has no effect on the summary.
pub fn run_sweep_with_progress<P>(spec: &SweepSpec, progress: P) -> Result<SweepSummary>
where
    P: Fn(&RealizationResult, usize) + Sync,
{
    let realizations = expand_sweep(spec)?;
    let total = realizations.len();
    let execute = || -> Vec<RealizationResult> {
        realizations
            .par_iter()
            .map(|r| {
                let outcome = match r.config.run() {
                    Ok(result) => RealizationOutcome::Ok { result },
                    Err(e) => RealizationOutcome::Failed {
                        reason: e.to_string(),
                    },
                };
                let row = RealizationResult {
                    id: r.id,
                    system: r.system.clone(),
                    kerr: r.kerr,
                    reservoir_frequency: r.reservoir_frequency,
                    signal_frequency: r.signal_frequency,
                    hold_time: r.hold_time,
                    amplitude_interval: r.amplitude_interval,
                    j_train: r.j_train,
                    outcome,
                };
                progress(&row, total);
                row
            })
            .collect()
    };
    let results = if spec.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::SweepFailure(format!("worker pool: {e}")))?;
        pool.install(execute)
    } else {
        execute()
    };

    if results.iter().all(|r| r.result().is_none()) {
        let first_reason = results
            .iter()
            .find_map(|r| match &r.outcome {
                RealizationOutcome::Failed { reason } => Some(reason.clone()),
                RealizationOutcome::Ok { .. } => None,
            })
            .unwrap_or_default();
        return Err(Error::SweepFailure(format!(
            "all {} realizations failed; first: {first_reason}",
            results.len()
        )));
    }

    let best = aggregate_best(&results, spec.task);
    Ok(SweepSummary {
        spec: spec.clone(),
        realizations: results,
        best,
    })
}
