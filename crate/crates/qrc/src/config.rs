//! Configuration files: a single TOML document per run, with every physical
//! value in kappa units (enforced by a mandatory `units = "kappa"` field),
//! paper defaults filled for anything omitted, and unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Drive, IntegratorConfig, PiecewiseDrive, SinusoidalDrive};
use crate::error::{Error, Result};
use crate::sweep::{SignalTemplate, StmcTemplate, SweepSpec};
use crate::tasks::{
    generate_piecewise_input, ReservoirParams, SignalTaskConfig, StmcTaskConfig,
};

/// Plot-data flavors the exporter understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// (t, s) rows of one sampled trajectory.
    Trajectory,
    /// (t, level, population) rows of Fock occupations over time.
    Fock,
    /// (k, r2) rows of a delay curve.
    R2Curve,
    /// Best-case RMSE per (system, j_train).
    RmseVsJtrain,
    /// Best-over-K RMSE per (system, signal frequency).
    RmseVsOmega,
    /// Per-realization RMSE over the (frequency, nonlinearity) grid.
    Heatmap,
    /// Best-case STMC per (system, hold time).
    StmcVsD,
}

impl PlotKind {
    pub fn file_name(&self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory.csv",
            PlotKind::Fock => "fock_populations.csv",
            PlotKind::R2Curve => "r2_curve.csv",
            PlotKind::RmseVsJtrain => "rmse_vs_jtrain.csv",
            PlotKind::RmseVsOmega => "rmse_vs_omega.csv",
            PlotKind::Heatmap => "heatmap.csv",
            PlotKind::StmcVsD => "stmc_vs_d.csv",
        }
    }
}

/// Drive description in a simulate config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveSpec {
    Sinusoidal {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        bias: f64,
    },
    Piecewise {
        hold_time: f64,
        #[serde(default)]
        amplitudes: Option<Vec<f64>>,
        #[serde(default)]
        count: Option<usize>,
        #[serde(default)]
        interval: Option<[f64; 2]>,
    },
}

impl DriveSpec {
    pub fn resolve(&self, seed: u64) -> Result<Drive> {
        match self {
            DriveSpec::Sinusoidal {
                amplitude,
                frequency,
                phase,
                bias,
            } => Ok(Drive::Sinusoidal(SinusoidalDrive::new(
                *amplitude, *frequency, *phase, *bias,
            )?)),
            DriveSpec::Piecewise {
                hold_time,
                amplitudes,
                count,
                interval,
            } => match (amplitudes, count) {
                (Some(values), None) => {
                    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let interval = interval.unwrap_or([lo, hi]);
                    Ok(Drive::Piecewise(PiecewiseDrive::new(
                        values.clone(),
                        *hold_time,
                        interval,
                        seed,
                    )?))
                }
                (None, Some(n)) => {
                    let interval = interval.ok_or_else(|| {
                        Error::Config(
                            "piecewise drive with `count` needs an `interval`".into(),
                        )
                    })?;
                    Ok(Drive::Piecewise(generate_piecewise_input(
                        *n, interval, *hold_time, seed,
                    )?))
                }
                _ => Err(Error::Config(
                    "piecewise drive needs exactly one of `amplitudes` or `count`".into(),
                )),
            },
        }
    }
}

/// The `[simulate]` section: one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub drive: DriveSpec,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub num_samples: Option<usize>,
    #[serde(default)]
    pub record_populations: bool,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

/// The `[export]` section: re-export plot data from a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    /// Path to a results JSON produced by a previous run.
    pub input: String,
    pub kinds: Vec<PlotKind>,
}

/// A fully resolved simulate request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub reservoir: ReservoirParams,
    pub drive: Drive,
    pub window: (f64, f64),
    pub num_samples: usize,
    pub record_populations: bool,
    pub integrator: IntegratorConfig,
    pub seed: u64,
}

/// Parsed configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Unit convention guard; must be the string "kappa".
    pub units: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub reservoir: Option<ReservoirParams>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub signal: Option<SignalTemplate>,
    #[serde(default)]
    pub stmc: Option<StmcTemplate>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub export: Option<ExportSection>,
}

impl ConfigFile {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.units != "kappa" {
            return Err(Error::Config(format!(
                "units must be \"kappa\" (all values are expressed in units of the decay rate), got \"{}\"",
                cfg.units
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_str(&text)
    }

    pub fn master_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.seed).unwrap_or(0)
    }

    fn require_reservoir(&self) -> Result<ReservoirParams> {
        let reservoir = self.reservoir.ok_or_else(|| {
            Error::Config("this command needs a [reservoir] section".into())
        })?;
        reservoir.validate()?;
        Ok(reservoir)
    }

    /// Resolve the `[signal]` section (or pure defaults) against the
    /// reservoir into a runnable signal-task config.
    pub fn resolve_signal(&self, cli_seed: Option<u64>) -> Result<SignalTaskConfig> {
        let reservoir = self.require_reservoir()?;
        let template = self.signal.clone().unwrap_or_default();
        let cfg = template.resolve(reservoir, self.master_seed(cli_seed));
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve the `[stmc]` section (or pure defaults) into a runnable
    /// memory-capacity config.
    pub fn resolve_stmc(&self, cli_seed: Option<u64>) -> Result<StmcTaskConfig> {
        let reservoir = self.require_reservoir()?;
        let template = self.stmc.clone().unwrap_or_default();
        let cfg = template.resolve(reservoir, self.master_seed(cli_seed));
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve the `[sweep]` section, applying CLI overrides.
    pub fn resolve_sweep(
        &self,
        cli_seed: Option<u64>,
        cli_workers: Option<usize>,
    ) -> Result<SweepSpec> {
        let mut spec = self
            .sweep
            .clone()
            .ok_or_else(|| Error::Config("this command needs a [sweep] section".into()))?;
        if let Some(seed) = cli_seed.or(self.seed) {
            spec.seed = seed;
        }
        if let Some(workers) = cli_workers {
            spec.workers = workers;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Resolve the `[simulate]` section into a runnable trajectory request.
    pub fn resolve_simulate(&self, cli_seed: Option<u64>) -> Result<SimulateConfig> {
        let reservoir = self.require_reservoir()?;
        let section = self
            .simulate
            .clone()
            .ok_or_else(|| Error::Config("this command needs a [simulate] section".into()))?;
        let seed = self.master_seed(cli_seed);
        let drive = section.drive.resolve(seed)?;
        let (default_window, default_samples) = if reservoir.is_quantum() {
            (2.0, 51)
        } else {
            (0.5, 21)
        };
        let window = match (section.window, &drive) {
            (Some([a, b]), _) => (a, b),
            (None, Drive::Piecewise(p)) => (0.0, p.total_time()),
            (None, Drive::Sinusoidal(_)) => (0.0, default_window),
        };
        if !(window.1 >= window.0) {
            return Err(Error::Config(format!(
                "simulate window [{}, {}] is not ordered",
                window.0, window.1
            )));
        }
        section.integrator.validate()?;
        Ok(SimulateConfig {
            reservoir,
            drive,
            window,
            num_samples: section.num_samples.unwrap_or(default_samples),
            record_populations: section.record_populations,
            integrator: section.integrator,
            seed,
        })
    }

    /// The `[export]` section, as written.
    pub fn resolve_export(&self) -> Result<ExportSection> {
        self.export
            .clone()
            .ok_or_else(|| Error::Config("this command needs an [export] section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_quantum_signal_defaults() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"

[reservoir]
kind = "qudit"
dim = 4
kerr = -5.0
"#,
        )
        .unwrap();
        let task = cfg.resolve_signal(None).unwrap();
        assert_eq!(task.bias, 10.0);
        assert_eq!(task.window, 2.0);
        assert_eq!(task.num_samples, 51);
        assert_eq!(task.j_test, 3000);
        assert_eq!(task.gamma_grid.values().len(), 26);
        assert_eq!(task.reservoir.kerr(), -5.0);
        match task.reservoir {
            ReservoirParams::Qudit(p) => {
                assert_eq!(p.dim, 4);
                assert_eq!(p.omega, 0.0);
                assert_eq!(p.kappa, 1.0);
            }
            ReservoirParams::Classical(_) => panic!("expected qudit"),
        }
    }

    #[test]
    fn classical_defaults_differ() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"

[reservoir]
kind = "classical"
kerr = -5.0
"#,
        )
        .unwrap();
        let task = cfg.resolve_signal(None).unwrap();
        assert_eq!(task.window, 0.5);
        assert_eq!(task.num_samples, 21);

        let stmc = cfg.resolve_stmc(None).unwrap();
        assert_eq!(stmc.hold_time, 5.0);
        assert_eq!(stmc.j_train, 3000);
        assert_eq!(stmc.j_test, 4000);
        assert_eq!(stmc.samples_per_segment, 100);
        assert_eq!(stmc.k_max, 30);
        assert_eq!(stmc.gamma_grid.values().len(), 13);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"

[reservoir]
kind = "qudit"
dim = 0
kerr = -1.0
"#,
        )
        .unwrap();
        let err = cfg.resolve_signal(None).unwrap_err();
        assert!(matches!(err, Error::InvalidDimension(0)), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let err = ConfigFile::from_str(
            r#"
units = "kappa"

[reservoir]
kind = "qudit"
dim = 2
kerr = -1.0
omega_2 = 4.0
"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("omega_2"), "message should name the key: {msg}");
    }

    #[test]
    fn units_field_is_mandatory_and_checked() {
        assert!(ConfigFile::from_str("seed = 1").is_err());
        let err = ConfigFile::from_str("units = \"hertz\"").unwrap_err();
        assert!(err.to_string().contains("kappa"));
    }

    #[test]
    fn cli_seed_overrides_config() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"
seed = 5

[reservoir]
kind = "qudit"
dim = 2
kerr = -1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.resolve_signal(None).unwrap().seed, 5);
        assert_eq!(cfg.resolve_signal(Some(9)).unwrap().seed, 9);
    }

    #[test]
    fn simulate_piecewise_defaults() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"

[reservoir]
kind = "qudit"
dim = 3
kerr = -7.0

[simulate]
record_populations = true

[simulate.drive]
type = "piecewise"
hold_time = 0.5
count = 4
interval = [1.0, 10.0]
"#,
        )
        .unwrap();
        let sim = cfg.resolve_simulate(None).unwrap();
        assert_eq!(sim.window, (0.0, 2.0));
        assert!(sim.record_populations);
        match &sim.drive {
            Drive::Piecewise(p) => assert_eq!(p.len(), 4),
            Drive::Sinusoidal(_) => panic!("expected piecewise"),
        }
    }

    #[test]
    fn sweep_section_round_trips() {
        let cfg = ConfigFile::from_str(
            r#"
units = "kappa"
seed = 3

[sweep]
task = "signal"
systems = [2, 3, "classical"]
signal_frequencies = [1.0, 2.0]

[sweep.kerr]
count = 4
interval = [-0.1, -10.0]

[sweep.signal]
j_train = 2
j_test = 20
"#,
        )
        .unwrap();
        let spec = cfg.resolve_sweep(None, Some(2)).unwrap();
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.workers, 2);
        assert_eq!(spec.systems.len(), 3);
        let realizations = crate::sweep::expand_sweep(&spec).unwrap();
        assert_eq!(realizations.len(), 3 * 4 * 2);
    }
}
