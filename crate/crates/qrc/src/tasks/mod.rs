//! End-to-end benchmark runners: multivariate signal processing and
//! short-term memory capacity, plus the ridge-parameter sweep both share.

pub mod signal;
pub mod stmc;

use serde::{Deserialize, Serialize};

use crate::dynamics::ClassicalParams;
use crate::error::{Error, Result};
use crate::qudit::QuantumParams;

pub use signal::{
    build_signal_training_grid, run_signal_task, SignalTaskConfig, SignalTaskResult,
};
pub use stmc::{generate_piecewise_input, run_stmc_task, StmcTaskConfig, StmcTaskResult};

/// Which reservoir model a task drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReservoirParams {
    Qudit(QuantumParams),
    Classical(ClassicalParams),
}

impl ReservoirParams {
    pub fn qudit(dim: usize, omega: f64, kerr: f64) -> Result<Self> {
        Ok(ReservoirParams::Qudit(QuantumParams::new(dim, omega, kerr)?))
    }

    pub fn classical(omega: f64, kerr: f64) -> Result<Self> {
        Ok(ReservoirParams::Classical(ClassicalParams::new(omega, kerr)?))
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, ReservoirParams::Qudit(_))
    }

    /// Short identifier used in tables and file names, e.g. "d4" or "classical".
    pub fn label(&self) -> String {
        match self {
            ReservoirParams::Qudit(p) => format!("d{}", p.dim),
            ReservoirParams::Classical(_) => "classical".to_string(),
        }
    }

    pub fn kerr(&self) -> f64 {
        match self {
            ReservoirParams::Qudit(p) => p.kerr,
            ReservoirParams::Classical(p) => p.kerr,
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            ReservoirParams::Qudit(p) => p.omega,
            ReservoirParams::Classical(p) => p.omega,
        }
    }

    pub fn with_kerr(mut self, kerr: f64) -> Self {
        match &mut self {
            ReservoirParams::Qudit(p) => p.kerr = kerr,
            ReservoirParams::Classical(p) => p.kerr = kerr,
        }
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        match &mut self {
            ReservoirParams::Qudit(p) => p.omega = omega,
            ReservoirParams::Classical(p) => p.omega = omega,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReservoirParams::Qudit(p) => {
                QuantumParams::with_kappa(p.dim, p.omega, p.kerr, p.kappa).map(|_| ())
            }
            ReservoirParams::Classical(p) => {
                ClassicalParams::with_kappa(p.omega, p.kerr, p.kappa).map(|_| ())
            }
        }
    }
}

/// Ridge-parameter grid gamma = ±10^p for integer p in [p_min, p_max].
///
/// The signal task sweeps both signs; the memory-capacity task uses the
/// positive branch only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaGrid {
    pub p_min: i32,
    pub p_max: i32,
    pub include_negative: bool,
}

impl Default for GammaGrid {
    fn default() -> Self {
        Self::signed()
    }
}

impl GammaGrid {
    /// ±10^p, p = -12..0: the 26-value signal-task grid.
    pub fn signed() -> Self {
        Self {
            p_min: -12,
            p_max: 0,
            include_negative: true,
        }
    }

    /// +10^p, p = -12..0: the 13-value memory-capacity grid.
    pub fn positive() -> Self {
        Self {
            p_min: -12,
            p_max: 0,
            include_negative: false,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in self.p_min..=self.p_max {
            out.push(10f64.powi(p));
        }
        if self.include_negative {
            for p in self.p_min..=self.p_max {
                out.push(-(10f64.powi(p)));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_min > self.p_max {
            return Err(Error::InvalidParameter(format!(
                "gamma grid exponents out of order: {} > {}",
                self.p_min, self.p_max
            )));
        }
        Ok(())
    }
}

/// Whether a swept metric is minimized (RMSE) or maximized (r², STMC).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Outcome of a ridge-parameter sweep.
#[derive(Debug, Clone)]
pub struct GammaChoice<T> {
    pub gamma: f64,
    pub metric: f64,
    pub payload: T,
}

/// True when `(gamma, metric)` beats the incumbent under `direction`, with
/// deterministic tie-breaks: smaller |gamma| first, then the positive sign.
fn improves(metric: f64, gamma: f64, best_metric: f64, best_gamma: f64, direction: Direction) -> bool {
    let better = match direction {
        Direction::Minimize => metric < best_metric,
        Direction::Maximize => metric > best_metric,
    };
    if better {
        return true;
    }
    if metric == best_metric {
        if gamma.abs() < best_gamma.abs() {
            return true;
        }
        if gamma.abs() == best_gamma.abs() && gamma > best_gamma {
            return true;
        }
    }
    false
}

/// Evaluate every gamma in the grid with `train_and_score`, skip values whose
/// ridge solve fails as singular, and return the grid's optimum.
///
/// `train_and_score` returns the test metric together with whatever payload
/// the caller wants back for the winning gamma (typically the weights).
pub fn gamma_sweep<T>(
    grid: &[f64],
    mut train_and_score: impl FnMut(f64) -> Result<(f64, T)>,
    direction: Direction,
) -> Result<GammaChoice<T>> {
    if grid.is_empty() {
        return Err(Error::TaskFailure("empty gamma grid".into()));
    }
    let mut best: Option<GammaChoice<T>> = None;
    let mut failures = 0usize;
    for &gamma in grid {
        match train_and_score(gamma) {
            Ok((metric, payload)) => {
                if !metric.is_finite() {
                    failures += 1;
                    continue;
                }
                let take = match &best {
                    None => true,
                    Some(b) => improves(metric, gamma, b.metric, b.gamma, direction),
                };
                if take {
                    best = Some(GammaChoice {
                        gamma,
                        metric,
                        payload,
                    });
                }
            }
            Err(Error::SingularSystem { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| {
        Error::TaskFailure(format!(
            "all {failures} gamma values failed the ridge solve"
        ))
    })
}

/// Task outcomes, tagged by benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskResult {
    Signal(SignalTaskResult),
    Stmc(StmcTaskResult),
}

impl TaskResult {
    pub fn as_signal(&self) -> Option<&SignalTaskResult> {
        match self {
            TaskResult::Signal(r) => Some(r),
            TaskResult::Stmc(_) => None,
        }
    }

    pub fn as_stmc(&self) -> Option<&StmcTaskResult> {
        match self {
            TaskResult::Signal(_) => None,
            TaskResult::Stmc(r) => Some(r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_grid_sizes() {
        assert_eq!(GammaGrid::signed().values().len(), 26);
        assert_eq!(GammaGrid::positive().values().len(), 13);
        let vals = GammaGrid::positive().values();
        assert_eq!(vals[0], 1e-12);
        assert_eq!(*vals.last().unwrap(), 1.0);
    }

    #[test]
    fn gamma_sweep_single_value() {
        let got = gamma_sweep(&[0.5], |g| Ok((g * 2.0, ())), Direction::Minimize).unwrap();
        assert_eq!(got.gamma, 0.5);
        assert_eq!(got.metric, 1.0);
    }

    #[test]
    fn gamma_sweep_tie_breaks() {
        // Equal metric everywhere: smallest |gamma| wins, positive over negative.
        let grid = [1.0, -1.0, 0.1, -0.1];
        let got = gamma_sweep(&grid, |_| Ok((7.0, ())), Direction::Minimize).unwrap();
        assert_eq!(got.gamma, 0.1);

        let grid = [-0.1, 0.1];
        let got = gamma_sweep(&grid, |_| Ok((7.0, ())), Direction::Maximize).unwrap();
        assert_eq!(got.gamma, 0.1);
    }

    #[test]
    fn gamma_sweep_skips_singular() {
        let grid = [1.0, 2.0, 3.0];
        let got = gamma_sweep(
            &grid,
            |g| {
                if g < 2.5 {
                    Err(Error::SingularSystem { cond: 1e20 })
                } else {
                    Ok((g, ()))
                }
            },
            Direction::Minimize,
        )
        .unwrap();
        assert_eq!(got.gamma, 3.0);

        let all_fail = gamma_sweep(
            &grid,
            |_| Err::<(f64, ()), _>(Error::SingularSystem { cond: 1e20 }),
            Direction::Minimize,
        );
        assert!(matches!(all_fail, Err(Error::TaskFailure(_))));
    }

    #[test]
    fn reservoir_labels() {
        let q = ReservoirParams::qudit(4, 0.0, -5.0).unwrap();
        assert_eq!(q.label(), "d4");
        let c = ReservoirParams::classical(0.0, -5.0).unwrap();
        assert_eq!(c.label(), "classical");
        assert_eq!(q.with_kerr(-7.0).kerr(), -7.0);
        assert_eq!(c.with_omega(1.5).omega(), 1.5);
    }
}
