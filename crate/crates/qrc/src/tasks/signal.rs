//! Multivariate signal processing: drive the reservoir with
//! u(t) = alpha sin(omega t + phi) + beta and train the readout to estimate
//! the amplitude alpha and phase phi simultaneously.
//!
//! Training uses a J x J grid of uniformly spaced (phase, amplitude) pairs;
//! testing uses random pairs from the same intervals. The reservoir is reset
//! to its ground state before every input signal.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    sample_classical_output, sample_quantum_output, Drive, IntegratorConfig, SinusoidalDrive,
    StateStats,
};
use crate::error::{Error, Result};
use crate::linalg::linspace;
use crate::qudit::DensityMatrix;
use crate::readout::{predict_all, FeatureMatrix, RidgeFactorization, TargetMatrix, WeightMatrix};
use crate::seeds::stream_rng;
use crate::tasks::{gamma_sweep, Direction, GammaGrid, ReservoirParams};

/// Fully resolved configuration of one signal-processing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTaskConfig {
    pub reservoir: ReservoirParams,
    /// Signal frequency omega (kappa units).
    pub signal_frequency: f64,
    /// Static bias beta added to the sinusoid.
    pub bias: f64,
    /// Training grid size per axis; the training set has j_train^2 elements.
    pub j_train: usize,
    /// Number of random test pairs.
    pub j_test: usize,
    pub phase_interval: [f64; 2],
    pub amplitude_interval: [f64; 2],
    /// Total sampling time T_f.
    pub window: f64,
    /// Number of output samples T across the window.
    pub num_samples: usize,
    pub gamma_grid: GammaGrid,
    pub seed: u64,
    pub integrator: IntegratorConfig,
}

impl SignalTaskConfig {
    /// Benchmark defaults for the given reservoir: beta = 10, omega = 6,
    /// phases in [0, pi/2], amplitudes in [1, 10], J_test = 3000, and the
    /// sampling windows 2/kappa x 51 (quantum) or 0.5/kappa x 21 (classical).
    pub fn new(reservoir: ReservoirParams) -> Self {
        let (window, num_samples) = if reservoir.is_quantum() {
            (2.0, 51)
        } else {
            (0.5, 21)
        };
        Self {
            reservoir,
            signal_frequency: 6.0,
            bias: 10.0,
            j_train: 10,
            j_test: 3000,
            phase_interval: [0.0, std::f64::consts::FRAC_PI_2],
            amplitude_interval: [1.0, 10.0],
            window,
            num_samples,
            gamma_grid: GammaGrid::signed(),
            seed: 0,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        self.gamma_grid.validate()?;
        self.integrator.validate()?;
        if self.j_train < 1 || self.j_test < 1 {
            return Err(Error::InvalidParameter(format!(
                "j_train and j_test must be at least 1, got {} and {}",
                self.j_train, self.j_test
            )));
        }
        if self.phase_interval[0] > self.phase_interval[1]
            || self.amplitude_interval[0] > self.amplitude_interval[1]
        {
            return Err(Error::InvalidParameter(
                "phase and amplitude intervals must be ordered".into(),
            ));
        }
        if !(self.window > 0.0) || self.num_samples < 1 {
            return Err(Error::InvalidParameter(format!(
                "sampling window {} and sample count {} must be positive",
                self.window, self.num_samples
            )));
        }
        if !(self.signal_frequency.is_finite() && self.bias.is_finite()) {
            return Err(Error::InvalidParameter(
                "signal frequency and bias must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Metrics of one signal-processing run.
///
/// The best gamma is chosen per output (amplitude and phase may prefer
/// different regularization); the single-gamma compromise that minimizes the
/// summed RMSE is recorded alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTaskResult {
    pub config: SignalTaskConfig,
    pub amplitude_rmse: f64,
    pub phase_rmse: f64,
    pub best_gamma_amplitude: f64,
    pub best_gamma_phase: f64,
    pub shared_gamma: f64,
    pub amplitude_rmse_shared: f64,
    pub phase_rmse_shared: f64,
    pub state_stats: Option<StateStats>,
    /// Wall-clock seconds; excluded from serialized exports so identical
    /// runs produce identical files.
    #[serde(skip, default)]
    pub wall_time_s: f64,
}

/// Endpoint-inclusive Cartesian grid of (amplitude, phase) training pairs.
///
/// `j_train = 1` degenerates to the lower endpoints.
pub fn build_signal_training_grid(
    j_train: usize,
    phase_interval: [f64; 2],
    amplitude_interval: [f64; 2],
) -> Vec<(f64, f64)> {
    let amplitudes = linspace(amplitude_interval[0], amplitude_interval[1], j_train);
    let phases = linspace(phase_interval[0], phase_interval[1], j_train);
    let mut grid = Vec::with_capacity(j_train * j_train);
    for &alpha in &amplitudes {
        for &phi in &phases {
            grid.push((alpha, phi));
        }
    }
    grid
}

/// Random test pairs drawn uniformly from the task intervals, identical for
/// every reservoir realization under the same master seed.
pub fn draw_signal_test_pairs(
    j_test: usize,
    phase_interval: [f64; 2],
    amplitude_interval: [f64; 2],
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = stream_rng(seed, "signal-test");
    (0..j_test)
        .map(|_| {
            let alpha = rng.gen_range(amplitude_interval[0]..=amplitude_interval[1]);
            let phi = rng.gen_range(phase_interval[0]..=phase_interval[1]);
            (alpha, phi)
        })
        .collect()
}

/// Simulate the reservoir response to each (amplitude, phase) pair from the
/// ground state and stack the sample vectors as feature columns.
pub fn simulate_signal_features(
    cfg: &SignalTaskConfig,
    pairs: &[(f64, f64)],
) -> Result<(FeatureMatrix, Option<StateStats>)> {
    let columns: Vec<Result<(Vec<f64>, Option<StateStats>)>> = pairs
        .par_iter()
        .map(|&(alpha, phi)| {
            let drive = Drive::Sinusoidal(SinusoidalDrive::new(
                alpha,
                cfg.signal_frequency,
                phi,
                cfg.bias,
            )?);
            match &cfg.reservoir {
                ReservoirParams::Qudit(p) => {
                    let rho0 = DensityMatrix::ground_state(p.dim)?;
                    let traj = sample_quantum_output(
                        p,
                        &drive,
                        &rho0,
                        (0.0, cfg.window),
                        cfg.num_samples,
                        &cfg.integrator,
                    )?;
                    Ok((traj.samples, traj.stats))
                }
                ReservoirParams::Classical(p) => {
                    let traj = sample_classical_output(
                        p,
                        &drive,
                        Complex64::new(0.0, 0.0),
                        (0.0, cfg.window),
                        cfg.num_samples,
                        &cfg.integrator,
                    )?;
                    Ok((traj.samples, traj.stats))
                }
            }
        })
        .collect();

    let mut stats: Option<StateStats> = None;
    let mut sample_columns = Vec::with_capacity(pairs.len());
    for col in columns {
        let (samples, traj_stats) = col?;
        if let Some(s) = traj_stats {
            match stats.as_mut() {
                Some(acc) => acc.merge(&s),
                None => stats = Some(s),
            }
        }
        sample_columns.push(samples);
    }
    Ok((FeatureMatrix::from_columns(&sample_columns)?, stats))
}

fn targets_from_pairs(pairs: &[(f64, f64)]) -> Result<TargetMatrix> {
    let mut y = ndarray::Array2::zeros((2, pairs.len()));
    for (j, &(alpha, phi)) in pairs.iter().enumerate() {
        y[[0, j]] = alpha;
        y[[1, j]] = phi;
    }
    TargetMatrix::new(y)
}

fn rmse_of_row(
    predictions: &ndarray::Array2<f64>,
    pairs: &[(f64, f64)],
    row: usize,
) -> Result<f64> {
    let actual: Vec<f64> = pairs
        .iter()
        .map(|&(alpha, phi)| if row == 0 { alpha } else { phi })
        .collect();
    let estimated: Vec<f64> = predictions.row(row).to_vec();
    crate::readout::rmse(&estimated, &actual)
}

/// Run the full signal-processing benchmark for one reservoir realization.
pub fn run_signal_task(cfg: &SignalTaskConfig) -> Result<SignalTaskResult> {
    cfg.validate()?;
    let started = std::time::Instant::now();

    let train_pairs =
        build_signal_training_grid(cfg.j_train, cfg.phase_interval, cfg.amplitude_interval);
    let test_pairs = draw_signal_test_pairs(
        cfg.j_test,
        cfg.phase_interval,
        cfg.amplitude_interval,
        cfg.seed,
    );

    let (s_train, train_stats) = simulate_signal_features(cfg, &train_pairs)?;
    let (s_test, test_stats) = simulate_signal_features(cfg, &test_pairs)?;
    let y_train = targets_from_pairs(&train_pairs)?;

    let mut stats = train_stats;
    if let Some(s) = test_stats {
        match stats.as_mut() {
            Some(acc) => acc.merge(&s),
            None => stats = Some(s),
        }
    }

    let factorization = RidgeFactorization::new(&s_train, &y_train)?;
    let grid = cfg.gamma_grid.values();

    // One evaluation per gamma; each sweep below selects over these.
    let evaluate = |gamma: f64| -> Result<(f64, f64, WeightMatrix)> {
        let w = factorization.solve(gamma)?;
        let predictions = predict_all(&w, &s_test)?;
        let amp = rmse_of_row(&predictions, &test_pairs, 0)?;
        let phase = rmse_of_row(&predictions, &test_pairs, 1)?;
        Ok((amp, phase, w))
    };

    let best_amp = gamma_sweep(
        &grid,
        |g| evaluate(g).map(|(amp, _, w)| (amp, w)),
        Direction::Minimize,
    )?;
    let best_phase = gamma_sweep(
        &grid,
        |g| evaluate(g).map(|(_, phase, w)| (phase, w)),
        Direction::Minimize,
    )?;
    let best_shared = gamma_sweep(
        &grid,
        |g| evaluate(g).map(|(amp, phase, _)| (amp + phase, (amp, phase))),
        Direction::Minimize,
    )?;

    let result = SignalTaskResult {
        config: cfg.clone(),
        amplitude_rmse: best_amp.metric,
        phase_rmse: best_phase.metric,
        best_gamma_amplitude: best_amp.gamma,
        best_gamma_phase: best_phase.gamma,
        shared_gamma: best_shared.gamma,
        amplitude_rmse_shared: best_shared.payload.0,
        phase_rmse_shared: best_shared.payload.1,
        state_stats: stats,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    if !(result.amplitude_rmse.is_finite() && result.phase_rmse.is_finite()) {
        return Err(Error::TaskFailure(
            "signal task produced non-finite metrics".into(),
        ));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn training_grid_examples() {
        let g = build_signal_training_grid(2, [0.0, FRAC_PI_2], [1.0, 10.0]);
        assert_eq!(g.len(), 4);
        assert!(g.contains(&(1.0, 0.0)));
        assert!(g.contains(&(1.0, FRAC_PI_2)));
        assert!(g.contains(&(10.0, 0.0)));
        assert!(g.contains(&(10.0, FRAC_PI_2)));

        let g = build_signal_training_grid(1, [0.0, FRAC_PI_2], [1.0, 10.0]);
        assert_eq!(g, vec![(1.0, 0.0)]);

        let g = build_signal_training_grid(3, [0.0, FRAC_PI_2], [1.0, 10.0]);
        let alphas: Vec<f64> = g.iter().map(|p| p.0).collect();
        assert!(alphas.contains(&5.5));
    }

    #[test]
    fn test_pairs_are_seeded_and_in_range() {
        let a = draw_signal_test_pairs(100, [0.0, FRAC_PI_2], [1.0, 10.0], 7);
        let b = draw_signal_test_pairs(100, [0.0, FRAC_PI_2], [1.0, 10.0], 7);
        assert_eq!(a, b);
        let c = draw_signal_test_pairs(100, [0.0, FRAC_PI_2], [1.0, 10.0], 8);
        assert_ne!(a, c);
        for &(alpha, phi) in &a {
            assert!((1.0..=10.0).contains(&alpha));
            assert!((0.0..=FRAC_PI_2).contains(&phi));
        }
    }

    #[test]
    fn features_start_from_ground_state() {
        // First sample of every trajectory is <X> of the ground state = 0,
        // for both reservoir kinds.
        let mut cfg = SignalTaskConfig::new(ReservoirParams::qudit(2, 0.0, -1.0).unwrap());
        cfg.num_samples = 5;
        cfg.window = 0.2;
        let pairs = [(1.0, 0.0), (4.0, 0.3)];
        let (features, _) = simulate_signal_features(&cfg, &pairs).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(features.as_array()[[0, j]], 0.0, epsilon = 1e-12);
        }

        let mut cfg = SignalTaskConfig::new(ReservoirParams::classical(0.0, -1.0).unwrap());
        cfg.num_samples = 5;
        cfg.window = 0.2;
        let (features, _) = simulate_signal_features(&cfg, &pairs).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(features.as_array()[[0, j]], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_regime_reproduces_labels() {
        // gamma = 0, M <= NT, full column rank: training pairs evaluated as
        // test pairs come back as their own labels.
        let mut cfg = SignalTaskConfig::new(ReservoirParams::qudit(2, 0.0, -2.0).unwrap());
        cfg.j_train = 2;
        cfg.num_samples = 21;
        cfg.window = 1.0;
        let pairs = build_signal_training_grid(cfg.j_train, cfg.phase_interval, cfg.amplitude_interval);
        let (s, _) = simulate_signal_features(&cfg, &pairs).unwrap();
        let y = targets_from_pairs(&pairs).unwrap();
        let w = crate::readout::ridge_train(&s, &y, 0.0).unwrap();
        let predictions = predict_all(&w, &s).unwrap();
        for (j, &(alpha, phi)) in pairs.iter().enumerate() {
            assert_abs_diff_eq!(predictions[[0, j]], alpha, epsilon = 1e-6);
            assert_abs_diff_eq!(predictions[[1, j]], phi, epsilon = 1e-6);
        }
    }

    #[test]
    fn desk_scale_signal_task_runs() {
        let mut cfg = SignalTaskConfig::new(ReservoirParams::qudit(2, 0.0, -3.0).unwrap());
        cfg.j_train = 2;
        cfg.j_test = 12;
        cfg.num_samples = 15;
        cfg.window = 1.0;
        let result = run_signal_task(&cfg).unwrap();
        assert!(result.amplitude_rmse.is_finite() && result.amplitude_rmse >= 0.0);
        assert!(result.phase_rmse.is_finite() && result.phase_rmse >= 0.0);
        assert!(result.amplitude_rmse <= result.amplitude_rmse_shared + 1e-12);
        assert!(result.phase_rmse <= result.phase_rmse_shared + 1e-12);
        let stats = result.state_stats.unwrap();
        assert!(stats.max_trace_dev < 1e-9);
        // Estimating from a 2-point grid beats the trivial midpoint guess
        // rarely; just confirm the pipeline produced usable magnitudes.
        assert!(result.amplitude_rmse < 10.0);
    }

    #[test]
    fn identical_seeds_reproduce_results() {
        let mut cfg = SignalTaskConfig::new(ReservoirParams::classical(0.0, -2.0).unwrap());
        cfg.j_train = 2;
        cfg.j_test = 10;
        cfg.num_samples = 9;
        cfg.window = 0.5;
        let a = run_signal_task(&cfg).unwrap();
        let b = run_signal_task(&cfg).unwrap();
        assert_eq!(a.amplitude_rmse.to_bits(), b.amplitude_rmse.to_bits());
        assert_eq!(a.phase_rmse.to_bits(), b.phase_rmse.to_bits());
    }
}
