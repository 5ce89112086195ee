//! Short-term memory capacity: drive the reservoir with a continuous
//! piecewise-constant random signal, then train one readout per delay k to
//! recall the input from k hold times earlier. STMC is the sum of the
//! k-delay coefficients of determination.
//!
//! The whole input of length J = J_train + J_test is a single uninterrupted
//! evolution from the ground state; the first J_train segments feed training,
//! the remainder testing.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    sample_classical_output, sample_quantum_output, Drive, FinalState, IntegratorConfig,
    PiecewiseDrive, StateStats,
};
use crate::error::{Error, Result};
use crate::qudit::DensityMatrix;
use crate::readout::{k_delay_r2, predict_all, stmc, FeatureMatrix, RidgeFactorization, TargetMatrix};
use crate::seeds::stream_rng;
use crate::tasks::{gamma_sweep, Direction, GammaGrid, ReservoirParams};

/// Fully resolved configuration of one memory-capacity run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmcTaskConfig {
    pub reservoir: ReservoirParams,
    /// Hold time of each input amplitude.
    pub hold_time: f64,
    /// Interval the random amplitudes are drawn from.
    pub amplitude_interval: [f64; 2],
    pub j_train: usize,
    pub j_test: usize,
    /// Output samples per hold interval.
    pub samples_per_segment: usize,
    /// Largest delay in the capacity sum.
    pub k_max: usize,
    pub gamma_grid: GammaGrid,
    pub seed: u64,
    pub integrator: IntegratorConfig,
}

impl StmcTaskConfig {
    /// Benchmark defaults: amplitudes in [1, 10], J_train = 3000,
    /// J_test = 4000, T = 100 samples per segment, k_max = 30, positive
    /// gamma grid, and the best-case hold time for the reservoir kind
    /// (0.5/kappa for the qudit, 5/kappa for the classical oscillator).
    pub fn new(reservoir: ReservoirParams) -> Self {
        let hold_time = if reservoir.is_quantum() { 0.5 } else { 5.0 };
        Self {
            reservoir,
            hold_time,
            amplitude_interval: [1.0, 10.0],
            j_train: 3000,
            j_test: 4000,
            samples_per_segment: 100,
            k_max: 30,
            gamma_grid: GammaGrid::positive(),
            seed: 0,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn total_inputs(&self) -> usize {
        self.j_train + self.j_test
    }

    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        self.gamma_grid.validate()?;
        self.integrator.validate()?;
        if self.j_train < 1 || self.j_test < 2 {
            return Err(Error::InvalidParameter(format!(
                "j_train must be >= 1 and j_test >= 2, got {} and {}",
                self.j_train, self.j_test
            )));
        }
        if !(self.hold_time > 0.0 && self.hold_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hold time must be positive, got {}",
                self.hold_time
            )));
        }
        if self.amplitude_interval[0] > self.amplitude_interval[1] {
            return Err(Error::InvalidParameter(
                "amplitude interval must be ordered".into(),
            ));
        }
        if self.samples_per_segment < 1 || self.k_max < 1 {
            return Err(Error::InvalidParameter(format!(
                "samples_per_segment {} and k_max {} must be at least 1",
                self.samples_per_segment, self.k_max
            )));
        }
        Ok(())
    }
}

/// Metrics of one memory-capacity run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StmcTaskResult {
    pub config: StmcTaskConfig,
    /// r^2_k for k = 1..k_max.
    pub r2_curve: Vec<f64>,
    pub stmc: f64,
    /// Winning gamma per delay; None where no training pairs existed.
    pub best_gammas: Vec<Option<f64>>,
    pub state_stats: Option<StateStats>,
    /// Wall-clock seconds; excluded from serialized exports.
    #[serde(skip, default)]
    pub wall_time_s: f64,
}

/// J amplitudes drawn i.i.d. uniform from the interval, packaged as a
/// piecewise-constant drive. Deterministic in (seed, J).
pub fn generate_piecewise_input(
    j: usize,
    interval: [f64; 2],
    hold_time: f64,
    seed: u64,
) -> Result<PiecewiseDrive> {
    if j < 1 {
        return Err(Error::InvalidParameter(
            "piecewise input needs at least one segment".into(),
        ));
    }
    let mut rng = stream_rng(seed, "stmc-input");
    let amplitudes: Vec<f64> = (0..j)
        .map(|_| rng.gen_range(interval[0]..=interval[1]))
        .collect();
    PiecewiseDrive::new(amplitudes, hold_time, interval, seed)
}

/// Evolve the reservoir once over the whole input and collect the per-segment
/// sample vectors: column j holds T samples from [j dt, (j+1) dt].
pub fn evolve_stmc_features(
    cfg: &StmcTaskConfig,
    drive: &PiecewiseDrive,
) -> Result<(Vec<Vec<f64>>, Option<StateStats>)> {
    let j_total = drive.len();
    let dt = drive.hold_time;
    let wrapped = Drive::Piecewise(drive.clone());
    let mut features = Vec::with_capacity(j_total);
    match &cfg.reservoir {
        ReservoirParams::Qudit(p) => {
            let mut state = DensityMatrix::ground_state(p.dim)?;
            let mut stats: Option<StateStats> = None;
            for j in 0..j_total {
                let window = (j as f64 * dt, (j + 1) as f64 * dt);
                let traj = sample_quantum_output(
                    p,
                    &wrapped,
                    &state,
                    window,
                    cfg.samples_per_segment,
                    &cfg.integrator,
                )?;
                features.push(traj.samples);
                if let Some(s) = traj.stats {
                    match stats.as_mut() {
                        Some(acc) => acc.merge(&s),
                        None => stats = Some(s),
                    }
                }
                state = match traj.final_state {
                    FinalState::Quantum(rho) => rho,
                    FinalState::Classical(_) => unreachable!(),
                };
            }
            Ok((features, stats))
        }
        ReservoirParams::Classical(p) => {
            let mut a = Complex64::new(0.0, 0.0);
            for j in 0..j_total {
                let window = (j as f64 * dt, (j + 1) as f64 * dt);
                let traj = sample_classical_output(
                    p,
                    &wrapped,
                    a,
                    window,
                    cfg.samples_per_segment,
                    &cfg.integrator,
                )?;
                features.push(traj.samples);
                a = match traj.final_state {
                    FinalState::Classical(a) => a,
                    FinalState::Quantum(_) => unreachable!(),
                };
            }
            Ok((features, None))
        }
    }
}

/// Train one readout per delay on precomputed per-segment features and score
/// it on the test region. Exposed separately so the index bookkeeping can be
/// tested against synthetic reservoirs.
pub fn train_delays(
    features: &[Vec<f64>],
    amplitudes: &[f64],
    j_train: usize,
    k_max: usize,
    gamma_grid: &GammaGrid,
) -> Result<(Vec<f64>, Vec<Option<f64>>)> {
    if features.len() != amplitudes.len() {
        return Err(Error::DimensionMismatch {
            expected: amplitudes.len(),
            actual: features.len(),
        });
    }
    let j_total = features.len();
    if j_train >= j_total {
        return Err(Error::InvalidParameter(format!(
            "j_train {j_train} leaves no test segments out of {j_total}"
        )));
    }
    let grid = gamma_grid.values();

    let per_delay: Vec<Result<(f64, Option<f64>)>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            // Training pairs (s_j, alpha_{j-k}) need j - k >= 0 inside the
            // training region; with no usable pairs the delay scores 0.
            if k >= j_train {
                return Ok((0.0, None));
            }
            let train_cols: Vec<Vec<f64>> =
                (k..j_train).map(|j| features[j].clone()).collect();
            let train_targets: Vec<f64> = (k..j_train).map(|j| amplitudes[j - k]).collect();
            let test_start = j_train.max(k);
            let test_cols: Vec<Vec<f64>> =
                (test_start..j_total).map(|j| features[j].clone()).collect();
            let test_targets: Vec<f64> =
                (test_start..j_total).map(|j| amplitudes[j - k]).collect();
            if test_targets.len() < 2 {
                return Ok((0.0, None));
            }

            let s_train = FeatureMatrix::from_columns(&train_cols)?;
            let y_train = TargetMatrix::from_row(&train_targets)?;
            let s_test = FeatureMatrix::from_columns(&test_cols)?;
            let factorization = RidgeFactorization::new(&s_train, &y_train)?;

            let choice = gamma_sweep(
                &grid,
                |gamma| {
                    let w = factorization.solve(gamma)?;
                    let predictions = predict_all(&w, &s_test)?;
                    let r2 = k_delay_r2(&test_targets, &predictions.row(0).to_vec())?;
                    Ok((r2, ()))
                },
                Direction::Maximize,
            )?;
            Ok((choice.metric, Some(choice.gamma)))
        })
        .collect();

    let mut r2_curve = Vec::with_capacity(k_max);
    let mut best_gammas = Vec::with_capacity(k_max);
    for item in per_delay {
        let (r2, gamma) = item?;
        r2_curve.push(r2);
        best_gammas.push(gamma);
    }
    Ok((r2_curve, best_gammas))
}

/// Run the full memory-capacity benchmark for one reservoir realization.
pub fn run_stmc_task(cfg: &StmcTaskConfig) -> Result<StmcTaskResult> {
    cfg.validate()?;
    let started = std::time::Instant::now();

    let drive = generate_piecewise_input(
        cfg.total_inputs(),
        cfg.amplitude_interval,
        cfg.hold_time,
        cfg.seed,
    )?;
    let (features, stats) = evolve_stmc_features(cfg, &drive)?;
    let (r2_curve, best_gammas) = train_delays(
        &features,
        &drive.amplitudes,
        cfg.j_train,
        cfg.k_max,
        &cfg.gamma_grid,
    )?;
    let capacity = stmc(&r2_curve)?;
    if !capacity.is_finite() {
        return Err(Error::TaskFailure("stmc produced a non-finite sum".into()));
    }

    Ok(StmcTaskResult {
        config: cfg.clone(),
        r2_curve,
        stmc: capacity,
        best_gammas,
        state_stats: stats,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn piecewise_input_examples() {
        // Degenerate interval: every amplitude equals the endpoint.
        let d = generate_piecewise_input(10, [5.0, 5.0], 1.0, 3).unwrap();
        assert!(d.amplitudes.iter().all(|&a| a == 5.0));

        // Same seed twice: identical sequences.
        let a = generate_piecewise_input(50, [1.0, 10.0], 0.5, 9).unwrap();
        let b = generate_piecewise_input(50, [1.0, 10.0], 0.5, 9).unwrap();
        assert_eq!(a.amplitudes, b.amplitudes);

        // Law of large numbers: sample mean near the interval midpoint.
        let big = generate_piecewise_input(10_000, [1.0, 10.0], 0.5, 11).unwrap();
        let mean = big.amplitudes.iter().sum::<f64>() / big.amplitudes.len() as f64;
        assert!((mean - 5.5).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn label_alignment_passthrough() {
        // Synthetic reservoir whose output at segment j equals the input of
        // segment j - k0: delay k0 must score r^2 = 1, others near 0.
        let k0 = 3usize;
        let j_total = 400usize;
        let j_train = 200usize;
        let drive = generate_piecewise_input(j_total, [1.0, 10.0], 1.0, 21).unwrap();
        let features: Vec<Vec<f64>> = (0..j_total)
            .map(|j| {
                let v = if j >= k0 { drive.amplitudes[j - k0] } else { 0.0 };
                vec![v]
            })
            .collect();
        let (r2, gammas) = train_delays(
            &features,
            &drive.amplitudes,
            j_train,
            6,
            &GammaGrid::positive(),
        )
        .unwrap();
        assert!(r2[k0 - 1] > 0.999, "r2 at k0: {}", r2[k0 - 1]);
        for (k, &v) in r2.iter().enumerate() {
            if k + 1 != k0 {
                assert!(v < 0.2, "r2 at k={} should be near zero, got {v}", k + 1);
            }
        }
        assert!(gammas[k0 - 1].is_some());
    }

    #[test]
    fn delays_beyond_history_are_zero() {
        // j_train = 2 leaves no training pairs for k >= 2.
        let drive = generate_piecewise_input(40, [1.0, 10.0], 1.0, 5).unwrap();
        let features: Vec<Vec<f64>> = drive.amplitudes.iter().map(|&a| vec![a]).collect();
        let (r2, gammas) =
            train_delays(&features, &drive.amplitudes, 2, 4, &GammaGrid::positive()).unwrap();
        for k in 2..=4 {
            assert_eq!(r2[k - 1], 0.0);
            assert!(gammas[k - 1].is_none());
        }
    }

    #[test]
    fn segment_windows_chain_continuously() {
        // The feature columns must come from one continuous evolution: the
        // last sample of segment j equals the first sample of segment j+1
        // (both are s at the shared boundary time).
        let mut cfg = StmcTaskConfig::new(ReservoirParams::qudit(3, 1.0, -5.0).unwrap());
        cfg.j_train = 2;
        cfg.j_test = 3;
        cfg.samples_per_segment = 7;
        cfg.k_max = 2;
        let drive = generate_piecewise_input(
            cfg.total_inputs(),
            cfg.amplitude_interval,
            cfg.hold_time,
            cfg.seed,
        )
        .unwrap();
        let (features, stats) = evolve_stmc_features(&cfg, &drive).unwrap();
        assert_eq!(features.len(), 5);
        for pair in features.windows(2) {
            let last = *pair[0].last().unwrap();
            let first = pair[1][0];
            assert_abs_diff_eq!(last, first, epsilon = 1e-12);
        }
        let stats = stats.unwrap();
        assert!(stats.max_trace_dev < 1e-9);
        assert!(stats.min_eigenvalue > -1e-8);
    }

    #[test]
    fn desk_scale_stmc_runs() {
        let mut cfg = StmcTaskConfig::new(ReservoirParams::qudit(2, 1.0, -10.0).unwrap());
        cfg.j_train = 30;
        cfg.j_test = 30;
        cfg.samples_per_segment = 10;
        cfg.k_max = 3;
        let result = run_stmc_task(&cfg).unwrap();
        assert_eq!(result.r2_curve.len(), 3);
        assert!(result.stmc >= 0.0 && result.stmc <= 3.0);
        // A driven lossy reservoir holds at least some memory of the last input.
        assert!(result.r2_curve[0] > 0.05, "r2_1 = {}", result.r2_curve[0]);
    }
}
