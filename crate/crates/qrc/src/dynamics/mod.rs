//! Time evolution of the two reservoir models: Lindblad dynamics for the
//! qudit and the Duffing equation of motion for the classical oscillator,
//! plus trajectory sampling into raw output vectors.
//!
//! Piecewise-constant drives are integrated segment by segment so that the
//! amplitude jumps never sit inside an adaptive step.

pub mod drive;
pub mod integrator;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigvals, linspace};
use crate::qudit::{
    build_hamiltonian, dissipator, expectation_x_raw, fock_populations_raw, hermiticity_residual,
    lowering_operator, trace, DensityMatrix, QuantumParams,
};
pub use drive::{Drive, PiecewiseDrive, SinusoidalDrive};
pub use integrator::{integrate, integrate_observe, IntegratorConfig, OdeState};

/// Physical parameters of the classical Duffing reservoir, in kappa units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalParams {
    #[serde(default)]
    pub omega: f64,
    pub kerr: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    1.0
}

impl ClassicalParams {
    pub fn new(omega: f64, kerr: f64) -> Result<Self> {
        Self::with_kappa(omega, kerr, 1.0)
    }

    pub fn with_kappa(omega: f64, kerr: f64, kappa: f64) -> Result<Self> {
        if !(omega.is_finite() && kerr.is_finite() && kappa.is_finite()) {
            return Err(Error::InvalidParameter(
                "classical parameters must be finite".into(),
            ));
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self { omega, kerr, kappa })
    }
}

/// Worst-case density-matrix health observed over a trajectory's samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub max_trace_dev: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl StateStats {
    fn new() -> Self {
        Self {
            max_trace_dev: 0.0,
            max_hermiticity: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }

    fn update(&mut self, rho: &Array2<Complex64>) {
        let tr = trace(rho);
        self.max_trace_dev = self
            .max_trace_dev
            .max(((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt());
        self.max_hermiticity = self.max_hermiticity.max(hermiticity_residual(rho));
        if let Some(&min) = hermitian_eigvals(rho).first() {
            self.min_eigenvalue = self.min_eigenvalue.min(min);
        }
    }

    /// Combine with another trajectory's stats, keeping the worst case.
    pub fn merge(&mut self, other: &StateStats) {
        self.max_trace_dev = self.max_trace_dev.max(other.max_trace_dev);
        self.max_hermiticity = self.max_hermiticity.max(other.max_hermiticity);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }
}

/// Final state of a sampled trajectory, kept for continued evolution.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    Quantum(DensityMatrix),
    Classical(Complex64),
}

impl FinalState {
    pub fn quantum(&self) -> Option<&DensityMatrix> {
        match self {
            FinalState::Quantum(rho) => Some(rho),
            FinalState::Classical(_) => None,
        }
    }

    pub fn classical(&self) -> Option<Complex64> {
        match self {
            FinalState::Quantum(_) => None,
            FinalState::Classical(a) => Some(*a),
        }
    }
}

/// Uniformly sampled reservoir output s(t) over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub sample_times: Vec<f64>,
    pub samples: Vec<f64>,
    pub final_state: FinalState,
    /// Fock populations at each sample time, when requested.
    pub populations: Option<Vec<Vec<f64>>>,
    /// Density-matrix health over the samples (quantum trajectories only).
    pub stats: Option<StateStats>,
}

/// Dense-matrix Lindblad right-hand side for the qudit model:
/// drho/dt = -i[H(u), rho] + kappa D[a] rho.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    t: f64,
    p: &QuantumParams,
    drive: &Drive,
) -> Result<Array2<Complex64>> {
    if rho.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            actual: rho.dim(),
        });
    }
    let u = drive.value(t)?;
    let system = LindbladSystem::new(p);
    let mut out = Array2::zeros((p.dim, p.dim));
    system.rhs_into(u, rho.as_array(), &mut out);
    Ok(out)
}

/// Duffing equation of motion: da/dt = -i(Omega+K)a - i 2K |a|^2 a - kappa a/2 - i u(t).
pub fn duffing_rhs(a: Complex64, t: f64, p: &ClassicalParams, drive: &Drive) -> Result<Complex64> {
    let u = drive.value(t)?;
    Ok(duffing_rhs_value(a, u, p))
}

#[inline]
fn duffing_rhs_value(a: Complex64, u: f64, p: &ClassicalParams) -> Complex64 {
    let i = Complex64::i();
    -i * (p.omega + p.kerr) * a - i * 2.0 * p.kerr * a.norm_sqr() * a - 0.5 * p.kappa * a
        - i * u
}

/// Precomputed structure of the qudit Lindblad generator.
///
/// The Hamiltonian is diagonal-plus-tridiagonal and the collapse operator is
/// the lowering operator, so the full right-hand side costs O(d^2) per
/// evaluation. Agreement with the operator-algebra route built from
/// `build_hamiltonian` and `dissipator` is enforced by tests.
pub struct LindbladSystem {
    dim: usize,
    energies: Vec<f64>,
    sq: Vec<f64>,
    kappa: f64,
}

impl LindbladSystem {
    pub fn new(p: &QuantumParams) -> Self {
        let energies = (0..p.dim)
            .map(|n| {
                let nf = n as f64;
                p.omega * nf + p.kerr * nf * nf
            })
            .collect();
        let sq = (0..=p.dim).map(|n| (n as f64).sqrt()).collect();
        Self {
            dim: p.dim,
            energies,
            sq,
            kappa: p.kappa,
        }
    }

    /// out = -i[H(u), rho] + kappa D[a] rho, written without allocation.
    pub fn rhs_into(&self, u: f64, rho: &Array2<Complex64>, out: &mut Array2<Complex64>) {
        let d = self.dim;
        let r = rho.as_slice().expect("contiguous density matrix");
        let o = out.as_slice_mut().expect("contiguous output matrix");
        for i in 0..d {
            let ei = self.energies[i];
            for j in 0..d {
                let idx = i * d + j;
                let rij = r[idx];
                // Coherent part: (E_i - E_j) rho_ij plus the drive couplings.
                let mut coh = (ei - self.energies[j]) * rij;
                if i + 1 < d {
                    coh += u * self.sq[i + 1] * r[(i + 1) * d + j];
                }
                if i > 0 {
                    coh += u * self.sq[i] * r[(i - 1) * d + j];
                }
                if j + 1 < d {
                    coh -= u * self.sq[j + 1] * r[i * d + j + 1];
                }
                if j > 0 {
                    coh -= u * self.sq[j] * r[i * d + j - 1];
                }
                // Dissipator: gain from the level above, loss at (i+j)/2.
                let mut dis = -0.5 * (i + j) as f64 * rij;
                if i + 1 < d && j + 1 < d {
                    dis += self.sq[i + 1] * self.sq[j + 1] * r[(i + 1) * d + j + 1];
                }
                o[idx] = Complex64::new(coh.im, -coh.re) + self.kappa * dis;
            }
        }
    }
}

/// Options for trajectory sampling beyond the common defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Record Fock populations at every sample time.
    pub record_populations: bool,
}

/// Split `[w0, w1]` at interior hold-time boundaries of a piecewise drive;
/// sinusoidal drives yield a single piece. Each piece carries the constant
/// drive value to use, if the drive is piecewise.
fn drive_pieces(drive: &Drive, w0: f64, w1: f64) -> Result<Vec<(f64, f64, Option<f64>)>> {
    match drive {
        Drive::Sinusoidal(_) => Ok(vec![(w0, w1, None)]),
        Drive::Piecewise(p) => {
            let dt = p.hold_time;
            let total = p.total_time();
            let tol = 1e-9 * dt;
            if w0 < -tol || w1 > total + tol {
                return Err(Error::DriveOutOfRange {
                    t: if w0 < -tol { w0 } else { w1 },
                    span: total,
                });
            }
            let mut cuts = vec![w0];
            let mut m = (w0 / dt).floor() as i64 + 1;
            loop {
                let b = m as f64 * dt;
                if b >= w1 - tol {
                    break;
                }
                if b > w0 + tol {
                    cuts.push(b);
                }
                m += 1;
            }
            cuts.push(w1);
            let mut pieces = Vec::with_capacity(cuts.len() - 1);
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let j = ((mid / dt).floor() as usize).min(p.amplitudes.len() - 1);
                pieces.push((w[0], w[1], Some(p.amplitudes[j])));
            }
            Ok(pieces)
        }
    }
}

/// Run one state through the drive pieces of a window, emitting samples.
/// The right-hand side receives the piece's constant drive value when the
/// drive is piecewise, and `None` when it must evaluate u(t) itself.
fn run_pieces<S, R, O>(
    mut rhs: R,
    state0: S,
    pieces: &[(f64, f64, Option<f64>)],
    sample_times: &[f64],
    cfg: &IntegratorConfig,
    mut on_sample: O,
) -> Result<S>
where
    S: OdeState,
    R: FnMut(Option<f64>, f64, &S, &mut S),
    O: FnMut(usize, f64, &S),
{
    let mut state = state0;
    let mut next = 0usize;
    for &(lo, hi, u) in pieces {
        let snap = 1e-12 + 1e-12 * hi.abs();
        let start = next;
        while next < sample_times.len() && sample_times[next] <= hi + snap {
            next += 1;
        }
        let slice = &sample_times[start..next];
        state = integrate_observe(
            |t, y: &S, out: &mut S| rhs(u, t, y, out),
            &state,
            (lo, hi),
            cfg,
            slice,
            |i, t, s| on_sample(start + i, t, s),
        )?;
    }
    Ok(state)
}

/// Sample the qudit reservoir output s(t) = Tr[rho(t) X] at `num_samples`
/// uniformly spaced times across the window (endpoints inclusive).
///
/// The final state is returned inside the trajectory so evolution can be
/// continued across windows.
pub fn sample_quantum_output(
    p: &QuantumParams,
    drive: &Drive,
    rho0: &DensityMatrix,
    window: (f64, f64),
    num_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    sample_quantum_output_with(p, drive, rho0, window, num_samples, cfg, SampleOptions::default())
}

/// `sample_quantum_output` with extra recording options.
pub fn sample_quantum_output_with(
    p: &QuantumParams,
    drive: &Drive,
    rho0: &DensityMatrix,
    window: (f64, f64),
    num_samples: usize,
    cfg: &IntegratorConfig,
    opts: SampleOptions,
) -> Result<Trajectory> {
    if num_samples < 1 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if rho0.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            actual: rho0.dim(),
        });
    }
    let sample_times = linspace(window.0, window.1, num_samples);
    let pieces = drive_pieces(drive, window.0, window.1)?;
    let system = LindbladSystem::new(p);

    let mut samples = vec![0.0; num_samples];
    let mut populations = opts
        .record_populations
        .then(|| vec![Vec::new(); num_samples]);
    let mut stats = StateStats::new();

    let sin_drive = match drive {
        Drive::Sinusoidal(s) => Some(*s),
        Drive::Piecewise(_) => None,
    };
    let final_state = run_pieces(
        |u, t, y: &Array2<Complex64>, out: &mut Array2<Complex64>| {
            let uval = u.unwrap_or_else(|| sin_drive.expect("non-piecewise drive").value(t));
            system.rhs_into(uval, y, out);
        },
        rho0.as_array().clone(),
        &pieces,
        &sample_times,
        cfg,
        |i, _t, rho| {
            samples[i] = expectation_x_raw(rho);
            if let Some(pops) = populations.as_mut() {
                pops[i] = fock_populations_raw(rho);
            }
            stats.update(rho);
        },
    )?;

    Ok(Trajectory {
        sample_times,
        samples,
        final_state: FinalState::Quantum(DensityMatrix::from_evolved(final_state)),
        populations,
        stats: Some(stats),
    })
}

/// Sample the classical reservoir output X(t) = sqrt(2) Re a(t) at
/// `num_samples` uniformly spaced times across the window.
pub fn sample_classical_output(
    p: &ClassicalParams,
    drive: &Drive,
    a0: Complex64,
    window: (f64, f64),
    num_samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if num_samples < 1 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    let sample_times = linspace(window.0, window.1, num_samples);
    let pieces = drive_pieces(drive, window.0, window.1)?;

    let mut samples = vec![0.0; num_samples];
    let sin_drive = match drive {
        Drive::Sinusoidal(s) => Some(*s),
        Drive::Piecewise(_) => None,
    };
    let params = *p;
    let final_state = run_pieces(
        |u, t, a: &Complex64, out: &mut Complex64| {
            let uval = u.unwrap_or_else(|| sin_drive.expect("non-piecewise drive").value(t));
            *out = duffing_rhs_value(*a, uval, &params);
        },
        a0,
        &pieces,
        &sample_times,
        cfg,
        |i, _t, a| {
            samples[i] = std::f64::consts::SQRT_2 * a.re;
        },
    )?;

    Ok(Trajectory {
        sample_times,
        samples,
        final_state: FinalState::Classical(final_state),
        populations: None,
        stats: None,
    })
}

/// Reference Lindblad right-hand side assembled from the generic operator
/// algebra; used to cross-check the structured fast path.
#[doc(hidden)]
pub fn lindblad_rhs_reference(
    rho: &Array2<Complex64>,
    p: &QuantumParams,
    u: f64,
) -> Result<Array2<Complex64>> {
    let h = build_hamiltonian(p, u)?;
    let a = lowering_operator(p.dim)?;
    let i = Complex64::i();
    let comm = h.dot(rho) - rho.dot(&h);
    Ok(-i * comm + Complex64::new(p.kappa, 0.0) * dissipator(&a, rho)?)
}
