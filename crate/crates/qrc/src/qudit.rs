//! Operator and state algebra for a d-level qudit: lowering operator,
//! Hamiltonian assembly, Lindblad dissipator, observables, and density-matrix
//! validity checks.
//!
//! All frequencies and rates are expressed in units of the decay rate kappa,
//! and hbar = 1 throughout.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigvals;

/// Density-matrix validity tolerances: Hermiticity residual, trace deviation,
/// and the allowed eigenvalue dip below zero.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Physical parameters of the qudit reservoir, in kappa units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumParams {
    /// Hilbert-space dimension d >= 1.
    pub dim: usize,
    /// Zero-excitation resonance frequency Omega.
    #[serde(default)]
    pub omega: f64,
    /// Kerr nonlinearity K.
    pub kerr: f64,
    /// Excitation decay rate; 1.0 by convention since all quantities are in
    /// kappa units, but kept configurable for limiting-case studies.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    1.0
}

impl QuantumParams {
    pub fn new(dim: usize, omega: f64, kerr: f64) -> Result<Self> {
        Self::with_kappa(dim, omega, kerr, 1.0)
    }

    pub fn with_kappa(dim: usize, omega: f64, kerr: f64, kappa: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(omega.is_finite() && kerr.is_finite() && kappa.is_finite()) {
            return Err(Error::InvalidParameter(
                "quantum parameters must be finite".into(),
            ));
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Ok(Self {
            dim,
            omega,
            kerr,
            kappa,
        })
    }
}

/// The qudit lowering operator a on a d-level space: sqrt(n) on the first
/// superdiagonal, so a|n> = sqrt(n)|n-1> for n = 1..d-1.
pub fn lowering_operator(dim: usize) -> Result<Array2<Complex64>> {
    if dim < 1 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = Array2::<Complex64>::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

/// Hamiltonian Omega n + K n^2 + u (a + a†) with n = a†a, for drive value u.
pub fn build_hamiltonian(p: &QuantumParams, u: f64) -> Result<Array2<Complex64>> {
    if p.dim < 1 {
        return Err(Error::InvalidDimension(p.dim));
    }
    let d = p.dim;
    let mut h = Array2::<Complex64>::zeros((d, d));
    for n in 0..d {
        let nf = n as f64;
        h[[n, n]] = Complex64::new(p.omega * nf + p.kerr * nf * nf, 0.0);
    }
    for n in 1..d {
        let v = u * (n as f64).sqrt();
        h[[n - 1, n]] += Complex64::new(v, 0.0);
        h[[n, n - 1]] += Complex64::new(v, 0.0);
    }
    Ok(h)
}

/// Lindblad dissipator D[L] rho = L rho L† - {L†L, rho}/2.
pub fn dissipator(l: &Array2<Complex64>, rho: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if l.nrows() != rho.nrows() || l.ncols() != rho.ncols() || l.nrows() != l.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            actual: l.nrows(),
        });
    }
    let l_dag = dagger(l);
    let ldl = l_dag.dot(l);
    let gain = l.dot(rho).dot(&l_dag);
    let half = Complex64::new(0.5, 0.0);
    Ok(gain - half * ldl.dot(rho) - half * rho.dot(&ldl))
}

/// Expectation of the monitored quadrature X = (a + a†)/sqrt(2).
///
/// The result is real for any valid state; the imaginary residual (below
/// 1e-10 in practice) is discarded.
pub fn expectation_x(rho: &DensityMatrix) -> f64 {
    expectation_x_raw(rho.as_array())
}

/// `expectation_x` on a raw matrix, used on in-flight integrator states.
pub(crate) fn expectation_x_raw(rho: &Array2<Complex64>) -> f64 {
    // Tr[rho X] with X tridiagonal: sum over the two off-diagonals.
    let d = rho.nrows();
    let mut tr = 0.0;
    for n in 1..d {
        let x = (n as f64).sqrt();
        // X_{n-1,n} = X_{n,n-1} = sqrt(n)/sqrt(2)
        tr += x * (rho[[n, n - 1]].re + rho[[n - 1, n]].re);
    }
    tr / std::f64::consts::SQRT_2
}

/// Diagonal of rho: occupation probability of each Fock level.
pub fn fock_populations(rho: &DensityMatrix) -> Vec<f64> {
    fock_populations_raw(rho.as_array())
}

pub(crate) fn fock_populations_raw(rho: &Array2<Complex64>) -> Vec<f64> {
    rho.diag().iter().map(|z| z.re).collect()
}

/// Trace of a complex matrix.
pub fn trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().iter().sum()
}

/// Largest entrywise deviation from Hermiticity, max |m - m†|.
pub fn hermiticity_residual(m: &Array2<Complex64>) -> f64 {
    let d = m.nrows();
    let mut res: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            res = res.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    res
}

/// A d x d density matrix: Hermitian, unit trace, positive semidefinite
/// within the module tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<Complex64>,
}

impl DensityMatrix {
    /// Validating constructor; rejects matrices violating Hermiticity,
    /// trace-one, or positivity tolerances.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let herm = hermiticity_residual(&entries);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity residual {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        let tr = trace(&entries);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 by more than {TRACE_TOL:.0e}"
            )));
        }
        let min_eig = hermitian_eigvals(&entries)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e} below -{POSITIVITY_TOL:.0e}"
            )));
        }
        Ok(Self { entries })
    }

    /// Wrap a matrix produced by trusted internal evolution without paying
    /// for the eigenvalue check; validity is asserted in debug builds only.
    pub(crate) fn from_evolved(entries: Array2<Complex64>) -> Self {
        debug_assert!(hermiticity_residual(&entries) <= 1e-8);
        debug_assert!((trace(&entries).re - 1.0).abs() <= 1e-8);
        Self { entries }
    }

    /// Pure Fock state |n><n| on a d-level space.
    pub fn fock_state(dim: usize, n: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidDimension(dim));
        }
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "Fock level {n} outside 0..{dim}"
            )));
        }
        let mut m = Array2::<Complex64>::zeros((dim, dim));
        m[[n, n]] = Complex64::new(1.0, 0.0);
        Ok(Self { entries: m })
    }

    /// Ground state |0><0|.
    pub fn ground_state(dim: usize) -> Result<Self> {
        Self::fock_state(dim, 0)
    }

    /// Pure state |psi><psi| from an amplitude vector (renormalized).
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let d = amplitudes.len();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::InvalidState("pure state has zero or non-finite norm".into()));
        }
        let mut m = Array2::<Complex64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = amplitudes[i] * amplitudes[j].conj() / norm_sq;
            }
        }
        Ok(Self { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.entries
    }
}
