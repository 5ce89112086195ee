//! Small dense linear-algebra helpers: endpoint-inclusive grids, a cyclic
//! Jacobi eigensolver for real symmetric matrices, and Hermitian eigenvalues
//! via the real symmetric embedding.
//!
//! Every matrix in this crate is tiny (qudit states are at most 16x16 and
//! ridge Gram matrices at most a couple hundred per side), so the Jacobi
//! method is plenty fast and has the advantage of being fully deterministic
//! and dependency-free.

use ndarray::Array2;
use num_complex::Complex64;

/// `n` uniformly spaced points over `[a, b]`, endpoints inclusive.
///
/// `n == 1` yields the lower endpoint only.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Eigendecomposition A = Q diag(w) Qᵀ of a real symmetric matrix by the
/// cyclic Jacobi method. Returns eigenvalues in ascending order with the
/// matching eigenvector columns.
pub fn sym_eig(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eig requires a square matrix");
    let mut m = a.clone();
    let mut q = Array2::<f64>::eye(n);
    if n <= 1 {
        return (m.diag().to_vec(), q);
    }

    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for r in (p + 1)..n {
                off += m[[p, r]] * m[[p, r]];
            }
        }
        if off.sqrt() <= 1e-14 * frobenius(&m).max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apq = m[[p, r]];
                if apq == 0.0 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[r, r]];
                // Stable rotation angle (Golub & Van Loan, Alg. 8.4.1).
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, r]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, r]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[r, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[r, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let qkp = q[[k, p]];
                    let qkq = q[[k, r]];
                    q[[k, p]] = c * qkp - s * qkq;
                    q[[k, r]] = s * qkp + c * qkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let w: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut q_sorted = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            q_sorted[[k, dst]] = q[[k, src]];
        }
    }
    (w, q_sorted)
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
///
/// Uses the real embedding [[B, -C], [C, B]] of A = B + iC, whose spectrum is
/// that of A with every eigenvalue doubled.
pub fn hermitian_eigvals(a: &Array2<Complex64>) -> Vec<f64> {
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "hermitian_eigvals requires a square matrix");
    if d == 0 {
        return Vec::new();
    }
    let mut m = Array2::<f64>::zeros((2 * d, 2 * d));
    for i in 0..d {
        for j in 0..d {
            let z = a[[i, j]];
            m[[i, j]] = z.re;
            m[[i + d, j + d]] = z.re;
            m[[i, j + d]] = -z.im;
            m[[i + d, j]] = z.im;
        }
    }
    let (w, _) = sym_eig(&m);
    // Pairs are adjacent after sorting; average each pair.
    (0..d).map(|i| 0.5 * (w[2 * i] + w[2 * i + 1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn linspace_conventions() {
        assert_eq!(linspace(0.0, 2.0, 51).len(), 51);
        let g = linspace(0.0, 2.0, 51);
        assert_abs_diff_eq!(g[1] - g[0], 0.04, epsilon = 1e-15);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[50], 2.0);
        assert_eq!(linspace(1.0, 10.0, 1), vec![1.0]);
        assert_eq!(linspace(1.0, 10.0, 3), vec![1.0, 5.5, 10.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn sym_eig_diagonal() {
        let a = array![[3.0, 0.0], [0.0, -1.0]];
        let (w, _) = sym_eig(&a);
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sym_eig_reconstructs() {
        // Deterministic pseudo-random symmetric matrix.
        let n = 12;
        let mut a = Array2::<f64>::zeros((n, n));
        let mut x = 0.5_f64;
        for i in 0..n {
            for j in i..n {
                x = (x * 997.0 + 3.14).fract();
                a[[i, j]] = x - 0.5;
                a[[j, i]] = a[[i, j]];
            }
        }
        let (w, q) = sym_eig(&a);
        // A q_i = w_i q_i for every column.
        for (i, &wi) in w.iter().enumerate() {
            let qi = q.column(i);
            let aq = a.dot(&qi);
            for k in 0..n {
                assert_abs_diff_eq!(aq[k], wi * qi[k], epsilon = 1e-10);
            }
        }
        // Eigenvalue sum matches the trace.
        let trace: f64 = a.diag().sum();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), trace, epsilon = 1e-10);
        // Ascending order.
        for pair in w.windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn hermitian_eigvals_pauli_y() {
        // sigma_y has eigenvalues -1, +1 and is genuinely complex.
        let a = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]
        ];
        let w = hermitian_eigvals(&a);
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
    }
}
