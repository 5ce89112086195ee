//! Linear readout: feature-matrix assembly, ridge-regression training of the
//! output weights W = Y Sᵀ (S Sᵀ + γI)⁻¹, prediction, and the performance
//! metrics (RMSE, k-delay coefficient of determination, STMC).
//!
//! The regularized normal equations are solved through a symmetric
//! eigendecomposition of the Gram matrix S Sᵀ rather than an explicit
//! inverse. A single factorization serves every γ in a sweep, and negative γ
//! (an indefinite system) is handled the same way as positive.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::sym_eig;

/// Condition-estimate ceiling beyond which a ridge solve is reported as
/// singular rather than returning garbage.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Relative eigenvalue cutoff for the pseudoinverse limit at γ = 0.
const RCOND: f64 = 1e-14;

fn check_finite(name: &str, m: &Array2<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} contains non-finite entries"
        )))
    }
}

/// Sampled reservoir outputs: one column of length NT per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        check_finite("feature matrix", &entries)?;
        Ok(Self(entries))
    }

    /// Assemble from per-instance sample vectors (the matrix columns).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m = columns.len();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "feature matrix needs at least one column".into(),
            ));
        }
        let nt = columns[0].len();
        if columns.iter().any(|c| c.len() != nt) {
            return Err(Error::DimensionMismatch {
                expected: nt,
                actual: columns.iter().map(|c| c.len()).find(|&l| l != nt).unwrap(),
            });
        }
        let mut entries = Array2::zeros((nt, m));
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                entries[[i, j]] = v;
            }
        }
        Self::new(entries)
    }

    /// Rows: samples per instance (NT).
    pub fn sample_len(&self) -> usize {
        self.0.nrows()
    }

    /// Columns: training/test instances (M).
    pub fn num_instances(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Known label values: one column of length L per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix(Array2<f64>);

impl TargetMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        check_finite("target matrix", &entries)?;
        Ok(Self(entries))
    }

    /// Single-output targets from a flat slice.
    pub fn from_row(values: &[f64]) -> Result<Self> {
        let mut entries = Array2::zeros((1, values.len()));
        for (j, &v) in values.iter().enumerate() {
            entries[[0, j]] = v;
        }
        Self::new(entries)
    }

    pub fn num_outputs(&self) -> usize {
        self.0.nrows()
    }

    pub fn num_instances(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Trained output weights, L x NT.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Array2<f64>);

impl WeightMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        check_finite("weight matrix", &entries)?;
        Ok(Self(entries))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Reusable factorization for training many γ values against one feature set.
///
/// Holds the eigendecomposition S Sᵀ = Q Λ Qᵀ and the projected targets
/// Y Sᵀ Q, so each γ costs one diagonal scaling and one small multiply.
pub struct RidgeFactorization {
    eigenvalues: Vec<f64>,
    q: Array2<f64>,
    projected: Array2<f64>,
}

impl RidgeFactorization {
    pub fn new(features: &FeatureMatrix, targets: &TargetMatrix) -> Result<Self> {
        if features.num_instances() != targets.num_instances() {
            return Err(Error::DimensionMismatch {
                expected: features.num_instances(),
                actual: targets.num_instances(),
            });
        }
        let s = features.as_array();
        let gram = s.dot(&s.t());
        let (eigenvalues, q) = sym_eig(&gram);
        let projected = targets.as_array().dot(&s.t()).dot(&q);
        Ok(Self {
            eigenvalues,
            q,
            projected,
        })
    }

    /// Condition estimate of S Sᵀ + γI from the shifted spectrum.
    pub fn condition(&self, gamma: f64) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &w in &self.eigenvalues {
            let m = (w + gamma).abs();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Solve for the weights at a given γ.
    ///
    /// γ = 0 takes the pseudoinverse limit: spectral directions below the
    /// relative cutoff are projected out instead of amplified, which is the
    /// γ → 0⁺ behavior and keeps the exact-interpolation regime well defined
    /// when the Gram matrix is rank deficient.
    pub fn solve(&self, gamma: f64) -> Result<WeightMatrix> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ridge parameter must be finite, got {gamma}"
            )));
        }
        let hi = self
            .eigenvalues
            .iter()
            .map(|&w| (w + gamma).abs())
            .fold(0.0_f64, f64::max);
        if hi == 0.0 {
            return Err(Error::SingularSystem { cond: f64::INFINITY });
        }
        let pseudo = gamma == 0.0;
        if !pseudo {
            let cond = self.condition(gamma);
            if cond > CONDITION_LIMIT {
                return Err(Error::SingularSystem { cond });
            }
        }
        let l = self.projected.nrows();
        let nt = self.eigenvalues.len();
        let mut scaled = self.projected.clone();
        for (i, &w) in self.eigenvalues.iter().enumerate() {
            let shifted = w + gamma;
            let inv = if pseudo && shifted.abs() <= RCOND * hi {
                0.0
            } else {
                1.0 / shifted
            };
            for r in 0..l {
                scaled[[r, i]] *= inv;
            }
        }
        let w = scaled.dot(&self.q.t());
        debug_assert_eq!(w.dim(), (l, nt));
        WeightMatrix::new(w)
    }
}

/// Train output weights by ridge regression, W = Y Sᵀ (S Sᵀ + γI)⁻¹.
pub fn ridge_train(
    features: &FeatureMatrix,
    targets: &TargetMatrix,
    gamma: f64,
) -> Result<WeightMatrix> {
    RidgeFactorization::new(features, targets)?.solve(gamma)
}

/// Apply trained weights to one sample vector: y = W s.
pub fn predict(weights: &WeightMatrix, sample: &[f64]) -> Result<Vec<f64>> {
    let w = weights.as_array();
    if sample.len() != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: w.ncols(),
            actual: sample.len(),
        });
    }
    let s = Array1::from_iter(sample.iter().copied());
    Ok(w.dot(&s).to_vec())
}

/// Predictions for every column of a feature matrix: W S, L x M.
pub fn predict_all(weights: &WeightMatrix, features: &FeatureMatrix) -> Result<Array2<f64>> {
    let w = weights.as_array();
    if features.sample_len() != w.ncols() {
        return Err(Error::DimensionMismatch {
            expected: w.ncols(),
            actual: features.sample_len(),
        });
    }
    Ok(w.dot(features.as_array()))
}

/// Root-mean-squared error between estimated and actual values.
pub fn rmse(estimated: &[f64], actual: &[f64]) -> Result<f64> {
    if estimated.is_empty() || actual.is_empty() {
        return Err(Error::InvalidMetricInput("rmse of empty vectors".into()));
    }
    if estimated.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: estimated.len(),
        });
    }
    let n = estimated.len() as f64;
    let sum: f64 = estimated
        .iter()
        .zip(actual.iter())
        .map(|(e, a)| (e - a) * (e - a))
        .sum();
    Ok((sum / n).sqrt())
}

/// Variance threshold below which the coefficient of determination is
/// defined as zero (no explanatory power).
const DEGENERATE_VARIANCE: f64 = 1e-14;

/// k-delay coefficient of determination: the squared covariance between the
/// delayed inputs and the processed outputs over the product of their
/// variances. Population convention (divide by the count) on both the
/// covariance and the variances, so the choice cancels.
pub fn k_delay_r2(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.len() != predictions.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            actual: predictions.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::InvalidMetricInput(
            "k-delay r^2 needs at least two points".into(),
        ));
    }
    let n = targets.len() as f64;
    let mean_t = targets.iter().sum::<f64>() / n;
    let mean_p = predictions.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_t = 0.0;
    let mut var_p = 0.0;
    for (&t, &p) in targets.iter().zip(predictions.iter()) {
        let dt = t - mean_t;
        let dp = p - mean_p;
        cov += dt * dp;
        var_t += dt * dt;
        var_p += dp * dp;
    }
    cov /= n;
    var_t /= n;
    var_p /= n;
    if var_t < DEGENERATE_VARIANCE || var_p < DEGENERATE_VARIANCE {
        return Ok(0.0);
    }
    let r2 = cov * cov / (var_t * var_p);
    Ok(r2.min(1.0))
}

/// Short-term memory capacity: the sum of r²_k over delays k = 1..k_max.
pub fn stmc(r2_values: &[f64]) -> Result<f64> {
    for &r2 in r2_values {
        if !(-1e-9..=1.0 + 1e-9).contains(&r2) {
            return Err(Error::InvalidMetricInput(format!(
                "r^2 value {r2} outside [0, 1]"
            )));
        }
    }
    Ok(r2_values.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Brute-force oracle: W = Y Sᵀ (S Sᵀ + γI)⁻¹ with an explicit
    /// Gauss-Jordan inverse. Returns None when a pivot collapses.
    fn normal_equation_oracle(
        s: &Array2<f64>,
        y: &Array2<f64>,
        gamma: f64,
    ) -> Option<Array2<f64>> {
        let nt = s.nrows();
        let mut a = s.dot(&s.t());
        for i in 0..nt {
            a[[i, i]] += gamma;
        }
        let mut inv = Array2::<f64>::eye(nt);
        // Gauss-Jordan with partial pivoting.
        for col in 0..nt {
            let mut pivot = col;
            for r in col + 1..nt {
                if a[[r, col]].abs() > a[[pivot, col]].abs() {
                    pivot = r;
                }
            }
            if a[[pivot, col]].abs() < 1e-300 {
                return None;
            }
            if pivot != col {
                for k in 0..nt {
                    a.swap([pivot, k], [col, k]);
                    inv.swap([pivot, k], [col, k]);
                }
            }
            let p = a[[col, col]];
            for k in 0..nt {
                a[[col, k]] /= p;
                inv[[col, k]] /= p;
            }
            for r in 0..nt {
                if r != col {
                    let f = a[[r, col]];
                    if f != 0.0 {
                        for k in 0..nt {
                            a[[r, k]] -= f * a[[col, k]];
                            inv[[r, k]] -= f * inv[[col, k]];
                        }
                    }
                }
            }
        }
        Some(y.dot(&s.t()).dot(&inv))
    }

    fn random_matrix(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_interpolation() {
        let s = FeatureMatrix::new(Array2::eye(2)).unwrap();
        let y = TargetMatrix::from_row(&[1.0, 2.0]).unwrap();
        let w = ridge_train(&s, &y, 0.0).unwrap();
        assert_abs_diff_eq!(w.as_array()[[0, 0]], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.as_array()[[0, 1]], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn shrinkage_norm_monotonicity() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let s = FeatureMatrix::new(random_matrix(&mut rng, 4, 6)).unwrap();
        let y = TargetMatrix::new(random_matrix(&mut rng, 1, 6)).unwrap();
        let w_small = ridge_train(&s, &y, 1e-3).unwrap();
        let w_large = ridge_train(&s, &y, 1e3).unwrap();
        assert!(w_large.frobenius_norm() < w_small.frobenius_norm());
    }

    #[test]
    fn matches_normal_equation_oracle_5x8() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let s_raw = random_matrix(&mut rng, 5, 8);
        let y_raw = random_matrix(&mut rng, 1, 8);
        let s = FeatureMatrix::new(s_raw.clone()).unwrap();
        let y = TargetMatrix::new(y_raw.clone()).unwrap();
        let w = ridge_train(&s, &y, 0.1).unwrap();
        let oracle = normal_equation_oracle(&s_raw, &y_raw, 0.1).unwrap();
        for (a, b) in w.as_array().iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn matches_oracle_across_signed_gammas() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let mut checked = 0;
        for _ in 0..40 {
            let nt = rng.gen_range(3..8);
            let m = rng.gen_range(3..10);
            let s_raw = random_matrix(&mut rng, nt, m);
            let y_raw = random_matrix(&mut rng, 2, m);
            let p = rng.gen_range(-6..=0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let gamma = sign * 10f64.powi(p);
            let s = FeatureMatrix::new(s_raw.clone()).unwrap();
            let y = TargetMatrix::new(y_raw.clone()).unwrap();
            match ridge_train(&s, &y, gamma) {
                Ok(w) => {
                    let oracle = normal_equation_oracle(&s_raw, &y_raw, gamma).unwrap();
                    let num: f64 = w
                        .as_array()
                        .iter()
                        .zip(oracle.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    let den: f64 = oracle.iter().map(|x| x * x).sum::<f64>().sqrt();
                    assert!(num / den.max(1e-300) < 1e-8, "gamma {gamma}");
                    checked += 1;
                }
                Err(Error::SingularSystem { .. }) => {
                    // Negative gamma landed near an eigenvalue; acceptable.
                }
                Err(e) => panic!("unexpected error: {e}"),
            }
        }
        assert!(checked > 20);
    }

    #[test]
    fn pseudoinverse_limit_interpolates_rank_deficient() {
        // M < NT with full column rank: gamma = 0 reproduces the training
        // targets exactly through the pseudoinverse limit.
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let s_raw = random_matrix(&mut rng, 10, 4);
        let y_raw = random_matrix(&mut rng, 2, 4);
        let s = FeatureMatrix::new(s_raw).unwrap();
        let y = TargetMatrix::new(y_raw.clone()).unwrap();
        let w = ridge_train(&s, &y, 0.0).unwrap();
        let pred = predict_all(&w, &s).unwrap();
        for (a, b) in pred.iter().zip(y_raw.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn ridge_objective_matches_oracle() {
        // The trained W must achieve the regularized objective of the
        // explicit normal-equation solution on 10x20 instances.
        let objective = |w: &Array2<f64>, s: &Array2<f64>, y: &Array2<f64>, gamma: f64| {
            let resid = y - &w.dot(s);
            resid.iter().map(|x| x * x).sum::<f64>()
                + gamma * w.iter().map(|x| x * x).sum::<f64>()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for gamma in [1e-3, 0.1, 10.0] {
            let s_raw = random_matrix(&mut rng, 10, 20);
            let y_raw = random_matrix(&mut rng, 1, 20);
            let s = FeatureMatrix::new(s_raw.clone()).unwrap();
            let y = TargetMatrix::new(y_raw.clone()).unwrap();
            let w = ridge_train(&s, &y, gamma).unwrap();
            let oracle = normal_equation_oracle(&s_raw, &y_raw, gamma).unwrap();
            let j_impl = objective(w.as_array(), &s_raw, &y_raw, gamma);
            let j_oracle = objective(&oracle, &s_raw, &y_raw, gamma);
            assert!((j_impl - j_oracle).abs() < 1e-8, "gamma {gamma}");
        }
    }

    #[test]
    fn singular_system_is_reported() {
        // Rank-1 Gram matrix with tiny positive gamma: condition blows up.
        let s = FeatureMatrix::new(array![[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let y = TargetMatrix::from_row(&[1.0, 2.0]).unwrap();
        let err = ridge_train(&s, &y, 1e-20).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }));
    }

    #[test]
    fn predict_examples() {
        let w = WeightMatrix::new(Array2::eye(2)).unwrap();
        assert_eq!(predict(&w, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);

        let w0 = WeightMatrix::new(Array2::zeros((2, 3))).unwrap();
        assert_eq!(predict(&w0, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);

        let w = WeightMatrix::new(array![[0.5, -1.0], [2.0, 0.0]]).unwrap();
        let w2 = WeightMatrix::new(w.as_array() * 2.0).unwrap();
        let p1 = predict(&w, &[1.0, 3.0]).unwrap();
        let p2 = predict(&w2, &[1.0, 3.0]).unwrap();
        for (a, b) in p1.iter().zip(p2.iter()) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-14);
        }

        assert!(predict(&w, &[1.0]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(),
            (25.0_f64 / 2.0).sqrt(),
            epsilon = 1e-12
        );
        assert_eq!(rmse(&[5.0], &[3.0]).unwrap(), 2.0);
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn r2_examples() {
        let t = vec![1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(k_delay_r2(&t, &t).unwrap(), 1.0, epsilon = 1e-12);

        let affine: Vec<f64> = t.iter().map(|x| 2.0 * x + 5.0).collect();
        assert_abs_diff_eq!(k_delay_r2(&t, &affine).unwrap(), 1.0, epsilon = 1e-12);

        let constant = vec![7.0; 4];
        assert_eq!(k_delay_r2(&t, &constant).unwrap(), 0.0);

        assert!(k_delay_r2(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn r2_affine_invariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let t: Vec<f64> = (0..50).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let p: Vec<f64> = (0..50).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let base = k_delay_r2(&t, &p).unwrap();
        for (a, b) in [(2.0, 0.0), (0.5, -4.0), (10.0, 100.0)] {
            let scaled: Vec<f64> = p.iter().map(|x| a * x + b).collect();
            assert_abs_diff_eq!(k_delay_r2(&t, &scaled).unwrap(), base, epsilon = 1e-12);
        }
    }

    #[test]
    fn stmc_examples() {
        assert_abs_diff_eq!(stmc(&[1.0, 0.5, 0.0]).unwrap(), 1.5, epsilon = 1e-15);
        assert_eq!(stmc(&[0.0; 5]).unwrap(), 0.0);
        assert_abs_diff_eq!(stmc(&[1.0; 7]).unwrap(), 7.0, epsilon = 1e-15);
        assert!(stmc(&[1.5]).is_err());
        assert!(stmc(&[-0.2]).is_err());
    }
}
