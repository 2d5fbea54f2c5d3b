//! Symmetric positive-definite matrices with a cached Cholesky factor.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// A symmetric positive-definite matrix bundling its lower Cholesky factor
/// and log-determinant. All solves go through the factor; an explicit
/// inverse is only materialized on request.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    logdet: f64,
    jittered: bool,
}

impl SpdMatrix {
    /// Factorize a symmetric matrix. Near-singular inputs are repaired by
    /// escalating diagonal jitter (starting at 1e-10 of the mean diagonal,
    /// growing tenfold, at most six retries); the repair is flagged.
    pub fn from_matrix(s: &DMatrix<f64>) -> Result<Self> {
        let p = s.nrows();
        if p == 0 || s.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "expected square nonempty matrix, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        let scale = s.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1.0);
        for i in 0..p {
            for j in (i + 1)..p {
                if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        s[(i, j)],
                        s[(j, i)]
                    )));
                }
            }
        }
        let sym = 0.5 * (s + s.transpose());
        let mean_diag = sym.diagonal().sum() / p as f64;
        let base = if mean_diag > 0.0 { mean_diag } else { 1.0 };
        let mut jitter = 0.0;
        for attempt in 0..=6 {
            let candidate = if jitter == 0.0 {
                sym.clone()
            } else {
                let mut c = sym.clone();
                for i in 0..p {
                    c[(i, i)] += jitter;
                }
                c
            };
            if let Some(chol) = Cholesky::new(candidate.clone()) {
                let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                if logdet.is_finite() {
                    return Ok(Self {
                        m: candidate,
                        chol,
                        logdet,
                        jittered: attempt > 0,
                    });
                }
            }
            jitter = if jitter == 0.0 { 1e-10 * base } else { jitter * 10.0 };
        }
        Err(Error::NotPositiveDefinite)
    }

    /// Identity of dimension `p`.
    pub fn identity(p: usize) -> Self {
        Self::from_matrix(&DMatrix::identity(p, p)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Lower-triangular Cholesky factor L with M = L Lᵀ.
    pub fn chol_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn was_jittered(&self) -> bool {
        self.jittered
    }

    /// M⁻¹ v via triangular solves.
    pub fn solve_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    /// M⁻¹ B via triangular solves.
    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    /// vᵀ M⁻¹ v ≥ 0, computed as ‖L⁻¹v‖².
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        let mut w = v.clone();
        self.chol.l_dirty().solve_lower_triangular_mut(&mut w);
        w.norm_squared()
    }

    /// Materialized inverse (used where one matrix multiplies many vectors).
    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}

/// Squared Mahalanobis distance (y−μ)ᵀ Ω⁻¹ (y−μ).
pub fn mahalanobis(y: &DVector<f64>, mu: &DVector<f64>, omega: &SpdMatrix) -> Result<f64> {
    if y.len() != mu.len() || y.len() != omega.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mahalanobis: y has {} entries, mu {}, matrix dim {}",
            y.len(),
            mu.len(),
            omega.dim()
        )));
    }
    Ok(omega.quad_form(&(y - mu)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn identity_case() {
        let s = SpdMatrix::identity(2);
        assert_eq!(s.chol_l(), DMatrix::identity(2, 2));
        assert_eq!(s.logdet(), 0.0);
        assert!(!s.was_jittered());
    }

    #[test]
    fn hand_solvable_2x2() {
        let s = SpdMatrix::from_matrix(&dmatrix![4.0, 2.0; 2.0, 3.0]).unwrap();
        let l = s.chol_l();
        assert_abs_diff_eq!(l[(0, 0)], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l[(1, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l[(1, 1)], 2.0_f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.logdet(), 8.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_gets_jitter() {
        let s = SpdMatrix::from_matrix(&dmatrix![1.0, 1.0; 1.0, 1.0]).unwrap();
        assert!(s.was_jittered());
        // still a usable factorization
        assert!(s.logdet().is_finite());
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(SpdMatrix::from_matrix(&dmatrix![1.0, 0.5; 0.2, 1.0]).is_err());
    }

    #[test]
    fn reconstruction_round_trip() {
        let m = dmatrix![3.0, 0.7, 0.2; 0.7, 2.0, -0.3; 0.2, -0.3, 1.5];
        let s = SpdMatrix::from_matrix(&m).unwrap();
        let l = s.chol_l();
        let back = &l * l.transpose();
        let err = (&back - &m).norm() / m.norm();
        assert!(err < 1e-10, "relative reconstruction error {err:e}");
        assert!(!s.was_jittered());
    }

    #[test]
    fn mahalanobis_cases() {
        let omega = SpdMatrix::identity(2);
        let mu = dvector![1.0, 2.0];
        assert_eq!(mahalanobis(&mu, &mu, &omega).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mahalanobis(&dvector![2.0, 2.0], &mu, &omega).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let iso = SpdMatrix::from_matrix(&dmatrix![2.0, 0.0; 0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(
            mahalanobis(&dvector![2.0, 3.0], &mu, &iso).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!(mahalanobis(&dvector![1.0], &mu, &omega).is_err());
    }

    #[test]
    fn solves_agree_with_inverse() {
        let m = dmatrix![2.0, 0.4; 0.4, 1.0];
        let s = SpdMatrix::from_matrix(&m).unwrap();
        let v = dvector![0.3, -1.2];
        let direct = s.inverse() * &v;
        let solved = s.solve_vec(&v);
        assert!((direct - solved).norm() < 1e-12);
    }
}
