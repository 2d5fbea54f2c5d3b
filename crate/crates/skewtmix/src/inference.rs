//! Model comparison and classification: AIC/BIC, the likelihood-ratio
//! test for skewness (FM-MT nested inside FM-uMST), and discriminant
//! analysis with a fitted mixture.

use statrs::function::gamma::gamma_ur;

use crate::dist::MixtureParams;
use crate::em::{argmax_columns, density_pass, posterior_from, FitOptions, FitResult};
use crate::error::{Error, Result};
use crate::DataMatrix;

/// AIC and BIC from a log likelihood. The free-parameter count is
/// k = g·(2p + p(p+1)/2 + 1) + (g−1) − adjustment, i.e. per component a
/// location, a skewness vector, a symmetric scale and a degrees-of-freedom
/// scalar, plus g−1 mixing proportions; `fixed_param_count_adjustment`
/// subtracts parameters held known during fitting.
pub fn information_criteria(
    loglik: f64,
    g: usize,
    p: usize,
    n: usize,
    fixed_param_count_adjustment: usize,
) -> (f64, f64) {
    let full = g * (2 * p + p * (p + 1) / 2 + 1) + g.saturating_sub(1);
    let k = full.saturating_sub(fixed_param_count_adjustment) as f64;
    let aic = 2.0 * k - 2.0 * loglik;
    let bic = k * (n as f64).ln() - 2.0 * loglik;
    (aic, bic)
}

/// Outcome of the skewness likelihood-ratio test.
#[derive(Debug, Clone)]
pub struct LrTestResult {
    /// −2(L_t − L_st): twice the log likelihood gain from freeing δ.
    pub statistic: f64,
    /// Degrees of freedom of the reference χ² (the number of freed
    /// skewness parameters).
    pub dof_r: usize,
    pub p_value: f64,
    /// Log likelihood of the symmetric-t (null) fit.
    pub loglik_t: f64,
    /// Log likelihood of the skew-t (alternative) fit.
    pub loglik_st: f64,
    /// Present when the statistic came out negative (imperfect
    /// optimization of one of the fits); the p-value is then computed at 0.
    pub warning: Option<String>,
}

/// Likelihood-ratio test of δ = 0 from two fitted models on the same data:
/// `st_fit` the skew alternative, `t_fit` the symmetric null.
pub fn delta_test(st_fit: &FitResult, t_fit: &FitResult) -> Result<LrTestResult> {
    let g = st_fit.params.g();
    let p = st_fit.params.p();
    if t_fit.params.g() != g {
        return Err(Error::MismatchedModels(format!(
            "{} components vs {}",
            g,
            t_fit.params.g()
        )));
    }
    if t_fit.params.p() != p {
        return Err(Error::MismatchedModels(format!(
            "dimension {} vs {}",
            p,
            t_fit.params.p()
        )));
    }
    if t_fit.tau.ncols() != st_fit.tau.ncols() {
        return Err(Error::MismatchedModels(format!(
            "fitted to {} vs {} observations",
            st_fit.tau.ncols(),
            t_fit.tau.ncols()
        )));
    }
    if t_fit.params.components.iter().any(|c| !c.is_symmetric()) {
        return Err(Error::MismatchedModels(
            "null model has nonzero skewness".into(),
        ));
    }
    Ok(delta_test_from_logliks(st_fit.loglik, t_fit.loglik, g * p))
}

/// The same test from bare log likelihoods with an explicit χ² degrees of
/// freedom (for callers that fitted the models elsewhere or restrict the
/// test to a subset of the skewness parameters).
pub fn delta_test_from_logliks(loglik_st: f64, loglik_t: f64, r: usize) -> LrTestResult {
    let statistic = -2.0 * (loglik_t - loglik_st);
    let warning = (statistic < 0.0).then(|| {
        format!(
            "negative likelihood-ratio statistic {statistic:.6}: the nested fit \
             out-scored the alternative; p-value computed at 0"
        )
    });
    let x = statistic.max(0.0);
    let p_value = if r == 0 {
        1.0
    } else if x == 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * r as f64, 0.5 * x)
    };
    LrTestResult {
        statistic,
        dof_r: r,
        p_value,
        loglik_t,
        loglik_st,
        warning,
    }
}

/// Discriminant analysis: assign each row of `dat` to the component with
/// the highest posterior probability under `model` (smallest index on
/// ties). Labels are 1-based.
pub fn fmmst_da(dat: &DataMatrix, model: &MixtureParams, opts: &FitOptions) -> Result<Vec<usize>> {
    if dat.p() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, model dimension {}",
            dat.p(),
            model.p()
        )));
    }
    let pass = density_pass(dat, model, opts.cdf_tol, opts.seed)?;
    let tau = posterior_from(&pass, model);
    Ok(argmax_columns(&tau))
}

/// Posterior membership probabilities (g×n) of `dat` under `model`,
/// without fitting; what [`fmmst_da`] takes the argmax of.
pub fn posterior_probabilities(
    dat: &DataMatrix,
    model: &MixtureParams,
    opts: &FitOptions,
) -> Result<nalgebra::DMatrix<f64>> {
    if dat.p() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, model dimension {}",
            dat.p(),
            model.p()
        )));
    }
    let pass = density_pass(dat, model, opts.cdf_tol, opts.seed)?;
    Ok(posterior_from(&pass, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{rfmmst, ComponentParams};
    use crate::numerics::SpdMatrix;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn published_aic_bic_pair() {
        let (aic, bic) = information_criteria(-880.7115, 1, 2, 500, 0);
        assert!((aic - 1777.423).abs() < 1e-2, "aic {aic}");
        assert!((bic - 1811.14).abs() < 1e-2, "bic {bic}");
    }

    #[test]
    fn parameter_count_arithmetic() {
        // g=1, p=2 → k=8; pinning δ removes 2 → aic drops by 4
        let (a_full, _) = information_criteria(0.0, 1, 2, 10, 0);
        assert_eq!(a_full, 16.0);
        let (a_pinned, _) = information_criteria(0.0, 1, 2, 10, 2);
        assert_eq!(a_full - a_pinned, 4.0);
        // zero free parameters
        let (a0, b0) = information_criteria(0.0, 1, 2, 10, 8);
        assert_eq!((a0, b0), (0.0, 0.0));
    }

    #[test]
    fn lr_test_basics() {
        let r = delta_test_from_logliks(-100.0, -100.0, 4);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(r.warning.is_none());

        let neg = delta_test_from_logliks(-101.0, -100.0, 4);
        assert!(neg.statistic < 0.0);
        assert_eq!(neg.p_value, 1.0);
        assert!(neg.warning.is_some());

        // monotone decreasing in the statistic for fixed r
        let mut last = 1.0;
        for lr in [0.5, 2.0, 8.0, 20.9, 40.0] {
            let t = delta_test_from_logliks(-100.0 + 0.5 * lr, -100.0, 4);
            assert!((t.statistic - lr).abs() < 1e-12);
            assert!(t.p_value < last);
            last = t.p_value;
        }
    }

    #[test]
    fn chi_square_tail_spot_value() {
        // P(χ²₄ > 20.904) ≈ 3.3e-4; independent series evaluation of the
        // regularized upper incomplete gamma at (2, 10.452):
        // e^{-x}(1 + x) for integer shape 2
        let t = delta_test_from_logliks(-100.0 + 0.5 * 20.904, -100.0, 4);
        let x: f64 = 10.452;
        let direct = (-x).exp() * (1.0 + x);
        assert!((t.p_value - direct).abs() < 1e-12);
    }

    fn model() -> MixtureParams {
        let c1 = ComponentParams::new(
            dvector![0.0, 0.0],
            SpdMatrix::from_matrix(&dmatrix![1.0, 0.1; 0.1, 1.0]).unwrap(),
            dvector![1.0, -0.5],
            5.0,
        )
        .unwrap();
        let c2 = ComponentParams::new(
            dvector![7.0, 7.0],
            SpdMatrix::from_matrix(&dmatrix![1.0, 0.0; 0.0, 1.0]).unwrap(),
            dvector![0.5, 0.5],
            7.0,
        )
        .unwrap();
        MixtureParams::new(vec![c1, c2], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn discriminant_analysis_separates_held_out_draws() {
        let truth = model();
        let (rows, labels) = rfmmst(150, &truth, 77).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let opts = FitOptions::default();
        let got = fmmst_da(&dat, &truth, &opts).unwrap();
        let correct = got
            .iter()
            .zip(&labels)
            .filter(|(a, b)| a == b)
            .count();
        assert!(
            correct as f64 / labels.len() as f64 > 0.9,
            "only {correct} of {} correct",
            labels.len()
        );
    }

    #[test]
    fn single_component_labels_everything_one() {
        let truth = model();
        let single =
            MixtureParams::new(vec![truth.components[0].clone()], vec![1.0]).unwrap();
        let (rows, _) = rfmmst(30, &truth, 5).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let got = fmmst_da(&dat, &single, &FitOptions::default()).unwrap();
        assert!(got.iter().all(|&l| l == 1));
    }

    #[test]
    fn relabeling_the_model_permutes_the_labels() {
        let truth = model();
        let swapped = MixtureParams::new(
            vec![truth.components[1].clone(), truth.components[0].clone()],
            vec![truth.pro[1], truth.pro[0]],
        )
        .unwrap();
        let (rows, _) = rfmmst(60, &truth, 8).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let opts = FitOptions::default();
        let a = fmmst_da(&dat, &truth, &opts).unwrap();
        let b = fmmst_da(&dat, &swapped, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*y, 3 - *x);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let truth = model();
        let dat = DataMatrix::new(nalgebra::DMatrix::zeros(4, 3), vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert!(fmmst_da(&dat, &truth, &FitOptions::default()).is_err());
    }
}
