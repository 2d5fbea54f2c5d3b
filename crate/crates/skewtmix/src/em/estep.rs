//! E-step: posterior membership probabilities and the conditional
//! expectations e1 = E(W|y), e2 = E(W U|y), e3 = E(W U Uᵀ|y) of the
//! latent scale weight W and half-normal vector U, given each component.

use nalgebra::DMatrix;

use crate::dist::{clamped_ln, dmst_parts, ComponentDerived, MixtureParams};
use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, mix_seed, mvt_cdf, pairwise_sum, trunc_t_moments_given};
use crate::DataMatrix;

use super::FitOptions;

/// Below this posterior weight the truncated-moment work for an
/// (observation, component) pair is skipped: e1 keeps its symmetric-case
/// closed form and e2, e3 stay zero. Such entries contribute less than
/// floating-point resolution to any M-step sum.
const TAU_MOMENT_SKIP: f64 = 1e-12;

/// When the density's t-distribution-function factor (or the e1 numerator)
/// falls below this, the CDF ratio is numerically 0/0; the far-tail limit
/// e1 → (ν+p)/(ν+d), e2 → 0, e3 → 0 is used instead.
const CDF_FLOOR: f64 = 1e-12;

// Tags separating the QMC streams of one (observation, component) pair.
const SEED_DENSITY: u64 = 0;
const SEED_NUMERATOR: u64 = 1;
const SEED_MOMENTS: u64 = 2;

/// Everything the E-step produces, stored component-major: `tau`, `e1`,
/// and `d` are g×n, `e2[h]` is p×n, `e3[h][j]` is p×p.
#[derive(Debug, Clone)]
pub struct EStepState {
    pub tau: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: Vec<DMatrix<f64>>,
    pub e3: Vec<Vec<DMatrix<f64>>>,
    /// Squared Mahalanobis distances d(y_j) under each component's Ω.
    pub d: DMatrix<f64>,
    /// Observed-data log likelihood of the parameters the step was run at.
    pub loglik: f64,
}

/// Per-observation, per-component density quantities shared by the full
/// E-step, start scoring, and discriminant analysis.
pub(crate) struct DensityPass {
    pub logf: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub den: DMatrix<f64>,
    pub qs: Vec<DMatrix<f64>>,
    pub loglik: f64,
}

pub(crate) fn density_pass(
    dat: &DataMatrix,
    params: &MixtureParams,
    cdf_tol: f64,
    seed: u64,
) -> Result<DensityPass> {
    let n = dat.n();
    let p = dat.p();
    let g = params.g();
    if p != params.p() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, mixture dimension {}",
            p,
            params.p()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("no observations".into()));
    }
    if dat.rows.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("data matrix contains a non-finite entry".into()));
    }
    let deriveds: Vec<ComponentDerived> = params
        .components
        .iter()
        .map(ComponentDerived::new)
        .collect::<Result<_>>()?;

    let mut logf = DMatrix::zeros(g, n);
    let mut d = DMatrix::zeros(g, n);
    let mut den = DMatrix::zeros(g, n);
    let mut qs: Vec<DMatrix<f64>> = vec![DMatrix::zeros(p, n); g];
    for j in 0..n {
        let y = dat.rows.row(j).transpose();
        for h in 0..g {
            let (lf, dv, qv, dn) = dmst_parts(
                &y,
                &params.components[h],
                &deriveds[h],
                cdf_tol,
                mix_seed(seed, &[j as u64, h as u64, SEED_DENSITY]),
            )?;
            if !lf.is_finite() {
                return Err(Error::NonFinite(format!(
                    "log density of observation {} under component {}",
                    j + 1,
                    h + 1
                )));
            }
            logf[(h, j)] = lf;
            d[(h, j)] = dv;
            den[(h, j)] = dn;
            qs[h].column_mut(j).copy_from(&qv);
        }
    }

    let ln_pro: Vec<f64> = params.pro.iter().map(|&w| clamped_ln(w)).collect();
    let mut logmix = vec![0.0; n];
    let mut terms = vec![0.0; g];
    for j in 0..n {
        for h in 0..g {
            terms[h] = ln_pro[h] + logf[(h, j)];
        }
        logmix[j] = log_sum_exp(&terms);
    }
    let loglik = pairwise_sum(&logmix);
    Ok(DensityPass { logf, d, den, qs, loglik })
}

/// Posterior membership matrix (g×n, columns summing to 1) from a density
/// pass.
pub(crate) fn posterior_from(pass: &DensityPass, params: &MixtureParams) -> DMatrix<f64> {
    let (g, n) = (pass.logf.nrows(), pass.logf.ncols());
    let ln_pro: Vec<f64> = params.pro.iter().map(|&w| clamped_ln(w)).collect();
    let mut tau = DMatrix::zeros(g, n);
    let mut terms = vec![0.0; g];
    for j in 0..n {
        for h in 0..g {
            terms[h] = ln_pro[h] + pass.logf[(h, j)];
        }
        let lm = log_sum_exp(&terms);
        let mut sum = 0.0;
        for h in 0..g {
            let t = (terms[h] - lm).exp();
            tau[(h, j)] = t;
            sum += t;
        }
        for h in 0..g {
            tau[(h, j)] /= sum;
        }
    }
    tau
}

/// Observed-data log likelihood only (no posteriors or moments); used to
/// score candidate starting points.
pub(crate) fn loglik_only(
    dat: &DataMatrix,
    params: &MixtureParams,
    cdf_tol: f64,
    seed: u64,
) -> Result<f64> {
    Ok(density_pass(dat, params, cdf_tol, seed)?.loglik)
}

/// Run the E-step at `params`, computing posteriors and all conditional
/// moments.
pub fn e_step(dat: &DataMatrix, params: &MixtureParams, opts: &FitOptions) -> Result<EStepState> {
    e_step_impl(dat, params, opts, true)
}

/// The symmetric-mixture driver passes `need_moments = false`: with every
/// δ = 0, e1 has the closed form (ν+p)/(ν+d) and e2/e3 never enter the
/// M-step, so no distribution-function or truncated-moment work is needed.
pub(crate) fn e_step_impl(
    dat: &DataMatrix,
    params: &MixtureParams,
    opts: &FitOptions,
    need_moments: bool,
) -> Result<EStepState> {
    let pass = density_pass(dat, params, opts.cdf_tol, opts.seed)?;
    let tau = posterior_from(&pass, params);
    let n = dat.n();
    let p = dat.p();
    let g = params.g();

    let mut e1 = DMatrix::zeros(g, n);
    let mut e2: Vec<DMatrix<f64>> = vec![DMatrix::zeros(p, n); g];
    let mut e3: Vec<Vec<DMatrix<f64>>> = (0..g).map(|_| vec![DMatrix::zeros(p, p); n]).collect();

    let deriveds: Vec<ComponentDerived> = params
        .components
        .iter()
        .map(ComponentDerived::new)
        .collect::<Result<_>>()?;

    for h in 0..g {
        let comp = &params.components[h];
        let symmetric = comp.is_symmetric();
        debug_assert!(
            need_moments || symmetric,
            "moment-free E-step requires zero skewness"
        );
        let nu = comp.nu;
        let pf = p as f64;
        let nu_star = nu + pf + 2.0;
        for j in 0..n {
            let dd = pass.d[(h, j)];
            let base = (nu + pf) / (nu + dd);
            e1[(h, j)] = base;
            if !need_moments || tau[(h, j)] < TAU_MOMENT_SKIP {
                continue;
            }
            let dn = pass.den[(h, j)];
            let q = pass.qs[h].column(j).clone_owned();
            let num = if symmetric {
                // q = 0 and Λ = I: both orthant probabilities are 2^{-p}
                // and the ratio is exactly 1.
                dn
            } else {
                if dn < CDF_FLOOR {
                    continue;
                }
                let inflated = &q * (nu_star / (nu + dd)).sqrt();
                mvt_cdf(
                    &inflated,
                    &deriveds[h].lambda,
                    nu_star,
                    opts.cdf_tol,
                    mix_seed(opts.seed, &[j as u64, h as u64, SEED_NUMERATOR]),
                )?
                .value
            };
            if num < CDF_FLOOR {
                continue;
            }
            e1[(h, j)] = base * num / dn;
            let scale = deriveds[h].lambda.matrix() * ((nu + dd) / nu_star);
            match trunc_t_moments_given(
                &q,
                &scale,
                nu_star,
                num,
                Some(dn),
                opts.cdf_tol,
                mix_seed(opts.seed, &[j as u64, h as u64, SEED_MOMENTS]),
            ) {
                Ok(tm) => {
                    e2[h].column_mut(j).copy_from(&(&tm.mean * e1[(h, j)]));
                    let sym = 0.5 * (&tm.second_moment + tm.second_moment.transpose());
                    e3[h][j] = sym * e1[(h, j)];
                }
                // far tail: the truncated mass underflowed; the weighted
                // contribution of this pair is negligible
                Err(Error::DegenerateTruncation) => {}
                Err(e) => return Err(e),
            }
        }
    }

    Ok(EStepState {
        tau,
        e1,
        e2,
        e3,
        d: pass.d,
        loglik: pass.loglik,
    })
}
