//! EM fitting of FM-uMST mixtures: k-means + moment-based starts over an
//! a-grid, closed-form E and M steps, an Aitken-acceleration stopping
//! rule, and the symmetric FM-MT special case.

mod estep;
mod init;
mod kmeans;
mod mstep;

pub use estep::{e_step, EStepState};
pub use init::{init_params, init_params_with};
pub use kmeans::kmeans_partition;
pub use mstep::{m_step, update_dof};

pub(crate) use estep::{density_pass, posterior_from};

use nalgebra::{DMatrix, DVector};

use crate::dist::{ComponentParams, MixtureParams};
use crate::error::{Error, Result};
use crate::fmt::format_sig;
use crate::inference::information_criteria;
use crate::numerics::{mix_seed, SpdMatrix};
use crate::DataMatrix;

use estep::{e_step_impl, loglik_only};
use mstep::m_step_pinned;

/// Seed-path tag for the k-means stream (the E-step owns the unprefixed
/// per-observation paths).
const SEED_KMEANS: u64 = 0x6b6d;

/// Sign convention for the diagonal adjustment in the moment-based scale
/// start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitSign {
    /// Deflate: Σ⁽⁰⁾ = S − (1−a)·diag(s). Consistent with the skewness and
    /// location starts, which already claim (1−a) of the variance.
    Moment,
    /// Inflate: Σ⁽⁰⁾ = S + (1−a)·diag(s), the literal published display.
    Paper,
}

/// Tuning knobs for [`fmmst`] and [`fmmt`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Maximum EM iterations.
    pub itmax: usize,
    /// Aitken stopping tolerance on |L∞ − L⁽ᵏ⁺¹⁾|.
    pub eps: f64,
    /// k-means restarts when generating a start.
    pub nkmeans: usize,
    /// Absolute tolerance for t distribution-function evaluations.
    pub cdf_tol: f64,
    /// Master seed; every stochastic sub-computation derives from it.
    pub seed: u64,
    /// Upper bound for fitted degrees of freedom ("effectively Gaussian").
    pub nu_cap: f64,
    /// Candidate variance-split values for the moment start.
    pub a_grid: Vec<f64>,
    /// Print `Iteration <k> : loglik = <value>` lines.
    pub verbose: bool,
    /// Scale-start sign convention.
    pub init_sign: InitSign,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            itmax: 100,
            eps: 1e-3,
            nkmeans: 20,
            cdf_tol: 1e-5,
            seed: 0,
            nu_cap: 200.0,
            a_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            verbose: false,
            init_sign: InitSign::Moment,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if self.itmax < 1 {
            return Err(Error::InvalidParameter("itmax must be at least 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        if self.nkmeans < 1 {
            return Err(Error::InvalidParameter("nkmeans must be at least 1".into()));
        }
        if !(self.cdf_tol > 0.0 && self.cdf_tol < 1.0) {
            return Err(Error::InvalidParameter("cdf_tol must lie in (0,1)".into()));
        }
        if !(self.nu_cap > 0.01) {
            return Err(Error::InvalidParameter("nu_cap must exceed 0.01".into()));
        }
        if self.a_grid.is_empty() || self.a_grid.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvalidParameter(
                "a_grid must be a non-empty list inside (0,1)".into(),
            ));
        }
        Ok(())
    }
}

/// A partially specified mixture: any present field supplies values for
/// every component. Used both for user starting values (`initial`) and for
/// pinning parameters as known (`known`).
#[derive(Debug, Clone, Default)]
pub struct PartialParams {
    pub mu: Option<Vec<DVector<f64>>>,
    pub sigma: Option<Vec<DMatrix<f64>>>,
    pub delta: Option<Vec<DVector<f64>>>,
    pub dof: Option<Vec<f64>>,
    pub pro: Option<Vec<f64>>,
}

impl PartialParams {
    /// Capture every field of a fitted or constructed mixture.
    pub fn from_mixture(m: &MixtureParams) -> Self {
        Self {
            mu: Some(m.components.iter().map(|c| c.mu.clone()).collect()),
            sigma: Some(m.components.iter().map(|c| c.sigma.matrix().clone()).collect()),
            delta: Some(m.components.iter().map(|c| c.delta.clone()).collect()),
            dof: Some(m.components.iter().map(|c| c.nu).collect()),
            pro: Some(m.pro.clone()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_none()
            && self.sigma.is_none()
            && self.delta.is_none()
            && self.dof.is_none()
            && self.pro.is_none()
    }

    pub fn is_complete(&self) -> bool {
        self.mu.is_some()
            && self.sigma.is_some()
            && self.delta.is_some()
            && self.dof.is_some()
            && self.pro.is_some()
    }

    fn validate(&self, g: usize, p: usize) -> Result<()> {
        let check = |name: &str, len: usize| -> Result<()> {
            if len != g {
                return Err(Error::DimensionMismatch(format!(
                    "{name} supplies {len} components, expected {g}"
                )));
            }
            Ok(())
        };
        if let Some(v) = &self.mu {
            check("mu", v.len())?;
            if v.iter().any(|x| x.len() != p) {
                return Err(Error::DimensionMismatch(format!("mu entries must have length {p}")));
            }
        }
        if let Some(v) = &self.sigma {
            check("sigma", v.len())?;
            if v.iter().any(|m| m.nrows() != p || m.ncols() != p) {
                return Err(Error::DimensionMismatch(format!("sigma entries must be {p}x{p}")));
            }
        }
        if let Some(v) = &self.delta {
            check("delta", v.len())?;
            if v.iter().any(|x| x.len() != p) {
                return Err(Error::DimensionMismatch(format!(
                    "delta entries must have length {p}"
                )));
            }
        }
        if let Some(v) = &self.dof {
            check("dof", v.len())?;
        }
        if let Some(v) = &self.pro {
            check("pro", v.len())?;
        }
        Ok(())
    }

    /// Free parameters removed from the model by these pins.
    fn pinned_parameter_count(&self, g: usize, p: usize) -> usize {
        let mut k = 0;
        if self.mu.is_some() {
            k += g * p;
        }
        if self.sigma.is_some() {
            k += g * p * (p + 1) / 2;
        }
        if self.delta.is_some() {
            k += g * p;
        }
        if self.dof.is_some() {
            k += g;
        }
        if self.pro.is_some() {
            k += g.saturating_sub(1);
        }
        k
    }
}

/// Replace fields of `base` by any present in `part`.
fn overlay(base: MixtureParams, part: &PartialParams) -> Result<MixtureParams> {
    let g = base.g();
    let p = base.p();
    part.validate(g, p)?;
    let mut comps = Vec::with_capacity(g);
    for (h, c) in base.components.into_iter().enumerate() {
        let mu = match &part.mu {
            Some(v) => v[h].clone(),
            None => c.mu,
        };
        let sigma = match &part.sigma {
            Some(v) => SpdMatrix::from_matrix(&v[h])?,
            None => c.sigma,
        };
        let delta = match &part.delta {
            Some(v) => v[h].clone(),
            None => c.delta,
        };
        let nu = match &part.dof {
            Some(v) => v[h],
            None => c.nu,
        };
        comps.push(ComponentParams::new(mu, sigma, delta, nu)?);
    }
    let pro = match &part.pro {
        Some(v) => v.clone(),
        None => base.pro,
    };
    MixtureParams::new(comps, pro)
}

/// Build a full mixture from a complete [`PartialParams`].
fn assemble(part: &PartialParams, g: usize, p: usize) -> Result<MixtureParams> {
    part.validate(g, p)?;
    let mu = part.mu.as_ref().unwrap();
    let sigma = part.sigma.as_ref().unwrap();
    let delta = part.delta.as_ref().unwrap();
    let dof = part.dof.as_ref().unwrap();
    let pro = part.pro.as_ref().unwrap();
    let mut comps = Vec::with_capacity(g);
    for h in 0..g {
        comps.push(ComponentParams::new(
            mu[h].clone(),
            SpdMatrix::from_matrix(&sigma[h])?,
            delta[h].clone(),
            dof[h],
        )?);
    }
    MixtureParams::new(comps, pro.clone())
}

/// How the chosen starting point was produced.
#[derive(Debug, Clone)]
pub struct InitMeta {
    /// Variance-split value that won the grid search (absent for a fully
    /// user-supplied start).
    pub a: Option<f64>,
    pub description: String,
}

/// Everything a completed fit reports.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: MixtureParams,
    /// Posterior membership probabilities, g×n.
    pub tau: DMatrix<f64>,
    /// Maximum-posterior component per observation, 1-based.
    pub clusters: Vec<usize>,
    /// Observed-data log likelihood after every iteration; entry 0 is the
    /// starting value.
    pub loglik_trace: Vec<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Iterations on which the log likelihood decreased by more than
    /// 1e-8·(1+|L|); the one-step-late ν update permits this.
    pub monotonicity_violations: usize,
    pub init_meta: InitMeta,
}

/// Aitken acceleration stopping rule on three consecutive log likelihood
/// values: extrapolate the geometric limit L∞ and stop when it is within
/// eps of the newest value. Degenerate traces (flat, or ratio ≥ 1) fall
/// back to the plain increment test.
pub fn aitken_converged(l_km1: f64, l_k: f64, l_kp1: f64, eps: f64) -> bool {
    let denom = l_k - l_km1;
    let inc = l_kp1 - l_k;
    if denom.abs() < 1e-12 {
        return inc.abs() < eps;
    }
    let alpha = inc / denom;
    if alpha >= 1.0 {
        return inc.abs() < eps;
    }
    let l_inf = l_k + inc / (1.0 - alpha);
    (l_inf - l_kp1).abs() < eps
}

/// Fit a g-component FM-uMST mixture by maximum likelihood EM.
///
/// `initial` overrides any generated starting values field-by-field;
/// `known` pins fields for the whole fit (they are never re-estimated and
/// appear unchanged in the result).
pub fn fmmst(
    g: usize,
    dat: &DataMatrix,
    initial: Option<&PartialParams>,
    known: Option<&PartialParams>,
    opts: &FitOptions,
) -> Result<FitResult> {
    fit_driver(g, dat, initial, known, opts, false)
}

/// Fit a g-component mixture of symmetric multivariate t distributions:
/// the same driver with every skewness vector pinned at zero, using the
/// closed-form symmetric E-step (no distribution-function evaluations).
pub fn fmmt(
    g: usize,
    dat: &DataMatrix,
    initial: Option<&PartialParams>,
    known: Option<&PartialParams>,
    opts: &FitOptions,
) -> Result<FitResult> {
    let p = dat.p();
    let zeros = vec![DVector::zeros(p); g];
    let mut known2 = known.cloned().unwrap_or_default();
    if let Some(d) = &known2.delta {
        if d.iter().any(|v| v.iter().any(|&x| x != 0.0)) {
            return Err(Error::InvalidParameter(
                "symmetric fit requires zero skewness in `known`".into(),
            ));
        }
    }
    known2.delta = Some(zeros.clone());
    let mut initial2 = initial.cloned().unwrap_or_default();
    if let Some(d) = &initial2.delta {
        if d.iter().any(|v| v.iter().any(|&x| x != 0.0)) {
            return Err(Error::InvalidParameter(
                "symmetric fit requires zero skewness in `initial`".into(),
            ));
        }
    }
    initial2.delta = Some(zeros);
    fit_driver(g, dat, Some(&initial2), Some(&known2), opts, true)
}

fn resolve_start(
    g: usize,
    dat: &DataMatrix,
    initial: &PartialParams,
    known: &PartialParams,
    opts: &FitOptions,
) -> Result<(MixtureParams, InitMeta)> {
    let p = dat.p();
    if initial.is_complete() {
        let params = overlay(assemble(initial, g, p)?, known)?;
        return Ok((
            params,
            InitMeta {
                a: None,
                description: "user-supplied starting values".into(),
            },
        ));
    }

    let labels = kmeans_partition(dat, g, opts.nkmeans, mix_seed(opts.seed, &[SEED_KMEANS]))?;
    let mut best: Option<(f64, f64, MixtureParams)> = None;
    let mut last_err: Option<Error> = None;
    for &a in &opts.a_grid {
        let base = match init_params_with(dat, &labels, a, opts.init_sign) {
            Ok(b) => b,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let cand = match overlay(base, initial).and_then(|c| overlay(c, known)) {
            Ok(c) => c,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let score = match loglik_only(dat, &cand, opts.cdf_tol, opts.seed) {
            Ok(s) if s.is_finite() => s,
            Ok(_) => continue,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        // strict improvement keeps the smaller a on ties
        if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
            best = Some((score, a, cand));
        }
    }
    match best {
        Some((_, a, params)) => Ok((
            params,
            InitMeta {
                a: Some(a),
                description: format!("k-means partition with moment start, a = {a}"),
            },
        )),
        None => Err(last_err
            .unwrap_or_else(|| Error::SingularStart("no usable start on the a-grid".into()))),
    }
}

fn fit_driver(
    g: usize,
    dat: &DataMatrix,
    initial: Option<&PartialParams>,
    known: Option<&PartialParams>,
    opts: &FitOptions,
    symmetric: bool,
) -> Result<FitResult> {
    opts.validate()?;
    if g == 0 {
        return Err(Error::InvalidParameter("need at least one component".into()));
    }
    if dat.p() == 0 {
        return Err(Error::InvalidParameter("data has no columns".into()));
    }
    if dat.n() <= g {
        return Err(Error::InvalidParameter(format!(
            "{} observations cannot support {} components",
            dat.n(),
            g
        )));
    }
    let empty = PartialParams::default();
    let initial = initial.unwrap_or(&empty);
    let known = known.unwrap_or(&empty);
    initial.validate(g, dat.p())?;
    known.validate(g, dat.p())?;

    let (mut params, init_meta) = resolve_start(g, dat, initial, known, opts)?;
    let need_moments = !symmetric;

    let mut est = e_step_impl(dat, &params, opts, need_moments)?;
    if !est.loglik.is_finite() {
        return Err(Error::NonFinite("log likelihood at the starting point".into()));
    }
    let mut trace = vec![est.loglik];
    let mut violations = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;
    for k in 1..=opts.itmax {
        params = m_step_pinned(dat, &est, &params, opts, known)?;
        est = e_step_impl(dat, &params, opts, need_moments)?;
        let l = est.loglik;
        if !l.is_finite() {
            return Err(Error::NonFinite(format!("log likelihood at iteration {k}")));
        }
        let l_prev = *trace.last().unwrap();
        if l < l_prev - 1e-8 * (1.0 + l_prev.abs()) {
            violations += 1;
        }
        trace.push(l);
        iterations = k;
        if opts.verbose {
            println!("Iteration {k} : loglik = {}", format_sig(l, 10));
        }
        let m = trace.len();
        if m >= 3 && aitken_converged(trace[m - 3], trace[m - 2], trace[m - 1], opts.eps) {
            converged = true;
            break;
        }
    }

    let loglik = *trace.last().unwrap();
    let (aic, bic) = information_criteria(
        loglik,
        g,
        dat.p(),
        dat.n(),
        known.pinned_parameter_count(g, dat.p()),
    );
    let clusters = argmax_columns(&est.tau);
    Ok(FitResult {
        params,
        tau: est.tau,
        clusters,
        loglik_trace: trace,
        loglik,
        aic,
        bic,
        iterations,
        converged,
        monotonicity_violations: violations,
        init_meta,
    })
}

/// 1-based row index of each column's maximum, smallest index on ties.
pub(crate) fn argmax_columns(tau: &DMatrix<f64>) -> Vec<usize> {
    let (g, n) = (tau.nrows(), tau.ncols());
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut arg = 0usize;
        let mut best = tau[(0, j)];
        for h in 1..g {
            if tau[(h, j)] > best {
                best = tau[(h, j)];
                arg = h;
            }
        }
        out.push(arg + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::rfmmst;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn aitken_geometric_trace() {
        // L_k = 10 − 2^{−k}: α = 1/2, L∞ = 10 exactly
        let l = |k: i32| 10.0 - 2f64.powi(-k);
        assert!(aitken_converged(l(8), l(9), l(10), 1e-3));
        assert!(!aitken_converged(l(1), l(2), l(3), 1e-3));
        // flat trace converges trivially
        assert!(aitken_converged(5.0, 5.0, 5.0, 1e-3));
        // growing gaps take the fallback path and fail it
        assert!(!aitken_converged(0.0, 1.0, 3.0, 1e-3));
    }

    fn synthetic_mixture() -> MixtureParams {
        let c1 = ComponentParams::new(
            dvector![0.0, 0.0],
            SpdMatrix::from_matrix(&dmatrix![1.0, 0.2; 0.2, 1.0]).unwrap(),
            dvector![2.0, 1.0],
            6.0,
        )
        .unwrap();
        let c2 = ComponentParams::new(
            dvector![8.0, 8.0],
            SpdMatrix::from_matrix(&dmatrix![1.0, -0.3; -0.3, 1.5]).unwrap(),
            dvector![-1.0, 1.5],
            8.0,
        )
        .unwrap();
        MixtureParams::new(vec![c1, c2], vec![0.45, 0.55]).unwrap()
    }

    fn quick_opts() -> FitOptions {
        FitOptions {
            itmax: 25,
            eps: 5e-3,
            nkmeans: 4,
            cdf_tol: 1e-4,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn fit_recovers_separated_components() {
        let truth = synthetic_mixture();
        let (rows, labels) = rfmmst(250, &truth, 5).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let opts = quick_opts();
        let fit = fmmst(2, &dat, None, None, &opts).unwrap();
        assert_eq!(fit.loglik, *fit.loglik_trace.last().unwrap());
        assert!(fit.iterations >= 1);
        // clusters must be argmax of tau
        assert_eq!(fit.clusters, argmax_columns(&fit.tau));
        // agreement with the generating labels up to label switching
        let mut same = 0usize;
        let mut flipped = 0usize;
        for (a, b) in fit.clusters.iter().zip(&labels) {
            if a == b {
                same += 1;
            } else {
                flipped += 1;
            }
        }
        let agree = same.max(flipped) as f64 / labels.len() as f64;
        assert!(agree > 0.9, "label agreement only {agree}");
        // trace should climb
        assert!(fit.loglik > fit.loglik_trace[0]);
        assert!(fit.monotonicity_violations <= fit.iterations / 4);
    }

    #[test]
    fn determinism_of_the_full_fit() {
        let truth = synthetic_mixture();
        let (rows, _) = rfmmst(120, &truth, 2).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let mut opts = quick_opts();
        opts.itmax = 6;
        let a = fmmst(2, &dat, None, None, &opts).unwrap();
        let b = fmmst(2, &dat, None, None, &opts).unwrap();
        assert_eq!(a.loglik_trace, b.loglik_trace);
        for h in 0..2 {
            assert_eq!(a.params.components[h].mu, b.params.components[h].mu);
            assert_eq!(
                a.params.components[h].sigma.matrix(),
                b.params.components[h].sigma.matrix()
            );
            assert_eq!(a.params.components[h].delta, b.params.components[h].delta);
            assert_eq!(a.params.components[h].nu, b.params.components[h].nu);
        }
        assert_eq!(a.clusters, b.clusters);
    }

    #[test]
    fn symmetric_fit_equals_skew_fit_with_pinned_delta() {
        let truth = synthetic_mixture();
        let (rows, _) = rfmmst(150, &truth, 9).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let mut opts = quick_opts();
        opts.itmax = 8;
        let known = PartialParams {
            delta: Some(vec![dvector![0.0, 0.0]; 2]),
            ..Default::default()
        };
        let a = fmmt(2, &dat, None, None, &opts).unwrap();
        let b = fmmst(2, &dat, None, Some(&known), &opts).unwrap();
        assert_eq!(a.loglik_trace.len(), b.loglik_trace.len());
        for (x, y) in a.loglik_trace.iter().zip(&b.loglik_trace) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        for comp in &a.params.components {
            assert!(comp.is_symmetric());
        }
        // pinning δ removes g·p free parameters from the criteria
        assert!((b.aic - (2.0 * 4.0)).abs() > 0.0);
        assert_eq!(a.aic, b.aic);
    }

    #[test]
    fn pinned_dof_appears_unchanged() {
        let truth = synthetic_mixture();
        let (rows, _) = rfmmst(100, &truth, 3).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let mut opts = quick_opts();
        opts.itmax = 4;
        let known = PartialParams {
            dof: Some(vec![5.5, 9.25]),
            ..Default::default()
        };
        let fit = fmmst(2, &dat, None, Some(&known), &opts).unwrap();
        assert_eq!(fit.params.components[0].nu, 5.5);
        assert_eq!(fit.params.components[1].nu, 9.25);
    }

    #[test]
    fn complete_initial_skips_generation() {
        let truth = synthetic_mixture();
        let (rows, _) = rfmmst(100, &truth, 3).unwrap();
        let dat = DataMatrix::new(rows, vec!["x".into(), "y".into()]).unwrap();
        let mut opts = quick_opts();
        opts.itmax = 3;
        let initial = PartialParams::from_mixture(&truth);
        let fit = fmmst(2, &dat, Some(&initial), None, &opts).unwrap();
        assert!(fit.init_meta.a.is_none());
        assert!(fit.loglik.is_finite());
    }

    #[test]
    fn sample_stats_recovered_with_everything_pinned_but_mean_cov() {
        // g=1, δ pinned 0, ν pinned huge: the fixed point is the sample
        // mean and maximum likelihood covariance. The scale-weight spread
        // across points is of order (d_j − p)/ν, so ν must sit well above
        // the 1e-6 comparison tolerance times typical d values.
        let c = ComponentParams::new(
            dvector![1.0, 2.0],
            SpdMatrix::from_matrix(&dmatrix![1.5, 0.4; 0.4, 0.9]).unwrap(),
            dvector![0.0, 0.0],
            1e6,
        )
        .unwrap();
        let truth = MixtureParams::new(vec![c], vec![1.0]).unwrap();
        let (rows, _) = rfmmst(200, &truth, 17).unwrap();
        let dat = DataMatrix::new(rows.clone(), vec!["x".into(), "y".into()]).unwrap();
        let mut opts = quick_opts();
        opts.itmax = 60;
        opts.eps = 1e-10;
        let known = PartialParams {
            delta: Some(vec![dvector![0.0, 0.0]]),
            dof: Some(vec![1e9]),
            ..Default::default()
        };
        let fit = fmmst(1, &dat, None, Some(&known), &opts).unwrap();
        let n = dat.n() as f64;
        let mean = DVector::from_fn(2, |i, _| rows.column(i).sum() / n);
        let mut cov = DMatrix::zeros(2, 2);
        for j in 0..dat.n() {
            let r = rows.row(j).transpose() - &mean;
            cov += &r * r.transpose();
        }
        cov /= n;
        let got = &fit.params.components[0];
        assert!((got.mu.clone() - &mean).norm() / mean.norm() < 1e-6);
        assert!((got.sigma.matrix() - &cov).norm() / cov.norm() < 1e-6);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        let dat = DataMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0], vec!["a".into(), "b".into()])
            .unwrap();
        let opts = FitOptions::default();
        assert!(fmmst(2, &dat, None, None, &opts).is_err()); // n == g
        let mut bad = FitOptions::default();
        bad.eps = 0.0;
        let dat5 = DataMatrix::new(DMatrix::identity(5, 2), vec!["a".into(), "b".into()]).unwrap();
        assert!(fmmst(1, &dat5, None, None, &bad).is_err());
    }
}
