//! M-step: closed-form updates for π, μ, δ, Σ and the one-step-late
//! degrees-of-freedom root solve, in that fixed order.

use nalgebra::{DMatrix, DVector};

use crate::dist::{ComponentParams, MixtureParams};
use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, SpdMatrix};
use crate::numerics::digamma_pos;
use crate::DataMatrix;

use super::estep::EStepState;
use super::{FitOptions, PartialParams};

/// One M-step from the expectations in `est`, with no pinned parameters.
pub fn m_step(
    dat: &DataMatrix,
    est: &EStepState,
    params: &MixtureParams,
    opts: &FitOptions,
) -> Result<MixtureParams> {
    m_step_pinned(dat, est, params, opts, &PartialParams::default())
}

/// As [`m_step`], but any field present in `known` is copied through
/// unchanged instead of being re-estimated. Values pinned earlier in the
/// update order are seen by the later updates (δ uses the pinned μ, Σ uses
/// the pinned δ, and so on).
pub(crate) fn m_step_pinned(
    dat: &DataMatrix,
    est: &EStepState,
    params: &MixtureParams,
    opts: &FitOptions,
    known: &PartialParams,
) -> Result<MixtureParams> {
    let n = dat.n();
    let p = dat.p();
    let g = params.g();
    if est.tau.ncols() != n || est.tau.nrows() != g {
        return Err(Error::DimensionMismatch(format!(
            "E-step state is {}x{}, expected {}x{}",
            est.tau.nrows(),
            est.tau.ncols(),
            g,
            n
        )));
    }

    let nf = n as f64;
    let threshold = (1e-8 * nf).max(p as f64 + 1.0);
    let mut masses = Vec::with_capacity(g);
    for h in 0..g {
        let row: Vec<f64> = (0..n).map(|j| est.tau[(h, j)]).collect();
        let mass = pairwise_sum(&row);
        if mass < threshold {
            return Err(Error::EmptyComponent {
                component: h + 1,
                mass,
                threshold,
            });
        }
        masses.push(mass);
    }

    let pro: Vec<f64> = match &known.pro {
        Some(pins) => pins.clone(),
        None => {
            let raw: Vec<f64> = masses.iter().map(|&m| m / nf).collect();
            let total: f64 = raw.iter().sum();
            raw.iter().map(|&w| w / total).collect()
        }
    };

    let mut components = Vec::with_capacity(g);
    for h in 0..g {
        let old = &params.components[h];

        // μ: weighted mean of e1·y − Δ·e2 with weights τ
        let mut s_e1 = 0.0;
        let mut b = DVector::zeros(p);
        for j in 0..n {
            let t = est.tau[(h, j)];
            if t == 0.0 {
                continue;
            }
            let e1 = est.e1[(h, j)];
            s_e1 += t * e1;
            let y = dat.rows.row(j).transpose();
            let e2 = est.e2[h].column(j);
            for i in 0..p {
                b[i] += t * (e1 * y[i] - old.delta[i] * e2[i]);
            }
        }
        let mu = match &known.mu {
            Some(pins) => pins[h].clone(),
            None => &b / s_e1,
        };

        // cross moments against the new center
        let mut r = DMatrix::zeros(p, p); // Σ τ (y−μ) e2ᵀ
        let mut s3 = DMatrix::zeros(p, p); // Σ τ e3
        let mut w: DMatrix<f64> = DMatrix::zeros(p, p); // Σ τ e1 (y−μ)(y−μ)ᵀ
        for j in 0..n {
            let t = est.tau[(h, j)];
            if t == 0.0 {
                continue;
            }
            let y = dat.rows.row(j).transpose();
            let resid = &y - &mu;
            let e2 = est.e2[h].column(j);
            let te1 = t * est.e1[(h, j)];
            for a in 0..p {
                for c in 0..p {
                    r[(a, c)] += t * resid[a] * e2[c];
                    w[(a, c)] += te1 * resid[a] * resid[c];
                }
            }
            s3 += t * &est.e3[h][j];
        }

        // δ: solve (Σ_old⁻¹ ⊙ Σ τ e3) δ = diag(Σ_old⁻¹ Σ τ (y−μ) e2ᵀ)
        let delta = match &known.delta {
            Some(pins) => pins[h].clone(),
            None => {
                let sigma_inv = old.sigma.inverse();
                let lhs = sigma_inv.component_mul(&s3);
                let rhs = (&sigma_inv * &r).diagonal();
                match lhs.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => lhs
                        .lu()
                        .solve(&rhs)
                        .ok_or_else(|| Error::DomainError("singular skewness update system".into()))?,
                }
            }
        };

        // Σ: (Δ S₃ Δ − R Δ − Δ Rᵀ + W) / Σ τ, with the new δ
        let sigma = match &known.sigma {
            Some(pins) => SpdMatrix::from_matrix(&pins[h])?,
            None => {
                let mut m = DMatrix::zeros(p, p);
                for a in 0..p {
                    for c in 0..p {
                        m[(a, c)] = (delta[a] * s3[(a, c)] * delta[c]
                            - r[(a, c)] * delta[c]
                            - delta[a] * r[(c, a)]
                            + w[(a, c)])
                            / masses[h];
                    }
                }
                let m = 0.5 * (&m + m.transpose());
                SpdMatrix::from_matrix(&m)?
            }
        };

        // ν: one-step-late score equation, other quantities frozen
        let nu = match &known.dof {
            Some(pins) => pins[h],
            None => {
                let tau_row: Vec<f64> = (0..n).map(|j| est.tau[(h, j)]).collect();
                let d_row: Vec<f64> = (0..n).map(|j| est.d[(h, j)]).collect();
                update_dof(old.nu, &tau_row, &d_row, p, opts)?
            }
        };

        components.push(ComponentParams::new(mu, sigma, delta, nu)?);
    }

    MixtureParams::new(components, pro)
}

/// Solve log(ν/2) − ψ(ν/2) = RHS for ν on [0.01, nu_cap], where RHS is the
/// τ-weighted average of log((ν₀+d_j)/2) − ψ((ν₀+p)/2) + (ν₀+p)/(ν₀+d_j)
/// minus one, with ν₀ the previous value. The left side is strictly
/// decreasing, so when it is still above RHS at the cap the cap itself is
/// returned (an effectively Gaussian tail), and 0.01 is returned when even
/// the lower end falls below RHS.
pub fn update_dof(
    nu_prev: f64,
    tau_row: &[f64],
    d_row: &[f64],
    p: usize,
    opts: &FitOptions,
) -> Result<f64> {
    if !(nu_prev > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "previous degrees of freedom must be positive, got {nu_prev}"
        )));
    }
    if tau_row.len() != d_row.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} distances",
            tau_row.len(),
            d_row.len()
        )));
    }
    let pf = p as f64;
    let dig = digamma_pos(0.5 * (nu_prev + pf));
    let terms: Vec<f64> = tau_row
        .iter()
        .zip(d_row)
        .map(|(&t, &d)| t * ((0.5 * (nu_prev + d)).ln() - dig + (nu_prev + pf) / (nu_prev + d)))
        .collect();
    let total = pairwise_sum(tau_row);
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("zero total weight in dof update".into()));
    }
    let rhs = pairwise_sum(&terms) / total - 1.0;

    let f = |nu: f64| (0.5 * nu).ln() - digamma_pos(0.5 * nu) - rhs;
    let lo = 0.01;
    let hi = opts.nu_cap;
    let f_hi = f(hi);
    if f_hi > 0.0 {
        return Ok(hi);
    }
    let f_lo = f(lo);
    if f_lo < 0.0 {
        return Ok(lo);
    }
    Ok(brent_root(f, lo, hi, f_lo, f_hi, 1e-12))
}

/// Brent's method for a root of f bracketed by [x1, x2] (f(x1)·f(x2) ≤ 0):
/// inverse quadratic interpolation guarded by bisection.
fn brent_root(f: impl Fn(f64) -> f64, x1: f64, x2: f64, f1: f64, f2: f64, xtol: f64) -> f64 {
    let (mut a, mut b, mut c) = (x1, x2, x2);
    let (mut fa, mut fb, mut fc) = (f1, f2, f2);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut pp, mut qq);
            if a == c {
                pp = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                let q = fa / fc;
                let r = fb / fc;
                pp = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                qq = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if pp > 0.0 {
                qq = -qq;
            }
            pp = pp.abs();
            let min1 = 3.0 * xm * qq - (tol1 * qq).abs();
            let min2 = (e * qq).abs();
            if 2.0 * pp < min1.min(min2) {
                e = d;
                d = pp / qq;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    b
}
