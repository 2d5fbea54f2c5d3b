//! Moments of the multivariate t distribution truncated to the positive
//! orthant.
//!
//! Both moments reduce to central-t distribution functions of dimension
//! p−1 (faces of the orthant, for the gradient identity behind the first
//! moment) and dimension p at reduced degrees of freedom (for the second
//! moment), plus a recursion to (p−1)-dimensional truncated first moments
//! for the off-diagonal second-moment terms. The reduction is exact; the
//! only approximation is the QMC evaluation of the t CDFs it calls.

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use super::mvt::mvt_cdf;
use super::special::{mix_seed, t_cdf};
use super::spd::SpdMatrix;
use crate::error::{Error, Result};

/// First and second moments of a positively truncated multivariate t.
#[derive(Debug, Clone)]
pub struct TruncatedMoments {
    /// E(X), elementwise nonnegative (the support is the positive orthant).
    pub mean: DVector<f64>,
    /// E(X Xᵀ), symmetric.
    pub second_moment: DMatrix<f64>,
}

/// log of the t normalizing constant c_{k,ν} = Γ((ν+k)/2)/(Γ(ν/2)(νπ)^{k/2}).
fn ln_c(k: usize, nu: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    ln_gamma(0.5 * (nu + k as f64)) - ln_gamma(0.5 * nu)
        - 0.5 * k as f64 * (nu * std::f64::consts::PI).ln()
}

/// P(X ≥ 0) for X ~ t_p(μ, Σ, ν), which equals the central CDF at μ.
fn orthant_prob(mu: &DVector<f64>, sigma: &DMatrix<f64>, nu: f64, tol: f64, seed: u64) -> Result<f64> {
    match mu.len() {
        0 => Ok(1.0),
        1 => Ok(t_cdf(mu[0] / sigma[(0, 0)].sqrt(), nu)),
        _ => {
            let spd = SpdMatrix::from_matrix(sigma)?;
            Ok(mvt_cdf(mu, &spd, nu, tol, seed)?.value)
        }
    }
}

struct FacePieces {
    /// (1 + a_i/ν)^{−(ν+p−2)/2} · |Σ*_i|^{1/2} / c_{p−1,ν−1}, the scalar
    /// prefactor of face i.
    prefactor: f64,
    /// Conditional location on the face x_i = 0.
    m_sub: DVector<f64>,
    /// Scale of the (p−1)-dimensional face distribution (ν−1 dof).
    sigma_sub: DMatrix<f64>,
}

fn face_pieces(i: usize, mu: &DVector<f64>, sigma: &DMatrix<f64>, nu: f64) -> FacePieces {
    let p = mu.len();
    let sii = sigma[(i, i)];
    let a_i = mu[i] * mu[i] / sii;
    let tail = -0.5 * (nu + p as f64 - 2.0) * (a_i / nu).ln_1p();
    let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
    let q = others.len();
    let mut schur = DMatrix::zeros(q, q);
    let mut m_sub = DVector::zeros(q);
    for (a, &r) in others.iter().enumerate() {
        m_sub[a] = mu[r] - sigma[(r, i)] * mu[i] / sii;
        for (c, &s) in others.iter().enumerate() {
            schur[(a, c)] = sigma[(r, s)] - sigma[(r, i)] * sigma[(i, s)] / sii;
        }
    }
    let scale = (nu + a_i) / (nu - 1.0);
    let sigma_sub = &schur * scale;
    let half_logdet = if q == 0 {
        0.0
    } else {
        match SpdMatrix::from_matrix(&sigma_sub) {
            Ok(s) => 0.5 * s.logdet(),
            Err(_) => f64::NEG_INFINITY, // degenerate face contributes nothing
        }
    };
    FacePieces {
        prefactor: (tail + half_logdet - ln_c(q, nu - 1.0)).exp(),
        m_sub,
        sigma_sub,
    }
}

/// Unnormalized orthant probability and first moment:
/// (α, ∫_{x≥0} x t_p(x; μ, Σ, ν) dx).
fn m1_raw(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    nu: f64,
    tol: f64,
    seed: u64,
    alpha_known: Option<f64>,
) -> Result<(f64, DVector<f64>)> {
    let p = mu.len();
    let alpha = match alpha_known {
        Some(a) => a,
        None => orthant_prob(mu, sigma, nu, tol, mix_seed(seed, &[0]))?,
    };
    let mut xi = DVector::zeros(p);
    for i in 0..p {
        let fp = face_pieces(i, mu, sigma, nu);
        let t_sub = orthant_prob(&fp.m_sub, &fp.sigma_sub, nu - 1.0, tol, mix_seed(seed, &[1, i as u64]))?;
        xi[i] = fp.prefactor * t_sub;
    }
    let spd = SpdMatrix::from_matrix(sigma)?;
    let coef = nu / (nu + p as f64 - 2.0) * (ln_c(p, nu) - 0.5 * spd.logdet()).exp();
    let m1 = mu * alpha + spd.matrix() * xi * coef;
    Ok((alpha, m1))
}

/// Moments given a precomputed normalizing probability `alpha` and, when the
/// caller already owns it, the CDF value of the second-moment volume term
/// (a central t CDF at μ with scale ν/(ν−2)·Σ and ν−2 degrees of freedom).
pub(crate) fn trunc_t_moments_given(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    nu: f64,
    alpha: f64,
    g_cdf: Option<f64>,
    tol: f64,
    seed: u64,
) -> Result<TruncatedMoments> {
    let p = mu.len();
    if p == 0 || sigma.nrows() != p || sigma.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "truncated moments: location has {} entries, scale is {}x{}",
            p,
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if !(nu > 2.0) {
        return Err(Error::DomainError(format!(
            "truncated second moment requires ν > 2 (the orthant is unbounded); got ν = {nu}"
        )));
    }
    if alpha < 1e-12 {
        return Err(Error::DegenerateTruncation);
    }
    let (_, m1) = m1_raw(mu, sigma, nu, tol, mix_seed(seed, &[10]), Some(alpha))?;
    let r1 = &m1 - mu * alpha;

    // Volume term G = ∫_{x≥0} (1 + d(x)/ν)^{−(ν+p−2)/2} dx.
    let g = {
        let scale = nu / (nu - 2.0);
        let cdf = match g_cdf {
            Some(v) => v,
            None => {
                let sigma_g = sigma * scale;
                orthant_prob(&mu.clone(), &sigma_g, nu - 2.0, tol, mix_seed(seed, &[11]))?
            }
        };
        let spd = SpdMatrix::from_matrix(sigma)?;
        let half_logdet_g = 0.5 * (spd.logdet() + p as f64 * scale.ln());
        (half_logdet_g - ln_c(p, nu - 2.0)).exp() * cdf
    };

    // Face matrix F: row m holds the first-moment face integrals against
    // (x − μ); the diagonal entry is −μ_m ξ_m.
    let mut f = DMatrix::zeros(p, p);
    for m in 0..p {
        let fp = face_pieces(m, mu, sigma, nu);
        if p == 1 {
            f[(0, 0)] = -mu[0] * fp.prefactor;
            continue;
        }
        let (a_sub, m1_sub) = m1_raw(
            &fp.m_sub,
            &fp.sigma_sub,
            nu - 1.0,
            tol,
            mix_seed(seed, &[12, m as u64]),
            None,
        )?;
        f[(m, m)] = -mu[m] * fp.prefactor * a_sub;
        let others: Vec<usize> = (0..p).filter(|&j| j != m).collect();
        for (c, &l) in others.iter().enumerate() {
            f[(m, l)] = fp.prefactor * (m1_sub[c] - mu[l] * a_sub);
        }
    }
    let spd = SpdMatrix::from_matrix(sigma)?;
    let coef = nu / (nu + p as f64 - 2.0) * (ln_c(p, nu) - 0.5 * spd.logdet()).exp();
    for m in 0..p {
        f[(m, m)] += g;
    }
    let mut h = spd.matrix() * f * coef;
    h = 0.5 * (&h + h.transpose());

    let mut second = mu * mu.transpose() * alpha + mu * r1.transpose() + &r1 * mu.transpose() + h;
    second = 0.5 * (&second + second.transpose());
    Ok(TruncatedMoments {
        mean: m1 / alpha,
        second_moment: second / alpha,
    })
}

/// Mean and second moment of X ~ t_p(μ, Σ, ν) truncated to the positive
/// orthant. Requires ν > 2: with an unbounded truncation region the second
/// moment does not exist at or below two degrees of freedom.
pub fn trunc_t_moments(
    mu: &DVector<f64>,
    sigma: &SpdMatrix,
    nu: f64,
    tol: f64,
    seed: u64,
) -> Result<TruncatedMoments> {
    let alpha = orthant_prob(mu, sigma.matrix(), nu, tol, mix_seed(seed, &[13]))?;
    trunc_t_moments_given(mu, sigma.matrix(), nu, alpha, None, tol, seed)
}
