//! Numerical substrate: special functions, SPD linear algebra, the
//! multivariate t CDF, and positively truncated t moments.

mod bvt;
mod mvt;
mod special;
mod spd;
mod truncated;

pub use mvt::{mvt_cdf, mvt_cdf_with_budget, mvt_pdf_log, CdfEstimate, DEFAULT_CDF_BUDGET};
pub use special::{
    chi_scale_exact, digamma, gamma_quantile, log_sum_exp, mix_seed, norm_cdf, norm_pdf,
    norm_quantile, pairwise_sum, t_cdf, t_logpdf,
};
pub use spd::{mahalanobis, SpdMatrix};
pub use truncated::{trunc_t_moments, TruncatedMoments};

pub(crate) use special::digamma_pos;
pub(crate) use truncated::trunc_t_moments_given;
