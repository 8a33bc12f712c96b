//! Exponent averages, dimension estimates, exponent distributions and
//! normality of binary expansions.

mod exponent;
mod holder;
mod normality;
mod ruelle;

pub use exponent::{beta_e, dh_lower_bound, BetaE, DEFAULT_RHO_SCHEDULE};
pub use holder::{holder_estimate, HolderFit};
pub use normality::{
    count_non_normal_brute, count_normal, hoeffding_bound, hoeffding_tail, non_normal_fraction, normality_classify,
    NormalityVerdict,
};
pub use ruelle::{
    exponent_distribution, legendre_check, ruelle_dimension, ruelle_from_moduli, ruelle_from_set,
    ExponentDistribution, RuelleDimension, PHI_GRID_STEP,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::polymap::{periodic_points_on_j, LandingOptions, QuadParam};
use crate::series::TruncatedSeries;

/// Sum in a fixed binary-tree order, independent of threading.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Dimension summary for one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub beta_e: f64,
    #[serde(rename = "bE_imag_mod_winding")]
    pub b_e_imag_mod_winding: f64,
    pub winding: i64,
    /// `1 / beta_E`.
    pub lower_bound: f64,
    pub ruelle_d: f64,
    pub ruelle_n: usize,
    pub residuals: DimensionResiduals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionResiduals {
    /// Change of `beta_E` when the radius closest to 1 is dropped from the extrapolation.
    pub beta_extrapolation: f64,
    /// `A_n(D) - 1` at the Ruelle root.
    pub ruelle: f64,
    pub periodic_points: usize,
    pub expected_points: Option<usize>,
}

/// `beta_E`, the bound `1 / beta_E`, and the Ruelle-Bowen root at period `n`.
pub fn dimension_report(
    param: &QuadParam,
    phi: &TruncatedSeries,
    n_theta: usize,
    rho_schedule: &[f64],
    n: usize,
    landing: &LandingOptions,
) -> Result<(DimensionReport, ExponentDistribution)> {
    let be = beta_e(param, phi, n_theta, rho_schedule)?;
    let lower = dh_lower_bound(be.beta_e)?;
    let set = periodic_points_on_j(param, phi, n, landing)?;
    let ruelle = ruelle_from_set(&set)?;
    let dist = exponent_distribution(&set);
    let report = DimensionReport {
        beta_e: be.beta_e,
        b_e_imag_mod_winding: be.b_imag_mod_winding,
        winding: be.winding,
        lower_bound: lower,
        ruelle_d: ruelle.dimension,
        ruelle_n: n,
        residuals: DimensionResiduals {
            beta_extrapolation: be.extrapolation_change,
            ruelle: ruelle.residual,
            periodic_points: set.count(),
            expected_points: set.expected_count,
        },
    };
    Ok((report, dist))
}
