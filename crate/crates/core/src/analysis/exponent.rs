use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{PolyMap, QuadParam};
use crate::series::TruncatedSeries;

use super::pairwise_sum;

/// Radii used by default for the extrapolation toward the circle.
pub const DEFAULT_RHO_SCHEDULE: [f64; 4] = [0.9, 0.95, 0.975, 0.9875];

/// Circle average of `log2 P'(phi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaE {
    /// Extrapolated `Re b_E`.
    pub beta_e: f64,
    /// Net turns of `P'(phi)` around the circle closest to `|z| = 1`.
    pub winding: i64,
    /// Extrapolated `Im b_E` reduced modulo `2 pi / ln 2`.
    pub b_imag_mod_winding: f64,
    /// `(rho, Re, Im)` averages before extrapolation.
    pub per_rho: Vec<(f64, f64, f64)>,
    /// Change of the extrapolated value when the radius closest to `1` is left out.
    pub extrapolation_change: f64,
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// `b_E = int_0^1 log2 P'(phi(e^{2 pi i x})) dx`.
///
/// The trapezoid rule is applied on each circle `|z| = rho` of the schedule,
/// and the averages are extrapolated polynomially in `-ln rho` to the unit
/// circle.
pub fn beta_e(param: &QuadParam, phi: &TruncatedSeries, n_theta: usize, rho_schedule: &[f64]) -> Result<BetaE> {
    if n_theta < 1 << 10 {
        return Err(Error::DomainError(format!("n_theta = {n_theta} is below 1024")));
    }
    if rho_schedule.is_empty() || rho_schedule.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::DomainError("rho schedule must be nonempty inside (0, 1)".into()));
    }
    let mut per_rho = Vec::with_capacity(rho_schedule.len());
    let mut winding = 0;
    for &rho in rho_schedule {
        let d: Vec<_> = phi.eval_circle(rho, n_theta).into_iter().map(|x| param.deriv(x)).collect();
        if let Some(small) = d.iter().map(|v| v.norm()).find(|&m| !(m >= 1e-8)) {
            return Err(Error::DerivativeVanishes(small));
        }
        let re: Vec<f64> = d.iter().map(|v| v.norm().log2()).collect();
        let mut arg = Vec::with_capacity(n_theta);
        let mut a = d[0].arg();
        arg.push(a);
        for pair in d.windows(2) {
            a += (pair[1] / pair[0]).arg();
            arg.push(a);
        }
        let total = a + (d[0] / d[n_theta - 1]).arg();
        winding = ((total - d[0].arg()) / (2.0 * PI)).round() as i64;
        let im: Vec<f64> = arg.iter().map(|x| x / LN_2).collect();
        per_rho.push((rho, pairwise_sum(&re) / n_theta as f64, pairwise_sum(&im) / n_theta as f64));
    }
    let xs: Vec<f64> = per_rho.iter().map(|p| -p.0.ln()).collect();
    let re: Vec<f64> = per_rho.iter().map(|p| p.1).collect();
    let im: Vec<f64> = per_rho.iter().map(|p| p.2).collect();
    let beta = extrapolate_to_zero(&xs, &re);
    let change = if xs.len() > 1 {
        (beta - extrapolate_to_zero(&xs[..xs.len() - 1], &re[..re.len() - 1])).abs()
    } else {
        f64::NAN
    };
    let period = 2.0 * PI / LN_2;
    Ok(BetaE {
        beta_e: beta,
        winding,
        b_imag_mod_winding: extrapolate_to_zero(&xs, &im).rem_euclid(period),
        per_rho,
        extrapolation_change: change,
    })
}

/// `1 / beta_E`, after checking `beta_E >= 1/2`.
pub fn dh_lower_bound(beta_e: f64) -> Result<f64> {
    if !(beta_e > 0.0) {
        return Err(Error::DomainError(format!("beta_E = {beta_e} is not positive")));
    }
    if beta_e < 0.5 - 1e-6 {
        return Err(Error::InvariantViolation(format!("beta_E = {beta_e} is below 1/2")));
    }
    Ok(1.0 / beta_e)
}
