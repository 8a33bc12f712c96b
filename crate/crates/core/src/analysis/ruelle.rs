use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{periodic_points_on_j, LandingOptions, PeriodicPointSet, QuadParam};
use crate::series::TruncatedSeries;

use super::pairwise_sum;

/// Grid step for `Phi_n`.
pub const PHI_GRID_STEP: f64 = 1e-3;

/// Root of the Ruelle-Bowen relation at period `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuelleDimension {
    pub n: usize,
    pub dimension: f64,
    /// Number of points of `fix(P_n)` used.
    pub points: usize,
    /// `A_n(D) - 1` at the returned `D`.
    pub residual: f64,
}

/// `A_n(D) = sum |P_n'|^{-D}`, summed pairwise over the sorted moduli.
fn a_n(moduli: &[f64], d: f64) -> f64 {
    let terms: Vec<f64> = moduli.iter().map(|m| m.powf(-d)).collect();
    pairwise_sum(&terms)
}

/// The `D` in `(0, 2]` with `sum |P_n'(z)|^{-D} = 1`, by bisection.
pub fn ruelle_from_moduli(n: usize, moduli: &[f64]) -> Result<RuelleDimension> {
    let mut sorted = moduli.to_vec();
    sorted.sort_by(f64::total_cmp);
    let a0 = a_n(&sorted, 0.0);
    let a2 = a_n(&sorted, 2.0);
    if !(a0 > 1.0 && a2 < 1.0) {
        return Err(Error::NoBracket { a0, a2 });
    }
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if a_n(&sorted, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    Ok(RuelleDimension { n, dimension: d, points: sorted.len(), residual: a_n(&sorted, d) - 1.0 })
}

/// Ruelle-Bowen dimension estimate from the repelling points of period `n`.
pub fn ruelle_dimension(
    param: &QuadParam,
    phi: &TruncatedSeries,
    n: usize,
    opts: &LandingOptions,
) -> Result<RuelleDimension> {
    let set = periodic_points_on_j(param, phi, n, opts)?;
    ruelle_from_set(&set)
}

pub fn ruelle_from_set(set: &PeriodicPointSet) -> Result<RuelleDimension> {
    let moduli: Vec<f64> = set.points_with_derivative().iter().map(|(_, d)| d.norm()).collect();
    ruelle_from_moduli(set.n, &moduli)
}

/// Distribution of `beta = log2 |P_n'| / n` over `fix(P_n)` on `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentDistribution {
    pub n: usize,
    /// Sorted.
    pub betas: Vec<f64>,
    /// `beta` grid `0, step, 2 step, ...` up to `beta_M + 0.1`.
    pub grid: Vec<f64>,
    /// `mu_n` on the grid, right-continuous.
    pub mu: Vec<f64>,
    /// `F_n = mu_n^{1/n}`.
    pub f: Vec<f64>,
    /// `Phi_n = -log2 F_n`; `+inf` where `mu_n = 0` (written as `null` in JSON).
    pub phi: Vec<f64>,
}

impl ExponentDistribution {
    pub fn from_betas(n: usize, betas: &[f64]) -> Self {
        assert!(n >= 1 && !betas.is_empty());
        let mut betas = betas.to_vec();
        betas.sort_by(f64::total_cmp);
        let beta_m = *betas.last().expect("nonempty");
        let steps = ((beta_m.max(0.0) + 0.1) / PHI_GRID_STEP).ceil() as usize;
        let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * PHI_GRID_STEP).collect();
        let mut dist = Self { n, betas, grid, mu: Vec::new(), f: Vec::new(), phi: Vec::new() };
        dist.mu = dist.grid.iter().map(|&b| dist.mu_at(b)).collect();
        dist.f = dist.mu.iter().map(|&m| m.powf(1.0 / n as f64)).collect();
        dist.phi = dist.f.iter().map(|&f| if f > 0.0 { -f.log2() } else { f64::INFINITY }).collect();
        dist
    }

    /// Fraction of points with `beta <= b`, evaluated at `b + 1e-12`.
    pub fn mu_at(&self, b: f64) -> f64 {
        let below = self.betas.partition_point(|&x| x <= b + 1e-12);
        below as f64 / self.betas.len() as f64
    }

    pub fn beta_max(&self) -> f64 {
        *self.betas.last().expect("nonempty")
    }

    /// `beta,mu_n,F_n,Phi_n` rows on the grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("beta,mu_n,F_n,Phi_n\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(out, "{:.3},{:.17e},{:.17e},{:.17e}", self.grid[i], self.mu[i], self.f[i], self.phi[i]);
        }
        out
    }
}

/// `Re b` at every repelling point of period dividing `n`.
pub fn exponent_distribution(set: &PeriodicPointSet) -> ExponentDistribution {
    ExponentDistribution::from_betas(set.n, &set.betas())
}

/// `max_s (-D s - Phi_n(s))` over the distribution grid.
pub fn legendre_check(dist: &ExponentDistribution, d: f64) -> f64 {
    dist.grid
        .iter()
        .zip(&dist.phi)
        .filter(|(_, p)| p.is_finite())
        .map(|(&s, &p)| -d * s - p)
        .fold(f64::NEG_INFINITY, f64::max)
}
