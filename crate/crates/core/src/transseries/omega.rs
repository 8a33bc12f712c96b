use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{PeriodicOrbit, RayTracer};
use crate::series::TruncatedSeries;
use crate::C64;

/// Modes below this fraction of `|c_0|` are treated as extraction noise.
pub const MODE_FLOOR: f64 = 1e-11;

/// Fourier data of the `ln M`-periodic function `omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaFourier {
    /// Period in `x = ln s`, i.e. `ln M`.
    pub period: f64,
    /// Mode numbers kept for evaluation (those above the noise floor).
    pub k: Vec<i32>,
    pub c: Vec<C64>,
    /// All extracted `c_k`, `k = -k_max..=k_max`.
    pub raw: Vec<C64>,
    pub k_max: i32,
    /// Grid parameters used for the extraction.
    pub s0: f64,
    pub grid_size: usize,
    /// Largest mismatch between a sample and the truncated Fourier sum at that sample.
    pub fit_residual: f64,
}

impl OmegaFourier {
    /// `omega(x)` for complex `x`; for `x = ln s` with `|arg s| <= pi/2`
    /// high modes are amplified by `e^{pi^2 |k| / ln M}`, which is why noise
    /// modes are dropped.
    pub fn eval(&self, x: C64) -> C64 {
        let nu = 2.0 * PI / self.period;
        self.k
            .iter()
            .zip(&self.c)
            .map(|(&k, &c)| c * (C64::new(0.0, nu * k as f64) * x).exp())
            .sum()
    }

    /// Coefficient of mode `k` as used in evaluation (zero if dropped).
    pub fn mode(&self, k: i32) -> C64 {
        self.k.iter().position(|&kk| kk == k).map_or(C64::new(0.0, 0.0), |i| self.c[i])
    }

    pub fn raw_coeff(&self, k: i32) -> C64 {
        if k.abs() > self.k_max {
            return C64::new(0.0, 0.0);
        }
        self.raw[(k + self.k_max) as usize]
    }

    pub fn c0(&self) -> C64 {
        self.raw_coeff(0)
    }

    /// `d = e^{-2 pi^2 / ln M}`, the decay ratio of successive modes quoted
    /// for Corollary-type bounds.
    pub fn predicted_decay(&self) -> f64 {
        (-2.0 * PI * PI / self.period).exp()
    }

    /// `e^{-pi^2 / ln M}`: the ratio forced by analyticity of `omega` in the
    /// strip `|Im x| < pi/2`, which is what the extracted modes follow.
    pub fn strip_decay(&self) -> f64 {
        (-PI * PI / self.period).exp()
    }

    /// Smallest `C` with `|c_k| <= C |c_0| d^{|k|}` over the kept modes.
    pub fn decay_constant_for(&self, d: f64) -> f64 {
        let c0 = self.c0().norm().max(f64::MIN_POSITIVE);
        self.k
            .iter()
            .zip(&self.c)
            .map(|(&k, c)| c.norm() / c0 / d.powi(k.abs()))
            .fold(1.0, f64::max)
    }

    /// [`Self::decay_constant_for`] at [`Self::predicted_decay`].
    pub fn decay_constant(&self) -> f64 {
        self.decay_constant_for(self.predicted_decay())
    }

    /// [`Self::decay_constant_for`] at [`Self::strip_decay`].
    pub fn strip_decay_constant(&self) -> f64 {
        self.decay_constant_for(self.strip_decay())
    }
}

/// `H(s) = g^{-1}(phi(e^{2 pi i t} e^{-s}) - L)` for real `s > 0`.
pub(crate) fn h_value(tracer: &RayTracer<'_>, orbit: &PeriodicOrbit, ginv: &TruncatedSeries, s: f64) -> C64 {
    let (v, _) = tracer.phi_at(orbit.angle.to_f64(), s);
    ginv.eval(v - orbit.landing())
}

/// Samples `omega(ln s) = s^{-b} g^{-1}(phi - L)` on a log-uniform grid over
/// one period `[ln s0 - ln M, ln s0)` and returns its Fourier coefficients.
///
/// `radius` bounds `|phi - L|` on the grid; `g^{-1}` is trusted there.
#[allow(clippy::too_many_arguments)]
pub fn omega_fourier(
    tracer: &RayTracer<'_>,
    orbit: &PeriodicOrbit,
    ginv: &TruncatedSeries,
    radius: f64,
    grid_size: usize,
    k_max: i32,
    s0: f64,
) -> Result<OmegaFourier> {
    assert!(grid_size.is_power_of_two() && grid_size >= 8);
    let period = orbit.period as f64 * std::f64::consts::LN_2;
    let b = orbit.exponent;
    let t = orbit.angle.to_f64();
    let l = orbit.landing();
    let xs: Vec<f64> = (0..=grid_size).map(|j| s0.ln() - period * j as f64 / grid_size as f64).collect();
    let mut h = Vec::with_capacity(grid_size + 1);
    for &x in &xs {
        let (v, _) = tracer.phi_at(t, x.exp());
        let dy = v - l;
        if !(dy.norm() <= radius) {
            return Err(Error::OutsideInversionRadius(format!(
                "|phi - L| = {:e} at s = {:e} exceeds {radius:e}",
                dy.norm(),
                x.exp()
            )));
        }
        h.push(ginv.eval(dy));
    }
    // H(s0 / M) = H(s0) / w, so arg H must drop by exactly arg w across the period
    let mut turn = 0.0;
    for pair in h.windows(2) {
        turn += (pair[1] / pair[0]).arg();
    }
    let expected = -orbit.multiplier.arg();
    if (turn - expected).abs() > PI / 2.0 {
        return Err(Error::BranchAmbiguity(format!(
            "H turns by {turn} over one period, expected {expected}"
        )));
    }
    let omega: Vec<C64> = xs[..grid_size]
        .iter()
        .zip(&h)
        .map(|(&x, &hv)| (-b * x).exp() * hv)
        .collect();
    let nu = 2.0 * PI / period;
    let raw: Vec<C64> = (-k_max..=k_max)
        .map(|k| {
            let sum: C64 = xs[..grid_size]
                .iter()
                .zip(&omega)
                .map(|(&x, &w)| w * C64::from_polar(1.0, -nu * k as f64 * x))
                .sum();
            sum / grid_size as f64
        })
        .collect();
    let c0 = raw[k_max as usize].norm();
    let (k, c): (Vec<i32>, Vec<C64>) = (-k_max..=k_max)
        .zip(raw.iter().copied())
        .filter(|&(k, c)| k == 0 || c.norm() > MODE_FLOOR * c0)
        .unzip();
    let mut out = OmegaFourier { period, k, c, raw, k_max, s0, grid_size, fit_residual: 0.0 };
    out.fit_residual = xs[..grid_size]
        .iter()
        .zip(&omega)
        .map(|(&x, &w)| (out.eval(C64::new(x, 0.0)) - w).norm())
        .fold(0.0, f64::max);
    Ok(out)
}
