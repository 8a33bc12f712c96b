use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::series::convolve_direct;
use crate::C64;

use super::TransseriesModel;

/// Coefficients `A_{n,k} = a_n [omega^n]_k` of the double expansion
/// `phi = L + sum_{n,k} A_{n,k} s^{n b} e^{2 pi i k ln s / ln M}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub n_max: usize,
    /// Mode cutoff of the input `omega`; row `n` spans `|k| <= n k_max`.
    pub k_max: i32,
    pub landing: C64,
    pub b: C64,
    pub period: f64,
    /// `rows[n - 1][k + n k_max]`.
    pub rows: Vec<Vec<C64>>,
    /// Fitted `eps` and `d` with `|A_{n,k}| <= C eps^n d^{|k|}`.
    pub decay_eps: f64,
    pub decay_d: f64,
    pub decay_constant: f64,
}

impl CoefficientTable {
    pub fn get(&self, n: usize, k: i32) -> C64 {
        let row = &self.rows[n - 1];
        let half = n as i32 * self.k_max;
        if k.abs() > half {
            return C64::new(0.0, 0.0);
        }
        row[(k + half) as usize]
    }

    /// Sum of the table at `s`, row by row.
    pub fn eval(&self, s: C64) -> C64 {
        let ln_s = s.ln();
        let nu = 2.0 * PI / self.period;
        let mut acc = self.landing;
        for (i, row) in self.rows.iter().enumerate() {
            let n = i + 1;
            let half = n as i32 * self.k_max;
            let pow = (self.b * ln_s * n as f64).exp();
            let mut inner = C64::new(0.0, 0.0);
            for (j, &a) in row.iter().enumerate() {
                let k = j as i32 - half;
                inner += a * (C64::new(0.0, nu * k as f64) * ln_s).exp();
            }
            acc += pow * inner;
        }
        acc
    }
}

/// Builds `A_{n,k}` for `n <= n_max` from the kept modes `|k| <= k_max` of `omega`.
pub fn coefficient_table(model: &TransseriesModel, n_max: usize, k_max: i32) -> CoefficientTable {
    let n_max = n_max.min(model.g.order() as usize).max(1);
    let base: Vec<C64> = (-k_max..=k_max).map(|k| model.omega.mode(k)).collect();
    let mut rows = Vec::with_capacity(n_max);
    let mut power = base.clone();
    for n in 1..=n_max {
        if n > 1 {
            let len = power.len() + base.len() - 1;
            power = convolve_direct(&power, &base, len);
        }
        let a = model.g.coeff(n as i64);
        rows.push(power.iter().map(|&c| c * a).collect::<Vec<_>>());
    }
    let d = model.omega.strip_decay();
    let row_max: Vec<f64> = rows.iter().map(|r| r.iter().map(|c| c.norm()).fold(0.0, f64::max)).collect();
    let eps = row_max
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, &m)| m.powf(1.0 / (i + 1) as f64))
        .fold(0.0, f64::max);
    let mut constant: f64 = 0.0;
    for (i, row) in rows.iter().enumerate() {
        let n = i + 1;
        let half = n as i32 * k_max;
        // entries at rounding level of their row carry no decay information
        let floor = row_max[i] * super::MODE_FLOOR;
        for (j, c) in row.iter().enumerate() {
            if c.norm() <= floor || c.norm() == 0.0 {
                continue;
            }
            let k = (j as i32 - half).abs();
            constant = constant.max(c.norm() / (eps.powi(n as i32) * d.powi(k)));
        }
    }
    CoefficientTable {
        n_max,
        k_max,
        landing: model.landing(),
        b: model.orbit.exponent,
        period: model.omega.period,
        rows,
        decay_eps: eps,
        decay_d: d,
        decay_constant: constant,
    }
}
