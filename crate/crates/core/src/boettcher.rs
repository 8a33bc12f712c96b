//! The Böttcher conjugacy of `P` at infinity, pulled to the unit disk.
//!
//! `G(z)` solves `G(z)^2 = lambda G(z^2) (1 + G(z))` with `G(0) = 0`,
//! `G'(0) = lambda`, and `phi = -1/G` satisfies `P(phi(z)) = phi(z^2)` with
//! `z phi(z) -> -1/lambda`. The Julia set is `phi` of the unit circle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{PolyMap, QuadParam};
use crate::series::TruncatedSeries;
use crate::C64;

/// Default truncation order for analysis work.
pub const DEFAULT_ORDER: i64 = 1 << 12;
/// Default truncation order for boundary-value extraction.
pub const OMEGA_ORDER: i64 = 1 << 14;

const ITER_MAX: usize = 200;
const ITER_TOL: f64 = 1e-14;
const RESIDUAL_TOL: f64 = 1e-10;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `(T f)(z) = 1/2 sum_{k >= 0} 2^{-k} f(z^{2^k})`, the inverse of `f -> 2f - f(z^2)`.
pub fn operator_t(f: &TruncatedSeries) -> TruncatedSeries {
    assert!(f.lowest_index() >= 0, "operator_t acts on Taylor series");
    let order = f.order();
    let mut out = TruncatedSeries::zeros(0, order);
    out.set_coeff(0, f.coeff(0));
    for m in 1..=order {
        let c = f.coeff(m);
        if c == zero() {
            continue;
        }
        let mut n = m;
        let mut w = 0.5;
        while n <= order {
            let prev = out.coeff(n);
            out.set_coeff(n, prev + c * w);
            n *= 2;
            w *= 0.5;
        }
    }
    out
}

/// How the coefficients of `G` were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BottcherMethod {
    /// Fixed-point iteration of the contraction built from `T`.
    Iteration,
    /// Order-by-order coefficient matching.
    Recurrence,
}

/// `G` with a record of how it was computed.
#[derive(Clone, Debug)]
pub struct BottcherG {
    pub series: TruncatedSeries,
    pub method: BottcherMethod,
    pub iterations: usize,
    /// Largest coefficient of `G^2 - lambda G(z^2)(1 + G)` up to the order.
    pub residual: f64,
}

/// `G` to order `order` by iterating `g = T(R(g))` where `G = lambda z (1 + lambda g)`.
///
/// Returns `None` if the stop rule is not met within the iteration cap.
pub fn bottcher_g_iteration(param: &QuadParam, order: i64) -> Option<(TruncatedSeries, usize)> {
    assert!(order >= 1);
    let lam = param.lambda();
    // g is known to order order-1 (G's z^{n} coefficient is lambda^2 g_{n-1})
    let k = order - 1;
    let z = TruncatedSeries::identity(k);
    let mut g = TruncatedSeries::zeros(0, k);
    for it in 1..=ITER_MAX {
        let g2 = g.substitute_power(2).as_taylor(k);
        let zg2 = z.mul_trunc(&g2, k);
        let zg = z.mul_trunc(&g, k);
        let gg = g.mul_trunc(&g, k);
        let ggg2 = zg.mul_trunc(&g2, k);
        let inner = zg.sub(&gg).add(&zg2).scale(lam);
        let r = z.add(&inner).add(&ggg2.scale(lam * lam));
        let next = operator_t(&r);
        let change = next.sub(&g).sup_norm();
        g = next;
        if !change.is_finite() {
            return None;
        }
        if change <= ITER_TOL * (1.0 + g.sup_norm()) {
            return Some((g_to_big_g(lam, &g, order), it));
        }
    }
    None
}

fn g_to_big_g(lam: C64, g: &TruncatedSeries, order: i64) -> TruncatedSeries {
    let mut out = TruncatedSeries::zeros(0, order);
    out.set_coeff(1, lam);
    for n in 2..=order {
        out.set_coeff(n, lam * lam * g.coeff(n - 1));
    }
    out
}

/// `G` to order `order` by solving for `G_{n-1}` from the `z^n` coefficient.
pub fn bottcher_g_recurrence(param: &QuadParam, order: i64) -> TruncatedSeries {
    assert!(order >= 1);
    let lam = param.lambda();
    let k = order as usize;
    let mut gc = vec![zero(); k + 1];
    gc[1] = lam;
    for n in 3..=k + 1 {
        let mut rhs = zero();
        if n % 2 == 0 {
            rhs += lam * gc[n / 2];
        }
        // lambda sum_{2i + j = n} G_i G_j, i, j >= 1
        let mut s = zero();
        let mut i = 1;
        while 2 * i < n {
            s += gc[i] * gc[n - 2 * i];
            i += 1;
        }
        rhs += lam * s;
        // sum_{i + j = n, 2 <= i <= n-2} G_i G_j
        let mut q = zero();
        for i in 2..=n - 2 {
            q += gc[i] * gc[n - i];
        }
        gc[n - 1] = (rhs - q) / (2.0 * lam);
    }
    TruncatedSeries::taylor(gc)
}

/// Largest coefficient of `G^2 - lambda G(z^2)(1 + G)` through `z^order`.
pub fn g_equation_residual(param: &QuadParam, g: &TruncatedSeries) -> f64 {
    let k = g.order();
    let lam = param.lambda();
    let lhs = g.mul_trunc(g, k);
    let g2 = g.substitute_power(2).as_taylor(k);
    let one_plus = g.add(&TruncatedSeries::constant(C64::new(1.0, 0.0), k));
    let rhs = g2.mul_trunc(&one_plus, k).scale(lam);
    lhs.sub(&rhs).sup_norm()
}

/// `G` to order `order`: iteration first, coefficient matching as fallback.
pub fn bottcher_g(param: &QuadParam, order: i64) -> Result<BottcherG> {
    if let Some((series, iterations)) = bottcher_g_iteration(param, order) {
        let residual = g_equation_residual(param, &series);
        if residual <= RESIDUAL_TOL * (1.0 + series.sup_norm().powi(2)) {
            return Ok(BottcherG { series, method: BottcherMethod::Iteration, iterations, residual });
        }
    }
    let series = bottcher_g_recurrence(param, order);
    let residual = g_equation_residual(param, &series);
    if !(residual <= RESIDUAL_TOL * (1.0 + series.sup_norm().powi(2))) {
        return Err(Error::NoConvergence(format!("G residual {residual:e} at order {order}")));
    }
    Ok(BottcherG { series, method: BottcherMethod::Recurrence, iterations: 0, residual })
}

/// `phi = -1/G` as a Laurent series with lowest index `-1` and order `order`.
pub fn phi_series(param: &QuadParam, order: i64) -> Result<TruncatedSeries> {
    assert!(order >= -1);
    let g = bottcher_g(param, order + 2)?.series;
    let shifted = TruncatedSeries::new(1, g.coeffs()[1..].to_vec());
    Ok(shifted.reciprocal()?.scale(C64::new(-1.0, 0.0)))
}

/// `phi(z)` for `0 < |z| < 1`.
pub fn eval_phi(phi: &TruncatedSeries, z: C64) -> Result<C64> {
    let r = z.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfDomain(format!("|z| = {r} is not in (0, 1)")));
    }
    Ok(phi.eval(z))
}

/// `phi(rho e^{2 pi i j / n})`, `j = 0..n`.
pub fn eval_phi_circle(phi: &TruncatedSeries, rho: f64, n: usize) -> Result<Vec<C64>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::OutOfDomain(format!("rho = {rho} is not in (0, 1)")));
    }
    Ok(phi.eval_circle(rho, n))
}

/// `sup |P(phi(z)) - phi(z^2)|` over `n` equally spaced points of `|z| = rho`.
pub fn functional_residual(param: &QuadParam, phi: &TruncatedSeries, rho: f64, n: usize) -> f64 {
    let outer = phi.eval_circle(rho, n);
    let inner = phi.eval_circle(rho * rho, n);
    // z^2 at index j is rho^2 e^{2 pi i (2j mod n) / n}
    (0..n)
        .map(|j| (param.eval(outer[j]) - inner[(2 * j) % n]).norm())
        .fold(0.0, f64::max)
}

/// `min |P'(phi)|` over `n` points of `|z| = rho`; stays positive on hyperbolic Julia sets.
pub fn critical_clearance(param: &QuadParam, phi: &TruncatedSeries, rho: f64, n: usize) -> f64 {
    phi.eval_circle(rho, n).iter().map(|&x| param.deriv(x).norm()).fold(f64::INFINITY, f64::min)
}

/// On-disk form of a series: `{"lambda", "lowest_index", "order", "coeffs"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub lambda: C64,
    pub lowest_index: i64,
    pub order: i64,
    pub coeffs: Vec<C64>,
}

impl SeriesFile {
    pub fn new(param: &QuadParam, s: &TruncatedSeries) -> Self {
        Self {
            lambda: param.lambda(),
            lowest_index: s.lowest_index(),
            order: s.order(),
            coeffs: s.coeffs().to_vec(),
        }
    }

    pub fn series(&self) -> Result<TruncatedSeries> {
        if self.coeffs.len() as i64 != self.order - self.lowest_index + 1 {
            return Err(Error::IncompatibleIndex(format!(
                "{} coefficients for indices {}..={}",
                self.coeffs.len(),
                self.lowest_index,
                self.order
            )));
        }
        Ok(TruncatedSeries::new(self.lowest_index, self.coeffs.clone()))
    }
}
