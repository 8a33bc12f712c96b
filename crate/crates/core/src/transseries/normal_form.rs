use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{PeriodicOrbit, PolyMap, QuadParam};
use crate::series::{cis_turns, reciprocal_unit_with, Kernel, TruncatedSeries};
use crate::C64;

/// `A(y) = P_N(y + L) - L` for a periodic orbit.
///
/// Kept both as the chain of quadratics `y -> P'(L_j) y - lambda y^2`
/// (used for evaluation) and as an expanded polynomial of degree `2^N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjugacyMap {
    pub lambda: C64,
    /// `P'(L_j)` along the cycle.
    pub derivs: Vec<C64>,
    /// `P_N(L) - L`, the fixed-point defect; dropped from the polynomial.
    pub offset: C64,
    pub poly: TruncatedSeries,
}

impl ConjugacyMap {
    pub fn multiplier(&self) -> C64 {
        self.derivs.iter().product()
    }

    pub fn eval(&self, y: C64) -> C64 {
        self.derivs.iter().fold(y, |y, &d| d * y - self.lambda * y * y)
    }

    /// `A` applied `j` times.
    pub fn eval_iter(&self, y: C64, j: usize) -> C64 {
        (0..j).fold(y, |y, _| self.eval(y))
    }
}

/// Recentre `P_N` at the landing point.
pub fn conjugacy_a(param: &QuadParam, orbit: &PeriodicOrbit) -> ConjugacyMap {
    let lam = param.lambda();
    let derivs: Vec<C64> = orbit.points.iter().map(|&x| param.deriv(x)).collect();
    let last = *orbit.points.last().expect("orbit has points");
    let offset = param.eval(last) - orbit.landing();
    let mut poly = TruncatedSeries::identity(1);
    for &d in &derivs {
        let deg = 2 * poly.order();
        let p = poly.with_order(deg);
        let sq = p.mul_trunc_with(&p, deg, Kernel::Direct);
        poly = p.scale(d).sub(&sq.scale(lam));
    }
    ConjugacyMap { lambda: lam, derivs, offset, poly }
}

fn check_resonance(w: C64, n_max: usize) -> Result<()> {
    let mut wn = w;
    for n in 2..=n_max {
        wn *= w;
        if (wn - w).norm() < 1e-12 {
            return Err(Error::ResonanceFailure(n));
        }
    }
    Ok(())
}

/// The tangent-to-identity `g` with `g(w y) = A(g(y))`, to order `n_max`,
/// by matching coefficients: `(w^n - w) a_n` is fixed by `a_2, ..., a_{n-1}`.
///
/// `a` must be a polynomial with `A(0) = 0` and `A'(0) = w`.
pub fn normal_form_g(a: &TruncatedSeries, w: C64, n_max: usize) -> Result<TruncatedSeries> {
    check_resonance(w, n_max)?;
    let n_max = n_max.max(1) as i64;
    let outer = a.with_lowest(0);
    let mut g = TruncatedSeries::identity(n_max);
    let mut wn = w;
    for n in 2..=n_max {
        wn *= w;
        let head = TruncatedSeries::new(1, g.coeffs()[1..n as usize].to_vec());
        let composed = outer.compose_trunc_with(&head, n, Kernel::Direct);
        g.set_coeff(n, composed.coeff(n) / (wn - w));
    }
    Ok(g)
}

/// Same `g` by iterating the contraction `g <- A(g(y / w))`.
///
/// Returns the series and the number of iterations.
pub fn normal_form_g_iteration(
    a: &TruncatedSeries,
    w: C64,
    n_max: usize,
    max_iter: usize,
) -> Result<(TruncatedSeries, usize)> {
    check_resonance(w, n_max)?;
    let n_max = n_max.max(1) as i64;
    let outer = a.with_lowest(0);
    let mut g = TruncatedSeries::identity(n_max);
    let winv = 1.0 / w;
    for it in 1..=max_iter {
        let mut scaled = g.clone();
        let mut f = C64::new(1.0, 0.0);
        for c in scaled.coeffs_mut() {
            *c *= f;
            f *= winv;
        }
        let next = outer.compose_trunc_with(&scaled, n_max, Kernel::Direct);
        let change = next.sub(&g).sup_norm();
        g = next;
        g.set_coeff(0, C64::new(0.0, 0.0));
        if !change.is_finite() {
            break;
        }
        if change <= 1e-14 * (1.0 + g.sup_norm()) {
            return Ok((g, it));
        }
    }
    Err(Error::NoConvergence(format!("normal form iteration stalled after {max_iter} steps")))
}

/// Compositional inverse of a tangent-to-identity series, by Newton's method
/// with precision doubling.
pub fn invert_series(g: &TruncatedSeries) -> Result<TruncatedSeries> {
    let n = g.order();
    if (g.coeff(1) - C64::new(1.0, 0.0)).norm() > 1e-12 || g.coeff(0).norm() > 1e-12 {
        return Err(Error::IncompatibleIndex("series must be y + O(y^2)".into()));
    }
    let g = g.with_lowest(0);
    let dg = g.derivative();
    let mut h = TruncatedSeries::identity(n.min(1));
    let mut len = 1i64;
    while len < n {
        len = (2 * len).min(n);
        let hh = h.as_taylor(len);
        let gh = g.compose_trunc_with(&hh, len, Kernel::Direct);
        let dgh = dg.compose_trunc_with(&hh, len, Kernel::Direct);
        let inv = TruncatedSeries::taylor(reciprocal_unit_with(dgh.coeffs(), (len + 1) as usize, Kernel::Direct));
        let resid = gh.sub(&TruncatedSeries::identity(len));
        let step = resid.mul_trunc_with(&inv, len, Kernel::Direct);
        h = hh.sub(&step);
        h.set_coeff(0, C64::new(0.0, 0.0));
    }
    Ok(h.as_taylor(n))
}

/// Largest `r` with `|g^{-1}(g(y)) - y| <= tol` on `n` points of `|y| = r`.
pub fn conv_radius_est(g: &TruncatedSeries, ginv: &TruncatedSeries, tol: f64) -> f64 {
    let ok = |r: f64| -> bool {
        (0..64).all(|j| {
            let y = cis_turns((j as f64 + 0.5) / 64.0) * r;
            let e = (ginv.eval(g.eval(y)) - y).norm();
            e <= tol
        })
    };
    let mut hi = 1e-3;
    let mut lo;
    if ok(hi) {
        while ok(2.0 * hi) && hi < 1e6 {
            hi *= 2.0;
        }
        lo = hi;
        hi *= 2.0;
    } else {
        while !ok(hi) && hi > 1e-12 {
            hi *= 0.5;
        }
        if ok(hi) {
            lo = hi;
            hi *= 2.0;
        } else {
            return 0.0;
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `sup |g(w y) - A(g(y))|` over `n` points of `|y| = r`.
pub fn conjugacy_residual(g: &TruncatedSeries, a: &ConjugacyMap, r: f64, n: usize) -> f64 {
    let w = a.multiplier();
    (0..n)
        .map(|j| {
            let y = cis_turns(j as f64 / n as f64) * r;
            (g.eval_dd(w * y) - a.eval(g.eval_dd(y))).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boettcher::phi_series;
    use crate::polymap::{landing_point, LandingOptions};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn poly(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::taylor(c.iter().map(|&x| r(x)).collect())
    }

    #[test]
    fn linear_map_gives_identity() {
        let g = normal_form_g(&poly(&[0.0, 3.0]), r(3.0), 16).unwrap();
        assert!(g.sub(&TruncatedSeries::identity(16)).sup_norm() < 1e-15);
    }

    #[test]
    fn second_coefficient_for_quadratic() {
        let g = normal_form_g(&poly(&[0.0, 4.0, 1.0]), r(4.0), 8).unwrap();
        assert!((g.coeff(2) - r(1.0 / 12.0)).norm() < 1e-15);
        // third order by hand: (w^3 - w) a_3 = 2 a_2
        assert!((g.coeff(3) - r(2.0 / 12.0 / 60.0)).norm() < 1e-15);
    }

    #[test]
    fn matching_and_iteration_agree() {
        let a = poly(&[0.0, 1.7, -0.8, 0.3]);
        let g1 = normal_form_g(&a, r(1.7), 40).unwrap();
        let (g2, _) = normal_form_g_iteration(&a, r(1.7), 40, 5000).unwrap();
        for k in 0..=40 {
            assert!((g1.coeff(k) - g2.coeff(k)).norm() <= 1e-12 * (1.0 + g1.coeff(k).norm()), "k {k}");
        }
    }

    #[test]
    fn resonance_is_rejected() {
        assert!(matches!(normal_form_g(&poly(&[0.0, 1.0]), r(1.0), 4), Err(Error::ResonanceFailure(2))));
    }

    #[test]
    fn inverse_of_identity_and_quadratic() {
        let id = TruncatedSeries::identity(12);
        assert!(invert_series(&id).unwrap().sub(&id).sup_norm() < 1e-15);
        let g = poly(&[0.0, 1.0, 1.0]).with_order(12);
        let h = invert_series(&g).unwrap();
        // Lagrange inversion: coefficient of y^n in the inverse of y + y^2 is (-1)^{n-1} C_{n-1}
        let catalan = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0, 4862.0, 16796.0, 58786.0];
        for n in 1..=12 {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((h.coeff(n) - r(sign * catalan[n as usize - 1])).norm() < 1e-9, "n {n}");
        }
        let back = g.compose(&h).unwrap();
        assert!(back.sub(&TruncatedSeries::identity(12)).sup_norm() < 1e-10);
    }

    #[test]
    fn conjugacy_at_lambda_two() {
        let p = QuadParam::real(2.0).unwrap();
        let phi = phi_series(&p, 256).unwrap();
        let o = landing_point(&p, &phi, "0".parse().unwrap(), &LandingOptions::default()).unwrap();
        let a = conjugacy_a(&p, &o);
        assert!(a.poly.sub(&poly(&[0.0, 2.0, -2.0])).sup_norm() < 1e-12);
        assert!(a.offset.norm() < 1e-12);
    }

    #[test]
    fn normal_form_residual_at_lambda_09() {
        let p = QuadParam::real(0.9).unwrap();
        let phi = phi_series(&p, 1024).unwrap();
        for t in ["0", "1/3"] {
            let o = landing_point(&p, &phi, t.parse().unwrap(), &LandingOptions::default()).unwrap();
            let a = conjugacy_a(&p, &o);
            assert!(a.offset.norm() < 1e-10);
            assert!((a.poly.coeff(1) - o.multiplier).norm() < 1e-12);
            assert!((a.multiplier() - o.multiplier).norm() < 1e-12);
            assert!(a.poly.coeff(0).norm() == 0.0);
            let g = normal_form_g(&a.poly, o.multiplier, 96).unwrap();
            let res = conjugacy_residual(&g, &a, 0.1, 256);
            assert!(res <= 1e-9, "t = {t}: {res:e}");
        }
    }
}
