use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::normality_classify;
use crate::boettcher::eval_phi_circle;
use crate::error::{Error, Result};
use crate::polymap::{QuadParam, RayTracer};
use crate::series::TruncatedSeries;
use crate::transseries::{eval_model, TransseriesModel};
use crate::C64;

use super::Polyline;

/// `eval_model(-2 pi i u)` for `n_samples` values of `u` spread evenly over
/// `[-u_half_width, u_half_width]`.
pub fn brick(model: &TransseriesModel, u_half_width: f64, n_samples: usize) -> Result<Polyline> {
    brick_inset(model, u_half_width, n_samples, 0.0)
}

/// Like [`brick`] but at `s = depth - 2 pi i u`, slightly inside the disk.
pub fn brick_inset(model: &TransseriesModel, u_half_width: f64, n_samples: usize, depth: f64) -> Result<Polyline> {
    if !(u_half_width > 0.0 && u_half_width <= 0.05) {
        return Err(Error::DomainError(format!("u half-width {u_half_width} is not in (0, 0.05]")));
    }
    if n_samples < 2 || !(depth >= 0.0) {
        return Err(Error::DomainError("need at least two samples and a nonnegative depth".into()));
    }
    let last = (n_samples - 1) as f64;
    let points = (0..n_samples)
        .map(|i| {
            // symmetric in i <-> n - 1 - i, so odd counts hit u = 0 exactly
            let u = u_half_width * (2.0 * i as f64 - last) / last;
            eval_model(model, C64::new(depth, -2.0 * PI * u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Polyline::new(points, false)
        .with_meta(format!("brick t={} lambda={}", model.orbit.angle, model.param.lambda()), format!("u={u_half_width}")))
}

/// `phi(rho e^{2 pi i j / n_theta})`, `j = 0..n_theta`, as a closed curve.
pub fn boundary_curve(phi: &TruncatedSeries, rho: f64, n_theta: usize) -> Result<Polyline> {
    let points = eval_phi_circle(phi, rho, n_theta)?;
    Ok(Polyline::new(points, true).with_meta("boundary", format!("rho={rho}")))
}

/// `phi` with straight segments over the angles whose binary expansion is not normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeCurve {
    /// One point per angle `j / resolution`.
    pub curve: Polyline,
    pub excluded: Vec<bool>,
    /// Fraction of grid angles excluded.
    pub excluded_measure: f64,
    /// `(first, last)` grid indices of each maximal excluded run, cyclically; `last` may wrap.
    pub segments: Vec<(usize, usize)>,
}

/// Whether the leading `N m` bits of `j / 2^bits` are `(eps, N, m)`-normal for all `n0 <= N <= bits / m`.
fn angle_is_normal(j: u64, bits: usize, n0: usize, m: usize, epsilon: f64) -> bool {
    let digits: Vec<u8> = (0..bits).map(|i| ((j >> (bits - 1 - i)) & 1) as u8).collect();
    (n0..=bits / m).all(|n| normality_classify(&digits[..n * m], m, epsilon).normal)
}

/// The curve `phi~`: equal to `phi` at angles whose leading bits are normal,
/// linear between the nearest kept angles elsewhere.
///
/// `phi` is sampled at depth `depth` below the circle (radius `e^{-depth}`)
/// through a [`RayTracer`], so arbitrarily small depths are allowed.
pub fn tilde_curve(
    param: &QuadParam,
    phi: &TruncatedSeries,
    n0: usize,
    m: usize,
    epsilon: f64,
    resolution: usize,
    depth: f64,
) -> Result<TildeCurve> {
    if !resolution.is_power_of_two() || n0 == 0 || m == 0 {
        return Err(Error::DomainError("resolution must be a power of two; N0, m >= 1".into()));
    }
    let bits = resolution.trailing_zeros() as usize;
    if bits < n0 * m {
        return Err(Error::DomainError(format!("resolution 2^{bits} is below 2^(N0 m) = 2^{}", n0 * m)));
    }
    let excluded: Vec<bool> = (0..resolution as u64).map(|j| !angle_is_normal(j, bits, n0, m, epsilon)).collect();
    let Some(anchor) = excluded.iter().position(|&e| !e) else {
        return Err(Error::EmptyComplement);
    };
    let tracer = RayTracer::new(param, phi, RayTracer::default_series_depth(phi.order()));
    let mut values = vec![C64::new(0.0, 0.0); resolution];
    for j in 0..resolution {
        if !excluded[j] {
            values[j] = tracer.phi_at(j as f64 / resolution as f64, depth).0;
        }
    }
    let mut segments = Vec::new();
    // walk once around the circle starting from a kept angle
    let mut i = anchor;
    for _ in 0..resolution {
        let next = (i + 1) % resolution;
        if !excluded[i] && excluded[next] {
            let mut end = next;
            while excluded[end % resolution] {
                end += 1;
            }
            // kept endpoints i and end (possibly wrapped); x1 = i, x2 = end on the unrolled grid
            let (x1, x2) = (i as f64, end as f64);
            let (p1, p2) = (values[i], values[end % resolution]);
            for x in i + 1..end {
                let xf = x as f64;
                values[x % resolution] = ((x2 - xf) * p1 + (xf - x1) * p2) / (x2 - x1);
            }
            segments.push((next, (end - 1) % resolution));
        }
        i = next;
    }
    segments.sort_unstable();
    let count = excluded.iter().filter(|&&e| e).count();
    let curve = Polyline::new(values, true)
        .with_meta(format!("tilde N0={n0} m={m} eps={epsilon}"), format!("resolution={resolution} depth={depth}"));
    Ok(TildeCurve { curve, excluded, excluded_measure: count as f64 / resolution as f64, segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::hoeffding_bound;
    use crate::boettcher::phi_series;

    use crate::transseries::{build_model, tracer, ModelOptions};

    fn model(lam: f64, t: &str) -> (QuadParam, TruncatedSeries, TransseriesModel) {
        let p = QuadParam::real(lam).unwrap();
        let phi = phi_series(&p, 1 << 14).unwrap();
        let m = build_model(&p, &phi, t.parse().unwrap(), &ModelOptions::default()).unwrap();
        (p, phi, m)
    }

    #[test]
    fn brick_centre_and_cusp() {
        let (_, _, m) = model(0.5, "0");
        let b = brick(&m, 0.01, 201).unwrap();
        assert_eq!(b.points[100], m.landing());
        assert!(brick(&m, 0.06, 11).is_err());
        // directions out of the landing point on either side
        let l = m.landing();
        let right = b.points[101] - l;
        let left = b.points[99] - l;
        let angle = (right / left).arg().abs();
        assert!(angle < PI - 0.5, "opening angle {angle}");
        // Re b < 1 gives an opening of about pi Re b
        assert!((angle - PI * m.exponent().re).abs() < 0.05, "{angle}");
    }

    #[test]
    fn brick_tracks_phi() {
        let (p, phi, m) = model(0.5, "0");
        let tr = tracer(&p, &phi, None);
        let t = m.orbit.angle.to_f64();
        let hw = 1e-4;
        let inset = brick_inset(&m, hw, 41, 1e-4).unwrap();
        for (i, x) in inset.points.iter().enumerate() {
            let u = hw * (2.0 * i as f64 - 40.0) / 40.0;
            assert!((x - tr.phi_at(t + u, 1e-4).0).norm() < 1e-4);
        }
        // on the circle the error shrinks with the arc
        let mut prev = f64::INFINITY;
        for hw in [1e-2, 1e-3, 1e-4] {
            let b = brick(&m, hw, 41).unwrap();
            let err = b
                .points
                .iter()
                .enumerate()
                .map(|(i, x)| (x - tr.phi_at(t + hw * (2.0 * i as f64 - 40.0) / 40.0, 1e-12).0).norm())
                .fold(0.0, f64::max);
            assert!(err < prev, "hw {hw}: {err:e}");
            prev = err;
        }
    }

    #[test]
    fn boundary_curve_circle_case() {
        let p = QuadParam::real(2.0).unwrap();
        let phi = phi_series(&p, 64).unwrap();
        for rho in [0.5, 0.9] {
            let c = boundary_curve(&phi, rho, 256).unwrap();
            assert!(c.closed);
            for x in &c.points {
                assert!(((x - 0.5).norm() - 0.5 / rho).abs() < 1e-12);
            }
        }
        assert!(boundary_curve(&phi, 1.0, 16).is_err());
    }

    #[test]
    fn boundary_curve_refinement_is_consistent() {
        let p = QuadParam::real(0.5).unwrap();
        let phi = phi_series(&p, 1024).unwrap();
        let a = boundary_curve(&phi, 0.95, 512).unwrap();
        let b = boundary_curve(&phi, 0.95, 1024).unwrap();
        for (j, x) in a.points.iter().enumerate() {
            assert!((x - b.points[2 * j]).norm() < 1e-13);
        }
    }

    #[test]
    fn tilde_without_exclusions_is_phi() {
        let p = QuadParam::real(0.5).unwrap();
        let phi = phi_series(&p, 1024).unwrap();
        let depth = 0.1;
        let t = tilde_curve(&p, &phi, 4, 1, 1.0, 1 << 10, depth).unwrap();
        assert!(t.segments.is_empty());
        let b = boundary_curve(&phi, (-depth).exp(), 1 << 10).unwrap();
        for (x, y) in t.curve.points.iter().zip(&b.points) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn tilde_exclusions() {
        let p = QuadParam::real(0.9).unwrap();
        let phi = phi_series(&p, 1024).unwrap();
        let (n0, m, eps, res) = (6, 1, 0.5, 1 << 12);
        let t = tilde_curve(&p, &phi, n0, m, eps, res, 1e-6).unwrap();
        // t = 0 has frequency 1 for the digit 0
        assert!(t.excluded[0]);
        let bound: f64 = (n0..=12).map(|n| hoeffding_bound(n, m, eps)).sum();
        assert!(t.excluded_measure <= bound, "{} > {bound}", t.excluded_measure);
        // segments interpolate between exact samples
        let tracer = RayTracer::new(&p, &phi, RayTracer::default_series_depth(phi.order()));
        for &(first, last) in t.segments.iter().take(20) {
            let before = (first + res - 1) % res;
            let after = (last + 1) % res;
            let a = tracer.phi_at(before as f64 / res as f64, 1e-6).0;
            let b = tracer.phi_at(after as f64 / res as f64, 1e-6).0;
            assert_eq!(t.curve.points[before], a);
            assert_eq!(t.curve.points[after], b);
        }
        assert!(matches!(tilde_curve(&p, &phi, 7, 1, 1e-9, 1 << 8, 1e-6), Err(Error::EmptyComplement)));
    }
}
