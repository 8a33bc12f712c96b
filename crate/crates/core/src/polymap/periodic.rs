use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{cis_turns, TruncatedSeries};
use crate::C64;

use super::rays::pullback_nearest;
use super::{angle_orbit, ExternalAngle, PolyMap, QuadParam};

/// Tuning for angle-guided landing-point computation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LandingOptions {
    /// Radius at which the ray points are seeded from the series.
    pub start_radius: f64,
    /// Cap on inward pull-back sweeps.
    pub max_sweeps: usize,
    /// Relative change between sweeps below which the chain counts as landed.
    pub chain_tol: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Sup-metric tolerance for identifying periodic points from different angles.
    pub merge_tol: f64,
}

impl Default for LandingOptions {
    fn default() -> Self {
        Self {
            start_radius: 0.9,
            max_sweeps: 20_000,
            chain_tol: 1e-11,
            newton_tol: 1e-12,
            newton_max_iter: 100,
            merge_tol: 1e-8,
        }
    }
}

/// Landing point of a periodic angle together with its orbit data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub angle: ExternalAngle,
    /// Period `N` of the angle under doubling.
    pub period: usize,
    /// Exact period of the landing point under `P` (divides `period`).
    pub point_period: usize,
    /// Landing points of `t, 2t, ..., 2^{N-1} t`.
    pub points: Vec<C64>,
    /// `w = P_N'(L_t)`.
    pub multiplier: C64,
    /// `b = ln(w) / (N ln 2)`, principal branch.
    pub exponent: C64,
}

impl PeriodicOrbit {
    pub fn landing(&self) -> C64 {
        self.points[0]
    }

    /// `M = 2^N` as a float.
    pub fn scale_factor(&self) -> f64 {
        (self.period as f64).exp2()
    }

    /// The distinct points of the cycle.
    pub fn distinct_points(&self) -> &[C64] {
        &self.points[..self.point_period]
    }

    fn from_landing(param: &QuadParam, angle: ExternalAngle, period: usize, landing: C64) -> Result<Self> {
        let mut points = Vec::with_capacity(period);
        let mut x = landing;
        for _ in 0..period {
            points.push(x);
            x = param.eval(x);
        }
        let multiplier = param.deriv_n(landing, period)?;
        if multiplier.norm() <= 1.0 + 1e-12 {
            return Err(Error::NotRepelling(multiplier.norm()));
        }
        let exponent = multiplier.ln() / (period as f64 * std::f64::consts::LN_2);
        let scale = 1.0 + landing.norm();
        let point_period = (1..=period)
            .filter(|d| period.is_multiple_of(*d))
            .find(|&d| (points[d % period] - landing).norm() <= 1e-9 * scale)
            .unwrap_or(period);
        Ok(Self { angle, period, point_period, points, multiplier, exponent })
    }
}

/// Landing data of a strictly preperiodic (dyadic) angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreperiodicLanding {
    pub angle: ExternalAngle,
    /// Landing points of `t, 2t, ..., 2^{m-1} t`.
    pub preperiodic: Vec<C64>,
    /// The periodic orbit reached after `m` doublings.
    pub orbit: PeriodicOrbit,
}

impl PreperiodicLanding {
    pub fn landing(&self) -> C64 {
        self.preperiodic.first().copied().unwrap_or_else(|| self.orbit.landing())
    }

    /// `P_m'(L_t)` along the preperiodic part.
    pub fn preperiodic_derivative(&self, param: &QuadParam) -> C64 {
        self.preperiodic.iter().map(|&x| param.deriv(x)).product()
    }
}

/// Pull the rays of an eventually periodic angle orbit in until they land.
///
/// `angles[k]` maps to `angles[k+1]`, the last one to `angles[cycle_start]`.
fn landing_chain(
    param: &QuadParam,
    phi: &TruncatedSeries,
    angles: &[ExternalAngle],
    cycle_start: usize,
    opts: &LandingOptions,
) -> Result<Vec<C64>> {
    let len = angles.len();
    let next = |k: usize| if k + 1 == len { cycle_start } else { k + 1 };
    let mut chain: Vec<C64> =
        angles.iter().map(|a| phi.eval(cis_turns(a.to_f64()) * opts.start_radius)).collect();
    for _ in 0..opts.max_sweeps {
        let fresh: Vec<C64> =
            (0..len).map(|k| pullback_nearest(param, chain[next(k)], chain[k]).0).collect();
        let change = fresh
            .iter()
            .zip(&chain)
            .map(|(a, b)| (a - b).norm() / (1.0 + a.norm()))
            .fold(0.0, f64::max);
        chain = fresh;
        if change <= opts.chain_tol {
            return Ok(chain);
        }
    }
    Err(Error::NewtonDiverged(format!(
        "ray pull-back for {} did not settle in {} sweeps",
        angles[0], opts.max_sweeps
    )))
}

fn newton_periodic(param: &QuadParam, x0: C64, n: usize, opts: &LandingOptions) -> Result<C64> {
    let mut x = x0;
    for _ in 0..opts.newton_max_iter {
        let f = param.eval_n(x, n)? - x;
        let d = param.deriv_n(x, n)? - 1.0;
        let dx = f / d;
        if !dx.is_finite() {
            break;
        }
        x -= dx;
        if dx.norm() <= opts.newton_tol * (1.0 + x.norm()) {
            let resid = (param.eval_n(x, n)? - x).norm();
            if resid > 1e-10 * (1.0 + x.norm()) {
                return Err(Error::NewtonDiverged(format!("residual {resid:e} after convergence")));
            }
            if (x - x0).norm() > 1e-6 * (1.0 + x.norm()) {
                return Err(Error::NewtonDiverged(format!(
                    "Newton moved {:e} away from the landed ray; refusing a different root",
                    (x - x0).norm()
                )));
            }
            return Ok(x);
        }
    }
    Err(Error::NewtonDiverged(format!("no convergence in {} iterations from {x0}", opts.newton_max_iter)))
}

/// Landing point `L_t` of a periodic angle, its cycle, multiplier and exponent.
pub fn landing_point(
    param: &QuadParam,
    phi: &TruncatedSeries,
    angle: ExternalAngle,
    opts: &LandingOptions,
) -> Result<PeriodicOrbit> {
    if !angle.is_periodic() {
        return Err(Error::InvalidAngle(format!("{angle} is preperiodic; use landing_preperiodic")));
    }
    let orbit = angle_orbit(angle);
    let chain = landing_chain(param, phi, &orbit.orbit, 0, opts)?;
    let landing = newton_periodic(param, chain[0], orbit.period, opts)?;
    PeriodicOrbit::from_landing(param, angle, orbit.period, landing)
}

/// Landing point of a dyadic angle `p / (2^m q)`, `m > 0`.
pub fn landing_preperiodic(
    param: &QuadParam,
    phi: &TruncatedSeries,
    angle: ExternalAngle,
    opts: &LandingOptions,
) -> Result<PreperiodicLanding> {
    let orbit = angle_orbit(angle);
    let m = orbit.preperiod as usize;
    let chain = landing_chain(param, phi, &orbit.orbit, m, opts)?;
    let cycle_angle = orbit.orbit[m];
    let landing = newton_periodic(param, chain[m], orbit.period, opts)?;
    let cycle = PeriodicOrbit::from_landing(param, cycle_angle, orbit.period, landing)?;
    let mut pre = vec![C64::new(0.0, 0.0); m];
    let mut y = landing;
    for k in (0..m).rev() {
        let (x, ratio) = pullback_nearest(param, y, chain[k]);
        if ratio > 0.5 {
            return Err(Error::BranchAmbiguity(format!("preimage choice at step {k} of {angle}")));
        }
        pre[k] = x;
        y = x;
    }
    Ok(PreperiodicLanding { angle, preperiodic: pre, orbit: cycle })
}

/// Cycles of the doubling map on `{k / (2^n - 1)}`, each listed from its
/// smallest member, sorted by that member.
pub fn angle_cycles(n: usize) -> Vec<Vec<ExternalAngle>> {
    assert!((1..=40).contains(&n), "period {n} out of the supported range");
    let q: u64 = (1u64 << n) - 1;
    let mut seen = vec![false; q as usize];
    let mut cycles = Vec::new();
    for k in 0..q {
        if seen[k as usize] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut j = k;
        loop {
            seen[j as usize] = true;
            cyc.push(ExternalAngle::new(j as u128, q as u128).expect("valid angle"));
            j = (2 * j) % q;
            if j == k {
                break;
            }
        }
        cycles.push(cyc);
    }
    cycles
}

/// `fix(P_n)` on the Julia set, as deduplicated orbits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicPointSet {
    pub n: usize,
    /// One orbit per distinct cycle, sorted by smallest landing angle.
    pub orbits: Vec<PeriodicOrbit>,
    /// `2^n` minus the non-repelling points of period dividing `n`, when the
    /// attracting cycle could be located.
    pub expected_count: Option<usize>,
}

impl PeriodicPointSet {
    /// Number of distinct points.
    pub fn count(&self) -> usize {
        self.orbits.iter().map(|o| o.point_period).sum()
    }

    /// Every point of `fix(P_n)` on `J` with `P_n'` at that point.
    pub fn points_with_derivative(&self) -> Vec<(C64, C64)> {
        let mut out = Vec::with_capacity(self.count());
        for o in &self.orbits {
            let d = o.point_period;
            // P_d' at every point of the cycle equals the cycle multiplier
            let w_d = o.exponent * (d as f64 * std::f64::consts::LN_2);
            let w_n = (w_d * (self.n / d) as f64).exp();
            for &z in o.distinct_points() {
                out.push((z, w_n));
            }
        }
        out
    }

    /// `Re b` per point (period-normalized, so `log2 |P_n'| / n`).
    pub fn betas(&self) -> Vec<f64> {
        self.orbits
            .iter()
            .flat_map(|o| std::iter::repeat_n(o.exponent.re, o.point_period))
            .collect()
    }
}

/// Repelling periodic points of period dividing `n`, by landing every angle `k / (2^n - 1)`.
pub fn periodic_points_on_j(
    param: &QuadParam,
    phi: &TruncatedSeries,
    n: usize,
    opts: &LandingOptions,
) -> Result<PeriodicPointSet> {
    let cycles = angle_cycles(n);
    let orbits: Vec<PeriodicOrbit> = cycles
        .par_iter()
        .map(|cyc| landing_point(param, phi, cyc[0], opts))
        .collect::<Result<_>>()?;

    let cell = (opts.merge_tol * 100.0).max(1e-12);
    let key = |z: C64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<(C64, usize)>> = HashMap::new();
    let mut kept: Vec<PeriodicOrbit> = Vec::new();
    for orbit in orbits {
        let z = orbit.landing();
        let (kx, ky) = key(z);
        let mut twin = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &(w, idx) in list {
                        if (w - z).norm() <= opts.merge_tol * (1.0 + z.norm()) {
                            twin = Some(idx);
                            break 'search;
                        }
                    }
                }
            }
        }
        match twin {
            Some(idx) => {
                let other = &kept[idx];
                if (other.exponent.re - orbit.exponent.re).abs() > 1e-6 {
                    return Err(Error::DedupFailure(format!(
                        "angles {} and {} land within {:e} but Re b differ ({} vs {})",
                        other.angle, orbit.angle, opts.merge_tol, other.exponent.re, orbit.exponent.re
                    )));
                }
            }
            None => {
                let idx = kept.len();
                for &w in orbit.distinct_points() {
                    grid.entry(key(w)).or_default().push((w, idx));
                }
                kept.push(orbit);
            }
        }
    }

    let expected_count = param.attracting_cycle(5000).map(|cyc| {
        let p = cyc.len();
        (1usize << n) - if n.is_multiple_of(p) { p } else { 0 }
    });
    Ok(PeriodicPointSet { n, orbits: kept, expected_count })
}
