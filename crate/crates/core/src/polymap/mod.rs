//! The quadratic family `P(x) = lambda x (1 - x)`: evaluation, iterates,
//! derivatives, inverse branches, external angles and periodic points.

mod angle;
mod periodic;
mod rays;

pub use angle::{angle_orbit, AngleOrbit, ExternalAngle};
pub use periodic::{
    angle_cycles, landing_point, landing_preperiodic, periodic_points_on_j, LandingOptions, PeriodicOrbit,
    PeriodicPointSet, PreperiodicLanding,
};
pub use rays::{pullback_nearest, RayTracer};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Iterates beyond this modulus are reported as escaping.
pub const ESCAPE_BOUND: f64 = 1e8;

/// A polynomial self-map of the plane. Only the quadratic family implements it.
pub trait PolyMap {
    fn degree(&self) -> u32;
    fn eval(&self, x: C64) -> C64;
    fn deriv(&self, x: C64) -> C64;

    /// `P_n(x)`, the n-fold composition.
    fn eval_n(&self, x: C64, n: usize) -> Result<C64> {
        let mut x = x;
        for step in 0..n {
            x = self.eval(x);
            if !(x.norm() <= ESCAPE_BOUND) {
                return Err(Error::Overflow { step: step + 1, bound: ESCAPE_BOUND });
            }
        }
        Ok(x)
    }

    /// `P_n'(x)` as the product of `P'` along the orbit.
    fn deriv_n(&self, x: C64, n: usize) -> Result<C64> {
        let mut x = x;
        let mut d = C64::new(1.0, 0.0);
        for step in 0..n {
            d *= self.deriv(x);
            x = self.eval(x);
            if !(x.norm() <= ESCAPE_BOUND) {
                return Err(Error::Overflow { step: step + 1, bound: ESCAPE_BOUND });
            }
        }
        Ok(d)
    }
}

/// Map parameters: `lambda` and the equivalent `z^2 + c` parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParam {
    lambda: C64,
    c: C64,
}

impl QuadParam {
    pub fn new(lambda: C64) -> Result<Self> {
        if lambda.norm() == 0.0 {
            return Err(Error::ZeroLambda);
        }
        let c = lambda / 2.0 - lambda * lambda / 4.0;
        Ok(Self { lambda, c })
    }

    pub fn real(lambda: f64) -> Result<Self> {
        Self::new(C64::new(lambda, 0.0))
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn c(&self) -> C64 {
        self.c
    }

    pub fn critical_point(&self) -> C64 {
        C64::new(0.5, 0.0)
    }

    pub fn critical_value(&self) -> C64 {
        self.lambda / 4.0
    }

    /// Both solutions of `lambda x (1 - x) = y`, as `1/2 +- sqrt(1/4 - y/lambda)`
    /// with the principal square root on the `plus` branch.
    pub fn inverse_branches(&self, y: C64) -> Preimages {
        let disc = (C64::new(0.25, 0.0) - y / self.lambda).sqrt();
        let half = C64::new(0.5, 0.0);
        Preimages {
            plus: half + disc,
            minus: half - disc,
            degenerate: disc.norm() <= 1e-12 * (1.0 + y.norm()).sqrt(),
        }
    }

    /// The attracting cycle, found by iterating the critical point.
    ///
    /// Returns `None` when the critical orbit escapes or no cycle is detected
    /// within `max_iter` steps.
    pub fn attracting_cycle(&self, max_iter: usize) -> Option<Vec<C64>> {
        let mut x = self.critical_point();
        for _ in 0..max_iter {
            x = self.eval(x);
            if x.norm() > ESCAPE_BOUND {
                return None;
            }
        }
        for p in 1..=64 {
            let y = self.eval_n(x, p).ok()?;
            if (y - x).norm() < 1e-9 * (1.0 + x.norm()) {
                // polish with Newton on P_p(x) = x
                let mut z = x;
                for _ in 0..50 {
                    let f = self.eval_n(z, p).ok()? - z;
                    let d = self.deriv_n(z, p).ok()? - 1.0;
                    let dz = f / d;
                    z -= dz;
                    if dz.norm() < 1e-15 * (1.0 + z.norm()) {
                        break;
                    }
                }
                let mut cycle = Vec::with_capacity(p);
                let mut w = z;
                for _ in 0..p {
                    cycle.push(w);
                    w = self.eval(w);
                }
                if self.deriv_n(z, p).ok()?.norm() < 1.0 {
                    return Some(cycle);
                }
                return None;
            }
        }
        None
    }
}

impl PolyMap for QuadParam {
    fn degree(&self) -> u32 {
        2
    }

    fn eval(&self, x: C64) -> C64 {
        self.lambda * x * (1.0 - x)
    }

    fn deriv(&self, x: C64) -> C64 {
        self.lambda * (1.0 - 2.0 * x)
    }
}

/// The two preimages of a point; `degenerate` flags the double root at the critical value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preimages {
    pub plus: C64,
    pub minus: C64,
    pub degenerate: bool,
}

impl Preimages {
    pub fn as_pair(&self) -> (C64, C64) {
        (self.plus, self.minus)
    }
}
