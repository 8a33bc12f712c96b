//! Following external rays inward by pulling back along inverse branches.
//!
//! `phi(r e^{2 pi i t})` is cheap and accurate from the Laurent series when `r`
//! is not too close to 1. Closer to the circle we use the functional equation
//! `P(phi(z)) = phi(z^2)`: the value at angle `t`, depth `s` (radius `e^{-s}`) is the
//! preimage of the value at angle `2t`, depth `2s`. Of the two preimages, the
//! correct one is the one nearer the value on the same ray one level out.

use crate::series::{cis_turns, TruncatedSeries};
use crate::C64;

use super::QuadParam;

/// The preimage of `y` nearest `reference`, together with the ratio
/// `|near - reference| / |far - reference|` (small means unambiguous).
pub fn pullback_nearest(param: &QuadParam, y: C64, reference: C64) -> (C64, f64) {
    let pre = param.inverse_branches(y);
    let dp = (pre.plus - reference).norm();
    let dm = (pre.minus - reference).norm();
    if dp <= dm {
        (pre.plus, dp / dm.max(f64::MIN_POSITIVE))
    } else {
        (pre.minus, dm / dp.max(f64::MIN_POSITIVE))
    }
}

/// Evaluates `phi` at arbitrary depth below the unit circle.
#[derive(Clone, Copy, Debug)]
pub struct RayTracer<'a> {
    param: &'a QuadParam,
    phi: &'a TruncatedSeries,
    series_depth: f64,
}

impl<'a> RayTracer<'a> {
    /// `series_depth` is the smallest depth at which the series is trusted.
    pub fn new(param: &'a QuadParam, phi: &'a TruncatedSeries, series_depth: f64) -> Self {
        assert!(series_depth > 0.0);
        Self { param, phi, series_depth }
    }

    /// Depth at which the tail of an order-`K` series falls below double precision.
    pub fn default_series_depth(order: i64) -> f64 {
        40.0 / order.max(1) as f64
    }

    pub fn series_depth(&self) -> f64 {
        self.series_depth
    }

    fn series_at(&self, turns: f64, depth: f64) -> C64 {
        self.phi.eval(cis_turns(turns) * (-depth).exp())
    }

    /// `phi(e^{2 pi i turns} e^{-depth})` for `depth > 0`.
    ///
    /// Also returns the worst branch-ambiguity ratio met on the way.
    pub fn phi_at(&self, turns: f64, depth: f64) -> (C64, f64) {
        assert!(depth > 0.0, "depth must be positive");
        if depth >= self.series_depth {
            return (self.series_at(turns, depth), 0.0);
        }
        let levels = (self.series_depth / depth).log2().ceil() as usize;
        let top = depth * (levels as f64).exp2();
        // angles t_k = 2^k t mod 1; exact in binary floating point
        let mut angles = Vec::with_capacity(levels + 1);
        let mut t = turns.rem_euclid(1.0);
        for _ in 0..=levels {
            angles.push(t);
            t = (2.0 * t).rem_euclid(1.0);
        }
        let mut chain: Vec<C64> = angles.iter().map(|&a| self.series_at(a, top)).collect();
        let mut worst: f64 = 0.0;
        for iter in 0..levels {
            // after this sweep chain[k] sits at depth top / 2^min(iter+1, levels-k)
            for k in 0..levels - iter {
                let (x, ratio) = pullback_nearest(self.param, chain[k + 1], chain[k]);
                chain[k] = x;
                worst = worst.max(ratio);
            }
        }
        (chain[0], worst)
    }

    /// `phi(z)` for complex `z` in the punctured disk, via [`Self::phi_at`].
    pub fn phi_z(&self, z: C64) -> C64 {
        let turns = z.arg() / (2.0 * std::f64::consts::PI);
        self.phi_at(turns, -z.norm().ln()).0
    }
}
