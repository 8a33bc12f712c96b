//! Curves and images: bricks from local models, their assembly through
//! inverse branches, oracle point clouds, the interpolated curve
//! `phi~`, distances between point sets, and raster output.

mod assemble;
mod curves;
mod distance;
mod oracle;
mod raster;

pub use assemble::{assemble, AssembleOptions, Assembled};
pub use curves::{boundary_curve, brick, brick_inset, tilde_curve, TildeCurve};
pub use distance::{diameter, hausdorff_one_sided, hausdorff_two_sided};
pub use oracle::julia_oracle;
pub use raster::{mandelbrot_escape_time, raster, render_mandelbrot, Pixels, RasterImage, Window};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// An ordered list of points, optionally closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<C64>,
    pub closed: bool,
    /// Where the points came from (angle, model, branch address).
    pub source: String,
    /// Scale tag, e.g. the half-width or depth used.
    pub scale: String,
}

impl Polyline {
    pub fn new(points: Vec<C64>, closed: bool) -> Self {
        Self { points, closed, source: String::new(), scale: String::new() }
    }

    pub fn with_meta(mut self, source: impl Into<String>, scale: impl Into<String>) -> Self {
        self.source = source.into();
        self.scale = scale.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance between consecutive points (including the closing gap).
    pub fn max_gap(&self) -> f64 {
        let mut gap = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
        if self.closed && self.points.len() > 1 {
            gap = gap.max((self.points[0] - self.points[self.points.len() - 1]).norm());
        }
        gap
    }

    /// Checks that every point is finite and consecutive gaps stay below `max_step`.
    pub fn validate(&self, max_step: f64) -> Result<()> {
        if let Some(p) = self.points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvariantViolation(format!("non-finite point {p}")));
        }
        let gap = self.max_gap();
        if gap > max_step {
            return Err(Error::InvariantViolation(format!("gap {gap:e} exceeds {max_step:e}")));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        points_csv(&self.points)
    }
}

/// Unordered sample of a set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<C64>,
}

impl PointCloud {
    pub fn to_csv(&self) -> String {
        points_csv(&self.points)
    }
}

/// `index,re,im` with round-trip precision.
pub fn points_csv(points: &[C64]) -> String {
    let mut out = String::with_capacity(48 * points.len() + 16);
    out.push_str("index,re,im\n");
    for (i, p) in points.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.17e},{:.17e}", p.re, p.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_checks_and_csv() {
        let p = Polyline::new(vec![C64::new(0.0, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.1)], true);
        assert!((p.max_gap() - 0.02f64.sqrt()).abs() < 1e-15);
        assert!(p.validate(0.2).is_ok());
        assert!(p.validate(0.12).is_err());
        let bad = Polyline::new(vec![C64::new(f64::NAN, 0.0)], false);
        assert!(bad.validate(1.0).is_err());
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("index,re,im"));
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(row[0], "1");
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.1);
    }
}
