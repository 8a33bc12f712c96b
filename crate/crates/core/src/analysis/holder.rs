use serde::{Deserialize, Serialize};

use crate::geometry::Polyline;

/// Log-log fit of the oscillation of a uniformly sampled curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    /// `(separation, max |p(x + h) - p(x)|)` for dyadic `h`, as fractions of the parameter range.
    pub scales: Vec<(f64, f64)>,
}

/// Slope of `ln max|p(x1) - p(x2)|` against `ln |x1 - x2|` over dyadic separations.
///
/// A closed polyline is treated as periodic. Separations run from one sample
/// to an eighth of the curve.
pub fn holder_estimate(curve: &Polyline) -> HolderFit {
    let pts = &curve.points;
    let n = pts.len();
    let span = if curve.closed { n } else { n.saturating_sub(1) };
    let mut scales = Vec::new();
    let mut h = 1;
    while h * 8 <= span.max(1) {
        let pairs = if curve.closed { n } else { n - h };
        let osc = (0..pairs).map(|i| (pts[(i + h) % n] - pts[i]).norm()).fold(0.0, f64::max);
        if osc > 0.0 {
            scales.push((h as f64 / span as f64, osc));
        }
        h *= 2;
    }
    let exponent = if scales.len() < 2 {
        f64::NAN
    } else {
        let xs: Vec<f64> = scales.iter().map(|s| s.0.ln()).collect();
        let ys: Vec<f64> = scales.iter().map(|s| s.1.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    HolderFit { exponent, scales }
}
