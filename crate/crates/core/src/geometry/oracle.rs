use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polymap::{PolyMap, QuadParam};
use crate::C64;

use super::PointCloud;

/// Steps discarded before recording.
pub const BURN_IN: usize = 50;

/// Random inverse iteration from the more repelling fixed point.
///
/// Each step takes one of the two preimages, chosen by a ChaCha8 stream
/// seeded with `seed`.
pub fn julia_oracle(param: &QuadParam, n_points: usize, seed: u64) -> PointCloud {
    let fixed = [C64::new(0.0, 0.0), 1.0 - 1.0 / param.lambda()];
    let mut x = if param.deriv(fixed[0]).norm() >= param.deriv(fixed[1]).norm() { fixed[0] } else { fixed[1] };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_points);
    for step in 0..BURN_IN + n_points {
        let pre = param.inverse_branches(x);
        x = if rng.random::<bool>() { pre.plus } else { pre.minus };
        if step >= BURN_IN {
            points.push(x);
        }
    }
    PointCloud { points }
}
