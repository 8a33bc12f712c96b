use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::QuadParam;
use crate::C64;

use super::Polyline;

/// Settings for [`assemble`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Half-width of the pruning box centred at `1/2`; `None` uses `max(2, 2/|lambda|)`.
    pub box_half_width: Option<f64>,
    /// Maximum number of bisections of one segment when the branch is ambiguous.
    pub max_refine: u32,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { box_half_width: None, max_refine: 8 }
    }
}

/// Inverse-branch copies of a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assembled {
    pub depth: usize,
    /// Branch address of each copy (`0` = principal root first), sorted lexicographically.
    pub addresses: Vec<Vec<u8>>,
    pub copies: Vec<Polyline>,
    /// Copies discarded because they left the box.
    pub pruned: usize,
    /// Points inserted by local refinement.
    pub refined_points: usize,
}

impl Assembled {
    pub fn all_points(&self) -> Vec<C64> {
        self.copies.iter().flat_map(|c| c.points.iter().copied()).collect()
    }
}

/// `sqrt(1/4 - y / lambda)`, the offset of a preimage from the critical point.
fn disc(param: &QuadParam, y: C64) -> C64 {
    (C64::new(0.25, 0.0) - y / param.lambda()).sqrt()
}

/// Maps a curve through one inverse branch, following the square root
/// continuously from the root chosen at the first point.
///
/// A step of the root that is large compared with its size means the segment
/// passes close to the critical value; such segments are bisected in the
/// image plane until the root moves smoothly.
fn pull_curve(param: &QuadParam, pts: &[C64], branch: u8, max_refine: u32) -> Result<(Vec<C64>, usize)> {
    let mut out = Vec::with_capacity(pts.len());
    let mut inserted = 0;
    let mut prev = disc(param, pts[0]);
    if branch == 1 {
        prev = -prev;
    }
    out.push(0.5 + prev);
    for w in pts.windows(2) {
        let (y0, y1) = (w[0], w[1]);
        let mut pieces = 1usize;
        loop {
            let mut r = prev;
            let mut ok = true;
            let mut trial = Vec::with_capacity(pieces);
            for k in 1..=pieces {
                let y = y0 + (y1 - y0) * (k as f64 / pieces as f64);
                let d = disc(param, y);
                let next = if (d - r).norm() <= (d + r).norm() { d } else { -d };
                if (next - r).norm() > 0.5 * next.norm().max(r.norm()) && next.norm().max(r.norm()) > 0.0 {
                    ok = false;
                }
                r = next;
                trial.push(next);
            }
            if ok || pieces >= 1 << max_refine {
                if !ok {
                    return Err(Error::DegenerateBranch);
                }
                inserted += pieces - 1;
                out.extend(trial.iter().map(|d| 0.5 + d));
                prev = r;
                break;
            }
            pieces *= 2;
        }
    }
    Ok((out, inserted))
}

/// Address, refined points and the number of points added by refinement.
type Child = (Vec<u8>, Vec<C64>, usize);

/// Applies all `2^depth` compositions of the inverse branches of `P` to `curve`.
///
/// Copies with a point outside the box `|Re x - 1/2|, |Im x| <= h` are pruned
/// along with their descendants.
pub fn assemble(param: &QuadParam, curve: &Polyline, depth: usize, opts: &AssembleOptions) -> Result<Assembled> {
    if depth > 20 {
        return Err(Error::DomainError(format!("depth {depth} exceeds 20")));
    }
    if curve.is_empty() {
        return Ok(Assembled { depth, addresses: vec![vec![]; 1], copies: vec![curve.clone()], pruned: 0, refined_points: 0 });
    }
    let h = opts.box_half_width.unwrap_or_else(|| 2.0f64.max(2.0 / param.lambda().norm()));
    let inside = |p: &C64| (p.re - 0.5).abs() <= h && p.im.abs() <= h;
    let mut level: Vec<(Vec<u8>, Vec<C64>)> = vec![(Vec::new(), curve.points.clone())];
    let mut pruned = 0;
    let mut refined = 0;
    for _ in 0..depth {
        let next: Vec<Result<Option<Child>>> = level
            .par_iter()
            .flat_map_iter(|(addr, pts)| {
                (0..2u8).map(move |b| {
                    let (mapped, inserted) = pull_curve(param, pts, b, opts.max_refine)?;
                    if !mapped.iter().all(inside) {
                        return Ok(None);
                    }
                    let mut a = addr.clone();
                    a.push(b);
                    Ok(Some((a, mapped, inserted)))
                })
            })
            .collect();
        let mut kept = Vec::with_capacity(next.len());
        for item in next {
            match item? {
                Some((a, p, ins)) => {
                    refined += ins;
                    kept.push((a, p));
                }
                None => pruned += 1,
            }
        }
        level = kept;
    }
    let (addresses, copies): (Vec<_>, Vec<_>) = level
        .into_iter()
        .map(|(a, p)| {
            let tag: String = a.iter().map(|b| char::from(b'0' + b)).collect();
            let line = Polyline::new(p, curve.closed).with_meta(format!("{} branch {tag}", curve.source), format!("depth={depth}"));
            (a, line)
        })
        .unzip();
    Ok(Assembled { depth, addresses, copies, pruned, refined_points: refined })
}
