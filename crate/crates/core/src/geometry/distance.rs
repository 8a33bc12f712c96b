use std::collections::HashMap;

use crate::C64;

/// `max_{a in from} min_{b in to} |a - b|`, using a uniform grid over `to`.
pub fn hausdorff_one_sided(from: &[C64], to: &[C64]) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    let (lo_t, hi_t) = bbox(to);
    let (lo_f, hi_f) = bbox(from);
    let lo = C64::new(lo_t.re.min(lo_f.re), lo_t.im.min(lo_f.im));
    let hi = C64::new(hi_t.re.max(hi_f.re), hi_t.im.max(hi_f.im));
    let extent = (hi.re - lo.re).max(hi.im - lo.im);
    let extent = if extent > 0.0 { extent } else { 1.0 };
    // about one target point per cell when the targets fill the box
    let cell = extent / (to.len() as f64).sqrt().max(1.0);
    let key = |p: C64| (((p.re - lo.re) / cell).floor() as i64, ((p.im - lo.im) / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<C64>> = HashMap::new();
    for &p in to {
        grid.entry(key(p)).or_default().push(p);
    }
    let max_ring = (extent / cell).ceil() as i64 + 2;
    from.iter()
        .map(|&a| {
            let (kx, ky) = key(a);
            let mut best = f64::INFINITY;
            for ring in 0..=max_ring {
                // every point in ring `ring` is at least (ring - 1) * cell away
                if best <= (ring as f64 - 1.0) * cell {
                    break;
                }
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                            for &b in list {
                                best = best.min((a - b).norm());
                            }
                        }
                    }
                }
            }
            best
        })
        .fold(0.0, f64::max)
}

/// Larger of the two one-sided distances.
pub fn hausdorff_two_sided(a: &[C64], b: &[C64]) -> f64 {
    hausdorff_one_sided(a, b).max(hausdorff_one_sided(b, a))
}

fn bbox(points: &[C64]) -> (C64, C64) {
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

/// Largest distance between two points, via the convex hull.
pub fn diameter(points: &[C64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().filter(|p| p.is_finite()).map(|p| (p.re, p.im)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 2 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let mut best: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max((hull[i].0 - hull[j].0).hypot(hull[i].1 - hull[j].1));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(from: &[C64], to: &[C64]) -> f64 {
        from.iter()
            .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    #[test]
    fn simple_sets() {
        let a = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let b = [C64::new(0.0, 0.0)];
        assert_eq!(hausdorff_one_sided(&b, &a), 0.0);
        assert_eq!(hausdorff_one_sided(&a, &b), 1.0);
        assert_eq!(hausdorff_two_sided(&a, &b), 1.0);
        assert_eq!(diameter(&[C64::new(0.0, 0.0), C64::new(3.0, 4.0), C64::new(1.0, 1.0)]), 5.0);
        assert_eq!(diameter(&[C64::new(2.0, 2.0)]), 0.0);
    }

    proptest! {
        #[test]
        fn grid_search_matches_brute_force(
            a in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..40),
            b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
        ) {
            let a: Vec<C64> = a.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            let b: Vec<C64> = b.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            prop_assert_eq!(hausdorff_one_sided(&a, &b), brute(&a, &b));
            let d = diameter(&a);
            let bd = a.iter().flat_map(|x| a.iter().map(move |y| (x - y).norm())).fold(0.0, f64::max);
            prop_assert!((d - bd).abs() <= 1e-12 * (1.0 + bd));
        }
    }
}
