use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Verdict of [`normality_classify`] with the block frequencies it was based on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityVerdict {
    pub normal: bool,
    /// `frequencies[k][q]`: relative frequency of block value `q` among the
    /// `m`-blocks of the string rotated left by `k` bits.
    pub frequencies: Vec<Vec<f64>>,
}

/// Value of the `m`-bit block starting at `start`, read cyclically, MSB first.
fn block(bits: &[u8], start: usize, m: usize) -> usize {
    let len = bits.len();
    (0..m).fold(0, |acc, i| (acc << 1) | bits[(start + i) % len] as usize)
}

/// Whether a block count `c` out of `n` blocks is within `eps / Q` of `1 / Q`.
fn count_ok(c: usize, n: usize, q: usize, eps: f64) -> bool {
    ((c * q) as f64 - n as f64).abs() <= eps * n as f64
}

/// `(eps, N, m)`-normality of a bit string of length `N m`.
///
/// The string and its `m - 1` further left rotations are each cut into `N`
/// blocks of `m` bits (rotation makes every shift yield exactly `N` blocks);
/// every block value must occur with frequency within `eps / Q` of `1 / Q`,
/// `Q = 2^m`.
pub fn normality_classify(bits: &[u8], m: usize, epsilon: f64) -> NormalityVerdict {
    assert!(m >= 1 && !bits.is_empty() && bits.len().is_multiple_of(m), "length must be a positive multiple of m");
    let n = bits.len() / m;
    let q = 1usize << m;
    let mut normal = true;
    let mut frequencies = Vec::with_capacity(m);
    for k in 0..m {
        let mut counts = vec![0usize; q];
        for j in 0..n {
            counts[block(bits, k + j * m, m)] += 1;
        }
        normal &= counts.iter().all(|&c| count_ok(c, n, q, epsilon));
        frequencies.push(counts.iter().map(|&c| c as f64 / n as f64).collect());
    }
    NormalityVerdict { normal, frequencies }
}

/// `2 Q m e^{-2 N eps^2 / Q^2}`, the bound on the measure of non-normal numbers.
pub fn hoeffding_bound(n: usize, m: usize, epsilon: f64) -> f64 {
    assert!(n >= 1 && m >= 1 && epsilon > 0.0);
    let q = (1u64 << m) as f64;
    2.0 * q * m as f64 * (-2.0 * n as f64 * epsilon * epsilon / (q * q)).exp()
}

/// `sum_{N = n0}^{n0 + terms - 1}` of [`hoeffding_bound`], and the geometric
/// majorant `bound(n0) / (1 - e^{-2 eps^2 / Q^2})` of the full tail.
pub fn hoeffding_tail(n0: usize, m: usize, epsilon: f64, terms: usize) -> (f64, f64) {
    let q = (1u64 << m) as f64;
    let partial = (n0..n0 + terms).map(|n| hoeffding_bound(n, m, epsilon)).sum();
    let ratio = (-2.0 * epsilon * epsilon / (q * q)).exp();
    (partial, hoeffding_bound(n0, m, epsilon) / (1.0 - ratio))
}

/// Exact number of `(eps, N, m)`-normal strings of length `N m`.
///
/// The string is read as `N` base-`Q` digits; rotated blocks only couple
/// neighbouring digits, so a transfer over digits with the block counts of
/// every shift as state counts the strings exactly.
pub fn count_normal(n: usize, m: usize, epsilon: f64) -> u128 {
    assert!((1..=31).contains(&n) && (1..=3).contains(&m), "supported range: N <= 31, m <= 3");
    let q = 1usize << m;
    let slots = m * q;
    let allowed: Vec<bool> = (0..=n).map(|c| count_ok(c, n, q, epsilon)).collect();
    let max_ok = (0..=n).rev().find(|&c| allowed[c]);
    let Some(max_ok) = max_ok else { return 0 };
    let min_ok = (0..=n).find(|&c| allowed[c]).unwrap_or(0);

    // key layout: 5 bits per count, then last digit, then first digit
    let count_of = |key: u128, slot: usize| ((key >> (5 * slot)) & 31) as usize;
    let bump = |key: u128, slot: usize| key + (1u128 << (5 * slot));
    let last_shift = 5 * slots;
    let first_shift = last_shift + m;
    let digit_mask = (1u128 << m) - 1;
    // shift k > 0 block made from digits a, b
    let cross = |a: usize, b: usize, k: usize| ((a & ((1 << (m - k)) - 1)) << k) | (b >> (m - k));

    let mut states: HashMap<u128, u128> = HashMap::new();
    for d in 0..q {
        let key = bump(0, d) | ((d as u128) << last_shift) | ((d as u128) << first_shift);
        states.insert(key, 1);
    }
    // `remaining` digits are still to come; shifts k > 0 also get the closing block
    let feasible = |key: u128, remaining: usize| {
        (0..slots).all(|s| {
            let c = count_of(key, s);
            let more = if s < q { remaining } else { remaining + 1 };
            c <= max_ok && c + more >= min_ok
        })
    };
    for pos in 1..n {
        let mut next: HashMap<u128, u128> = HashMap::with_capacity(states.len() * 2);
        for (&key, &ways) in &states {
            let last = ((key >> last_shift) & digit_mask) as usize;
            let counts = key & ((1u128 << last_shift) - 1);
            let first = key >> first_shift;
            for d in 0..q {
                let mut k2 = bump(counts, d);
                for k in 1..m {
                    k2 = bump(k2, k * q + cross(last, d, k));
                }
                if !feasible(k2, n - pos - 1) {
                    continue;
                }
                let k2 = k2 | ((d as u128) << last_shift) | (first << first_shift);
                *next.entry(k2).or_insert(0) += ways;
            }
        }
        states = next;
    }
    let mut total = 0u128;
    for (&key, &ways) in &states {
        let last = ((key >> last_shift) & digit_mask) as usize;
        let first = (key >> first_shift) as usize;
        let mut k2 = key & ((1u128 << last_shift) - 1);
        for k in 1..m {
            k2 = bump(k2, k * q + cross(last, first, k));
        }
        if (0..slots).all(|s| allowed[count_of(k2, s)]) {
            total += ways;
        }
    }
    total
}

/// Fraction of length-`N m` strings that are not `(eps, N, m)`-normal.
pub fn non_normal_fraction(n: usize, m: usize, epsilon: f64) -> f64 {
    let all = 1u128 << (n * m);
    (all - count_normal(n, m, epsilon)) as f64 / all as f64
}

/// Number of non-normal strings by enumeration; for cross-checking [`count_normal`].
pub fn count_non_normal_brute(n: usize, m: usize, epsilon: f64) -> u64 {
    let len = n * m;
    assert!(len <= 26);
    let mut bits = vec![0u8; len];
    let mut bad = 0;
    for word in 0u64..(1 << len) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((word >> (len - 1 - i)) & 1) as u8;
        }
        if !normality_classify(&bits, m, epsilon).normal {
            bad += 1;
        }
    }
    bad
}
