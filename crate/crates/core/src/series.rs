//! Truncated Laurent/Taylor series with complex coefficients.
//!
//! A [`TruncatedSeries`] stores the coefficients of `z^lowest ..= z^order`.
//! Every operation returns a series whose coefficients are exact (up to
//! rounding) for all retained powers: the result's order is lowered to the
//! highest power the operands determine.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Operand length above which products switch to FFT convolution.
const FFT_THRESHOLD: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn fft_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Schoolbook convolution, truncated to `out_len` terms.
pub fn convolve_direct(a: &[C64], b: &[C64], out_len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); out_len];
    for (i, &ai) in a.iter().enumerate().take(out_len) {
        if ai == C64::new(0.0, 0.0) {
            continue;
        }
        let lim = (out_len - i).min(b.len());
        for (o, &bj) in out[i..i + lim].iter_mut().zip(&b[..lim]) {
            *o += ai * bj;
        }
    }
    out
}

/// FFT convolution, truncated to `out_len` terms.
pub fn convolve_fft(a: &[C64], b: &[C64], out_len: usize) -> Vec<C64> {
    if a.is_empty() || b.is_empty() || out_len == 0 {
        return vec![C64::new(0.0, 0.0); out_len];
    }
    let full = a.len() + b.len() - 1;
    let n = full.next_power_of_two();
    let mut fa = vec![C64::new(0.0, 0.0); n];
    let mut fb = vec![C64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let fwd = fft_forward(n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_inverse(n).process(&mut fa);
    let scale = 1.0 / n as f64;
    let mut out: Vec<C64> = fa.into_iter().take(full.min(out_len)).map(|x| x * scale).collect();
    out.resize(out_len, C64::new(0.0, 0.0));
    out
}

/// Convolution with automatic choice of kernel.
pub fn convolve(a: &[C64], b: &[C64], out_len: usize) -> Vec<C64> {
    Kernel::Auto.convolve(a, b, out_len)
}

/// Product kernel selection.
///
/// FFT products carry an error relative to the largest coefficient, which
/// swamps the tail of series whose coefficients span many orders of
/// magnitude; `Direct` keeps each coefficient's own relative accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Auto,
    Direct,
}

impl Kernel {
    pub fn convolve(self, a: &[C64], b: &[C64], out_len: usize) -> Vec<C64> {
        if self == Kernel::Direct || a.len().min(b.len()) <= FFT_THRESHOLD {
            convolve_direct(a, b, out_len)
        } else {
            convolve_fft(a, b, out_len)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    lowest: i64,
    coeffs: Vec<C64>,
}

impl TruncatedSeries {
    /// Builds a series from the coefficients of `z^lowest, z^(lowest+1), ...`.
    ///
    /// Panics if `coeffs` is empty.
    pub fn new(lowest: i64, coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        Self { lowest, coeffs }
    }

    pub fn taylor(coeffs: Vec<C64>) -> Self {
        Self::new(0, coeffs)
    }

    pub fn zeros(lowest: i64, order: i64) -> Self {
        assert!(order >= lowest);
        Self::new(lowest, vec![C64::new(0.0, 0.0); (order - lowest + 1) as usize])
    }

    /// `z` as a Taylor series known up to `order`.
    pub fn identity(order: i64) -> Self {
        let mut s = Self::zeros(0, order.max(1));
        s.coeffs[1] = C64::new(1.0, 0.0);
        s
    }

    pub fn constant(c: C64, order: i64) -> Self {
        let mut s = Self::zeros(0, order.max(0));
        s.coeffs[0] = c;
        s
    }

    pub fn lowest_index(&self) -> i64 {
        self.lowest
    }

    /// Highest retained power.
    pub fn order(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient of `z^k`; zero below `lowest`. Panics above `order`.
    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.lowest {
            return C64::new(0.0, 0.0);
        }
        assert!(k <= self.order(), "coefficient z^{k} is beyond the truncation order {}", self.order());
        self.coeffs[(k - self.lowest) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, v: C64) {
        let i = (k - self.lowest) as usize;
        self.coeffs[i] = v;
    }

    /// Restrict to powers `<= order`, or pad with zeros when `order` is larger.
    ///
    /// Padding asserts knowledge the series does not have; callers use it only
    /// for exact polynomials.
    pub fn with_order(&self, order: i64) -> Self {
        assert!(order >= self.lowest);
        let mut c = self.coeffs.clone();
        c.resize((order - self.lowest + 1) as usize, C64::new(0.0, 0.0));
        Self::new(self.lowest, c)
    }

    /// Same series re-expressed with a smaller `lowest` index (zero padded below).
    pub fn with_lowest(&self, lowest: i64) -> Self {
        assert!(lowest <= self.lowest);
        let mut c = vec![C64::new(0.0, 0.0); (self.lowest - lowest) as usize];
        c.extend_from_slice(&self.coeffs);
        Self::new(lowest, c)
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::new(self.lowest, self.coeffs.iter().map(|&c| c * a).collect())
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let lowest = self.lowest.min(other.lowest);
        let order = self.order().min(other.order());
        let mut out = Self::zeros(lowest, order.max(lowest));
        for k in lowest..=order {
            out.set_coeff(k, self.coeff(k) + other.coeff(k) * sign);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    /// Product; the result order is the highest power both truncations fix.
    pub fn mul(&self, other: &Self) -> Self {
        let order = (self.order() + other.lowest).min(other.order() + self.lowest);
        self.mul_trunc(other, order)
    }

    /// Product truncated at `order`, which must not exceed what the operands determine.
    pub fn mul_trunc(&self, other: &Self, order: i64) -> Self {
        self.mul_trunc_with(other, order, Kernel::Auto)
    }

    pub fn mul_trunc_with(&self, other: &Self, order: i64, kernel: Kernel) -> Self {
        let lowest = self.lowest + other.lowest;
        let exact = (self.order() + other.lowest).min(other.order() + self.lowest);
        assert!(order <= exact, "requested order {order} exceeds exact order {exact}");
        let len = (order - lowest + 1).max(1) as usize;
        Self::new(lowest, kernel.convolve(&self.coeffs, &other.coeffs, len))
    }

    /// `f(z^p)` for `p >= 1`.
    pub fn substitute_power(&self, p: u32) -> Self {
        assert!(p >= 1);
        let p = p as i64;
        let lowest = self.lowest * p;
        let order = (self.order() + 1) * p - 1;
        let mut out = Self::zeros(lowest, order);
        for (i, &c) in self.coeffs.iter().enumerate() {
            out.set_coeff((self.lowest + i as i64) * p, c);
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.lowest + i as i64;
            if k != 0 {
                out.push((k, c * k as f64));
            }
        }
        if self.lowest >= 0 {
            let order = self.order() - 1;
            if order < 0 {
                return Self::zeros(0, 0);
            }
            let mut s = Self::zeros(0, order);
            for (k, c) in out {
                s.set_coeff(k - 1, c);
            }
            s
        } else {
            let mut s = Self::zeros(self.lowest - 1, self.order() - 1);
            for (k, c) in out {
                s.set_coeff(k - 1, c);
            }
            s
        }
    }

    /// Multiplicative inverse.
    ///
    /// The coefficient at `lowest` must be nonzero. For `z^l u(z)` with `u(0) != 0`
    /// known to order `K` the result `z^{-l}/u` is known to order `K - 2l`.
    pub fn reciprocal(&self) -> Result<Self> {
        let lead = self.coeffs[0];
        if lead.norm() < 1e-300 {
            return Err(Error::IncompatibleIndex(format!(
                "leading coefficient at z^{} vanishes",
                self.lowest
            )));
        }
        let n = self.coeffs.len();
        let inv = reciprocal_unit(&self.coeffs, n);
        Ok(Self::new(-self.lowest, inv))
    }

    /// Composition `self(inner(z))`; `inner` must have `lowest >= 1` and
    /// `self` must be Taylor.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.lowest < 0 {
            return Err(Error::IncompatibleIndex("outer series of a composition must be Taylor".into()));
        }
        let l = inner.first_nonzero_index().unwrap_or(inner.order() + 1).max(inner.lowest);
        if inner.lowest < 0 || l < 1 {
            return Err(Error::IncompatibleIndex("inner series of a composition needs lowest index >= 1".into()));
        }
        let order = inner.order().min((self.order() + 1) * l - 1);
        Ok(self.compose_trunc(inner, order))
    }

    /// Horner composition truncated at `order` (no validity checks beyond asserts).
    pub(crate) fn compose_trunc(&self, inner: &Self, order: i64) -> Self {
        self.compose_trunc_with(inner, order, Kernel::Auto)
    }

    pub(crate) fn compose_trunc_with(&self, inner: &Self, order: i64, kernel: Kernel) -> Self {
        assert!(self.lowest >= 0);
        let inner = inner.as_taylor(order);
        let mut acc = Self::constant(*self.coeffs.last().unwrap(), order);
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul_trunc_with(&inner, order, kernel);
            acc.coeffs[0] += c;
        }
        if self.lowest > 0 {
            let mut pow = inner.clone();
            for _ in 1..self.lowest {
                pow = pow.mul_trunc_with(&inner, order, kernel);
            }
            acc = acc.mul_trunc_with(&pow, order, kernel);
        }
        acc
    }

    /// View as a Taylor series (lowest 0) truncated or padded to `order`.
    pub(crate) fn as_taylor(&self, order: i64) -> Self {
        assert!(self.lowest >= 0);
        let mut c = vec![C64::new(0.0, 0.0); (order + 1) as usize];
        for k in self.lowest..=self.order().min(order) {
            c[k as usize] = self.coeff(k);
        }
        Self::taylor(c)
    }

    fn first_nonzero_index(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| c.norm() > 0.0)
            .map(|i| self.lowest + i as i64)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        if self.lowest == 0 {
            acc
        } else {
            acc * z.powi(self.lowest as i32)
        }
    }

    /// Horner evaluation carried in double-double arithmetic.
    ///
    /// For series whose terms are much larger than the sum, this keeps the
    /// error near one rounding of the result instead of one rounding of the
    /// largest term times the order.
    pub fn eval_dd(&self, z: C64) -> C64 {
        let mut acc = DdComplex::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_c64(z).add_c64(c);
        }
        let mut v = acc;
        for _ in 0..self.lowest.max(0) {
            v = v.mul_c64(z);
        }
        let out = v.to_c64();
        if self.lowest < 0 {
            out * z.powi(self.lowest as i32)
        } else {
            out
        }
    }

    /// Values at `rho * exp(2 pi i j / n)` for `j = 0..n` with one length-`n` FFT.
    ///
    /// Coefficients whose indices agree modulo `n` are folded together first, so
    /// the result is exact for any truncation order.
    pub fn eval_circle(&self, rho: f64, n: usize) -> Vec<C64> {
        assert!(n > 0);
        let mut bins = vec![C64::new(0.0, 0.0); n];
        let mut pow = rho.powi(self.lowest as i32);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.lowest + i as i64;
            bins[k.rem_euclid(n as i64) as usize] += c * pow;
            pow *= rho;
        }
        fft_inverse(n).process(&mut bins);
        bins
    }

    /// Largest coefficient modulus.
    ///
    /// NaN if any coefficient is NaN.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, |a, b| if b.is_nan() || b > a { b } else { a })
    }
}

/// Power-series inverse of `u` (with `u[0] != 0`) to `n` terms, by Newton doubling.
pub(crate) fn reciprocal_unit(u: &[C64], n: usize) -> Vec<C64> {
    reciprocal_unit_with(u, n, Kernel::Auto)
}

pub(crate) fn reciprocal_unit_with(u: &[C64], n: usize, kernel: Kernel) -> Vec<C64> {
    let mut inv = vec![C64::new(1.0, 0.0) / u[0]];
    let mut len = 1;
    while len < n {
        let next = (2 * len).min(n);
        // inv <- inv (2 - u inv)
        let ui = kernel.convolve(&u[..next.min(u.len())], &inv, next);
        let mut corr: Vec<C64> = ui.iter().map(|x| -x).collect();
        corr[0] += C64::new(2.0, 0.0);
        inv = kernel.convolve(&inv, &corr, next);
        len = next;
    }
    inv
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn norm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::norm(s, e + self.lo + o.lo)
    }

    fn mul_f(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        Dd::norm(p, e + self.lo * b)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct DdComplex {
    re: Dd,
    im: Dd,
}

impl DdComplex {
    fn mul_c64(self, z: C64) -> Self {
        Self {
            re: self.re.mul_f(z.re).add(self.im.mul_f(z.im).neg()),
            im: self.re.mul_f(z.im).add(self.im.mul_f(z.re)),
        }
    }

    fn add_c64(self, c: C64) -> Self {
        Self { re: self.re.add(Dd { hi: c.re, lo: 0.0 }), im: self.im.add(Dd { hi: c.im, lo: 0.0 }) }
    }

    fn to_c64(self) -> C64 {
        C64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// `exp(2 pi i x)`.
pub fn cis_turns(x: f64) -> C64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn product_of_one_plus_and_one_minus() {
        let a = TruncatedSeries::taylor(vec![c(1.0), c(1.0), c(0.0), c(0.0)]);
        let b = TruncatedSeries::taylor(vec![c(1.0), c(-1.0), c(0.0), c(0.0)]);
        let p = a.mul(&b);
        assert_eq!(p.order(), 3);
        let want = [1.0, 0.0, -1.0, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert!(close(p.coeff(k as i64), c(*w), 1e-15));
        }
    }

    #[test]
    fn reciprocal_of_geometric_laurent() {
        // 2z/(1-z) truncated at z^K; reciprocal is (1-z)/(2z) = z^-1/2 - 1/2.
        let k = 12;
        let s = TruncatedSeries::new(1, vec![c(2.0); k]);
        let r = s.reciprocal().unwrap();
        assert_eq!(r.lowest_index(), -1);
        assert!(close(r.coeff(-1), c(0.5), 1e-15));
        assert!(close(r.coeff(0), c(-0.5), 1e-15));
        for j in 1..=r.order() {
            assert!(r.coeff(j).norm() < 1e-14);
        }
        // product is 1 to the known order
        let one = s.mul(&r);
        assert!(close(one.coeff(0), c(1.0), 1e-14));
        for j in 1..=one.order() {
            assert!(one.coeff(j).norm() < 1e-14);
        }
    }

    #[test]
    fn reciprocal_rejects_zero_lead() {
        let s = TruncatedSeries::taylor(vec![c(0.0), c(1.0)]);
        assert!(matches!(s.reciprocal(), Err(Error::IncompatibleIndex(_))));
    }

    #[test]
    fn derivative_of_cube() {
        let s = TruncatedSeries::taylor(vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
        let d = s.derivative();
        assert_eq!(d.order(), 2);
        assert!(close(d.coeff(2), c(3.0), 0.0));
        assert!(d.coeff(0).norm() == 0.0 && d.coeff(1).norm() == 0.0);
    }

    #[test]
    fn derivative_of_laurent_pole() {
        let s = TruncatedSeries::new(-1, vec![c(2.0), c(5.0), c(1.0)]);
        let d = s.derivative();
        assert_eq!(d.lowest_index(), -2);
        assert!(close(d.coeff(-2), c(-2.0), 0.0));
        assert!(d.coeff(-1).norm() == 0.0);
        assert!(close(d.coeff(0), c(1.0), 0.0));
    }

    #[test]
    fn compose_with_geometric_inner() {
        // exp-like: f = 1 + w + w^2, w = z + z^2 => 1 + z + 2z^2 + 2z^3 + z^4
        let f = TruncatedSeries::taylor(vec![c(1.0), c(1.0), c(1.0)]);
        let w = TruncatedSeries::taylor(vec![c(0.0), c(1.0), c(1.0), c(0.0), c(0.0)]);
        let h = f.compose(&w).unwrap();
        assert_eq!(h.order(), 2);
        for (k, want) in [1.0, 1.0, 2.0].iter().enumerate() {
            assert!(close(h.coeff(k as i64), c(*want), 1e-15));
        }
        assert!(f.compose(&TruncatedSeries::taylor(vec![c(1.0), c(1.0)])).is_err());
    }

    #[test]
    fn double_double_horner_beats_cancellation() {
        // (1 - z)^8 near z = 1 expanded: huge alternating terms, tiny sum
        let mut co = vec![c(1.0)];
        for _ in 0..8 {
            let mut next = vec![c(0.0); co.len() + 1];
            for (k, &v) in co.iter().enumerate() {
                next[k] += v;
                next[k + 1] -= v;
            }
            co = next;
        }
        let s = TruncatedSeries::taylor(co);
        let z = C64::new(0.99, 0.0);
        let exact = (1.0 - 0.99f64).powi(8);
        assert!((s.eval_dd(z).re - exact).abs() < 1e-3 * exact);
        assert!((s.eval(z).re - exact).abs() > 1e-3 * exact);
    }

    #[test]
    fn circle_eval_matches_horner() {
        let coeffs: Vec<C64> = (0..200)
            .map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()) / (1.0 + k as f64))
            .collect();
        let s = TruncatedSeries::new(-1, coeffs);
        let rho = 0.8;
        for n in [64usize, 256, 1024] {
            let vals = s.eval_circle(rho, n);
            for j in (0..n).step_by(n / 16) {
                let z = cis_turns(j as f64 / n as f64) * rho;
                assert!(close(vals[j], s.eval(z), 1e-12), "n={n} j={j}");
            }
        }
    }

    proptest! {
        #[test]
        fn fft_and_direct_products_agree(
            a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 65..300),
            b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 65..300),
        ) {
            let a: Vec<C64> = a.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            let b: Vec<C64> = b.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            let n = a.len() + b.len() - 1;
            let d = convolve_direct(&a, &b, n);
            let f = convolve_fft(&a, &b, n);
            let scale = d.iter().map(|x| x.norm()).fold(1.0, f64::max);
            for (x, y) in d.iter().zip(&f) {
                prop_assert!((x - y).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn reciprocal_times_self_is_one(
            tail in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..150),
        ) {
            // keep u free of zeros in the closed disk so 1/u stays well conditioned
            let w = 0.9 / tail.len() as f64;
            let mut coeffs = vec![C64::new(1.0, 0.0)];
            coeffs.extend(tail.into_iter().map(|(x, y)| C64::new(x, y) * w));
            let s = TruncatedSeries::taylor(coeffs);
            let r = s.reciprocal().unwrap();
            let p = s.mul(&r);
            let scale = r.sup_norm().max(1.0);
            prop_assert!((p.coeff(0) - C64::new(1.0, 0.0)).norm() < 1e-12 * scale);
            for k in 1..=p.order() {
                prop_assert!(p.coeff(k).norm() < 1e-10 * scale);
            }
        }
    }
}
