use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A rational external angle `p/q` in `[0, 1)`, in lowest terms, with
/// `q = 2^m * q_odd`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawAngle", into = "RawAngle")]
pub struct ExternalAngle {
    p: u128,
    q: u128,
}

#[derive(Serialize, Deserialize)]
struct RawAngle {
    p: u128,
    q: u128,
}

impl TryFrom<RawAngle> for ExternalAngle {
    type Error = Error;
    fn try_from(r: RawAngle) -> Result<Self> {
        ExternalAngle::new(r.p, r.q)
    }
}

impl From<ExternalAngle> for RawAngle {
    fn from(a: ExternalAngle) -> Self {
        RawAngle { p: a.p, q: a.q }
    }
}

impl ExternalAngle {
    /// `p/q` reduced modulo 1 and to lowest terms.
    pub fn new(p: u128, q: u128) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidAngle("zero denominator".into()));
        }
        let p = p % q;
        let g = gcd(p, q);
        let (p, q) = if p == 0 { (0, 1) } else { (p / g, q / g) };
        let a = Self { p, q };
        if a.odd_denominator() > (1u128 << 63) - 1 {
            return Err(Error::InvalidAngle(format!("odd part of {q} exceeds 2^63 - 1")));
        }
        Ok(a)
    }

    pub fn zero() -> Self {
        Self { p: 0, q: 1 }
    }

    pub fn numerator(&self) -> u128 {
        self.p
    }

    pub fn denominator(&self) -> u128 {
        self.q
    }

    /// `m` such that `q = 2^m q_odd`.
    pub fn dyadic_exponent(&self) -> u32 {
        self.q.trailing_zeros()
    }

    pub fn odd_denominator(&self) -> u128 {
        self.q >> self.q.trailing_zeros()
    }

    pub fn is_periodic(&self) -> bool {
        self.dyadic_exponent() == 0
    }

    /// `2t mod 1`.
    pub fn doubled(&self) -> Self {
        let p2 = if self.p >= self.q - self.p { self.p - (self.q - self.p) } else { self.p * 2 };
        Self::new(p2, self.q).expect("doubling preserves validity")
    }

    /// `2^k t mod 1`.
    pub fn doubled_n(&self, k: u32) -> Self {
        (0..k).fold(*self, |a, _| a.doubled())
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Leading `nbits` binary digits of the angle, most significant first.
    pub fn binary_digits(&self, nbits: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(nbits);
        let mut a = *self;
        for _ in 0..nbits {
            let bit = u8::from(a.p >= a.q - a.p);
            out.push(bit);
            a = a.doubled();
        }
        out
    }
}

impl fmt::Display for ExternalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for ExternalAngle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<u128>()
                .map_err(|_| Error::InvalidAngle(format!("cannot parse `{s}` as p/q")))
        };
        match s.split_once('/') {
            Some((p, q)) => Self::new(parse(p)?, parse(q)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

/// Orbit of an angle under doubling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleOrbit {
    pub preperiod: u32,
    pub period: usize,
    /// `t, 2t, 4t, ...` up to (not including) the first repeat.
    pub orbit: Vec<ExternalAngle>,
}

impl AngleOrbit {
    pub fn periodic_part(&self) -> &[ExternalAngle] {
        &self.orbit[self.preperiod as usize..]
    }
}

pub fn angle_orbit(angle: ExternalAngle) -> AngleOrbit {
    let m = angle.dyadic_exponent();
    let mut orbit = Vec::new();
    let mut a = angle;
    for _ in 0..m {
        orbit.push(a);
        a = a.doubled();
    }
    let start = a;
    loop {
        orbit.push(a);
        a = a.doubled();
        if a == start {
            break;
        }
    }
    AngleOrbit { preperiod: m, period: orbit.len() - m as usize, orbit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ang(s: &str) -> ExternalAngle {
        s.parse().unwrap()
    }

    #[test]
    fn periods_from_known_denominators() {
        let o = angle_orbit(ang("1/3"));
        assert_eq!(o.period, 2);
        assert_eq!(o.orbit, vec![ang("1/3"), ang("2/3")]);
        assert_eq!(angle_orbit(ang("1/7")).period, 3);
        for (q, n) in [(5u128, 4usize), (15, 4), (31, 5), (9, 6), (21, 6), (63, 6), (127, 7), (17, 8), (255, 8)] {
            assert_eq!(angle_orbit(ExternalAngle::new(1, q).unwrap()).period, n, "q = {q}");
        }
        let z = angle_orbit(ExternalAngle::zero());
        assert_eq!((z.preperiod, z.period), (0, 1));
    }

    #[test]
    fn dyadic_angle_has_preperiod() {
        let o = angle_orbit(ang("3/8"));
        assert_eq!(o.preperiod, 3);
        assert_eq!(o.period, 1);
        assert_eq!(o.periodic_part(), &[ExternalAngle::zero()]);
        let a = ang("5/12");
        assert_eq!((a.dyadic_exponent(), a.odd_denominator()), (2, 3));
    }

    #[test]
    fn reduction_and_parsing() {
        assert_eq!(ang("2/6"), ang("1/3"));
        assert_eq!(ang("4/3"), ang("1/3"));
        assert_eq!(ang("0"), ExternalAngle::zero());
        assert!("1/0".parse::<ExternalAngle>().is_err());
        assert!("x/3".parse::<ExternalAngle>().is_err());
        assert_eq!(ang("1/3").to_string(), "1/3");
    }

    #[test]
    fn binary_digits_of_one_third() {
        assert_eq!(ang("1/3").binary_digits(6), vec![0, 1, 0, 1, 0, 1]);
        assert_eq!(ang("3/8").binary_digits(4), vec![0, 1, 1, 0]);
    }

    #[test]
    fn large_odd_denominator() {
        let q = (1u128 << 63) - 1;
        let a = ExternalAngle::new(1, q).unwrap();
        assert_eq!(angle_orbit(a).period, 63);
        assert!(ExternalAngle::new(1, 1u128 << 64 | 1).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let a = ang("5/12");
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"p":5,"q":12}"#);
        assert_eq!(serde_json::from_str::<ExternalAngle>(&s).unwrap(), a);
    }

    fn mult_order_2(q: u128) -> usize {
        let mut x = 2 % q;
        let mut n = 1;
        while x != 1 % q {
            x = x * 2 % q;
            n += 1;
        }
        n
    }

    proptest! {
        #[test]
        fn period_divides_order_of_two(p in 0u128..10_000, k in 0u128..5_000) {
            let q = 2 * k + 1;
            let a = ExternalAngle::new(p, q).unwrap();
            let n = angle_orbit(a).period;
            prop_assert_eq!(mult_order_2(q) % n, 0);
            prop_assert_eq!(a.doubled_n(n as u32), a);
        }
    }
}
