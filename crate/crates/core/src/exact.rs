//! Exact scalar arithmetic: arbitrary-precision rationals, the circle
//! group ℝ/ℤ with the nearest-integer norm, and rational-endpoint
//! interval enclosures.
//!
//! Everything here compares exactly; there is no floating point on any
//! decision path. All values are immutable and all operations are pure.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A reduced fraction with positive denominator.
///
/// Serialized as the exact decimal string `"p/q"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom` in lowest terms.
    ///
    /// Panics if `denom` is zero.
    pub fn new(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    /// Convenience constructor from machine integers.
    pub fn of(numer: i64, denom: i64) -> Self {
        Self::new(BigInt::from(numer), BigInt::from(denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_int(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Nearest integer, with halfway cases rounded toward zero.
    pub fn round_half_toward_zero(&self) -> BigInt {
        let floor = self.floor_int();
        let frac = self - &Rational::from_int(floor.clone());
        let half = Rational::of(1, 2);
        match frac.cmp(&half) {
            Ordering::Less => floor,
            Ordering::Greater => floor + 1,
            // Tie: pick the candidate closer to zero.
            Ordering::Equal => {
                if self.is_negative() {
                    floor + 1
                } else {
                    floor
                }
            }
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Six-digit decimal approximation for human-readable tables.
    pub fn approx6(&self) -> String {
        match self.0.to_f64() {
            Some(f) if f.is_finite() => format!("{f:.6}"),
            _ => "out-of-range".to_owned(),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(BigInt::from(n))
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_int(n)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid rational literal {0:?}: expected \"p\" or \"p/q\" with q != 0")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRationalError(s.to_owned());
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s.trim()).map_err(|_| bad())?;
                Ok(Rational::from_int(n))
            }
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::new(p, q))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// An element of ℝ/ℤ, kept as its canonical representative in (-1/2, 1/2].
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CircleElem {
    rep: Rational,
}

/// Canonicalizes `q` modulo ℤ into (-1/2, 1/2].
///
/// The shift is `ceil(q - 1/2)`, the unique integer z with q - z in the
/// canonical interval.
pub fn reduce_mod_z(q: &Rational) -> CircleElem {
    let z = (q - &Rational::of(1, 2)).ceil_int();
    CircleElem {
        rep: q - &Rational::from_int(z),
    }
}

/// Distance from the representative to the nearest integer, `|rep|`.
pub fn circle_norm(c: &CircleElem) -> Rational {
    c.rep.abs()
}

/// Membership in the closed arc 𝕋_m = [-1/(4m), 1/(4m)] + ℤ.
pub fn in_tm(c: &CircleElem, m: u64) -> bool {
    assert!(m >= 1, "modulus must be positive");
    circle_norm(c) <= Rational::of(1, 4 * m as i64)
}

impl CircleElem {
    pub fn zero() -> Self {
        CircleElem {
            rep: Rational::zero(),
        }
    }

    pub fn rep(&self) -> &Rational {
        &self.rep
    }

    pub fn norm(&self) -> Rational {
        circle_norm(self)
    }

    pub fn in_tm(&self, m: u64) -> bool {
        in_tm(self, m)
    }

    /// Image under multiplication by the integer `k` (the k-th power in 𝕋).
    pub fn scale(&self, k: &BigInt) -> CircleElem {
        reduce_mod_z(&(&self.rep * &Rational::from_int(k.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }
}

impl Add for &CircleElem {
    type Output = CircleElem;
    fn add(self, rhs: &CircleElem) -> CircleElem {
        reduce_mod_z(&(&self.rep + &rhs.rep))
    }
}

impl Neg for &CircleElem {
    type Output = CircleElem;
    fn neg(self) -> CircleElem {
        reduce_mod_z(&-&self.rep)
    }
}

impl fmt::Debug for CircleElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+Z", self.rep)
    }
}

impl fmt::Display for CircleElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rep)
    }
}

/// Closed interval with rational endpoints; arithmetic always encloses the
/// exact result.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(r: Rational) -> Self {
        Interval {
            lo: r.clone(),
            hi: r,
        }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    /// `[-radius, radius]`.
    pub fn symmetric(radius: Rational) -> Self {
        assert!(!radius.is_negative());
        Interval {
            lo: -&radius,
            hi: radius,
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Enclosure of `{r * t : t in self}`.
    pub fn scale(&self, r: &Rational) -> Interval {
        let a = r * &self.lo;
        let b = r * &self.hi;
        if r.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    /// Max of the endpoint magnitudes: a bound for `|t|` over the interval.
    pub fn abs_bound(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    /// True iff the whole enclosure lies strictly inside the open interval
    /// `(lo, hi)`.
    pub fn strictly_inside(&self, lo: &Rational, hi: &Rational) -> bool {
        &self.lo > lo && &self.hi < hi
    }

    /// True iff the whole enclosure lies strictly outside `(lo, hi)`... on
    /// one side (entirely `<= lo` or entirely `>= hi`).
    pub fn strictly_outside(&self, lo: &Rational, hi: &Rational) -> bool {
        &self.hi < lo || &self.lo > hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::zero(), |a, b| a.add(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn reduce_boundary_keeps_plus_half() {
        assert_eq!(reduce_mod_z(&rat("3/2")).rep(), &rat("1/2"));
        assert_eq!(reduce_mod_z(&rat("-1/2")).rep(), &rat("1/2"));
        assert_eq!(reduce_mod_z(&rat("0")).rep(), &rat("0"));
    }

    #[test]
    fn reduce_matches_floor_based_reduction() {
        // Independent route: subtract floor, then fold [1/2, 1) down.
        let cases = ["-7/4", "5/3", "22/7", "-101/13", "9/2"];
        for s in cases {
            let q = rat(s);
            let mut r = &q - &Rational::from_int(q.floor_int());
            if r > rat("1/2") {
                r = r - Rational::one();
            }
            assert_eq!(reduce_mod_z(&q).rep(), &r, "q = {s}");
        }
        assert_eq!(reduce_mod_z(&rat("-7/4")).rep(), &rat("1/4"));
    }

    #[test]
    fn norm_is_distance_to_nearest_integer() {
        assert_eq!(reduce_mod_z(&rat("1/2")).norm(), rat("1/2"));
        assert_eq!(reduce_mod_z(&rat("0")).norm(), rat("0"));
        // 5/3 reduces to -1/3; brute-force min over z in {1, 2} gives 1/3.
        assert_eq!(reduce_mod_z(&rat("5/3")).norm(), rat("1/3"));
    }

    #[test]
    fn tm_membership_is_closed_and_nested() {
        let quarter = reduce_mod_z(&rat("1/4"));
        assert!(quarter.in_tm(1));
        assert!(!quarter.in_tm(2));
        assert!(reduce_mod_z(&rat("3/32")).in_tm(2));
    }

    #[test]
    fn round_half_toward_zero_ties() {
        assert_eq!(rat("5/2").round_half_toward_zero(), BigInt::from(2));
        assert_eq!(rat("-5/2").round_half_toward_zero(), BigInt::from(-2));
        assert_eq!(rat("2/3").round_half_toward_zero(), BigInt::from(1));
        assert_eq!(rat("-2/3").round_half_toward_zero(), BigInt::from(-1));
        assert_eq!(rat("1/2").round_half_toward_zero(), BigInt::from(0));
    }

    #[test]
    fn interval_ops() {
        let a = Interval::new(rat("0"), rat("1"));
        let b = Interval::new(rat("-1/2"), rat("1/2"));
        let s = a.add(&b);
        assert_eq!((s.lo, s.hi), (rat("-1/2"), rat("3/2")));

        let c = Interval::new(rat("1/4"), rat("1/2")).scale(&rat("-2"));
        assert_eq!((c.lo, c.hi), (rat("-1"), rat("-1/2")));

        let d = Interval::new(rat("-1/12"), rat("1/8"));
        assert_eq!(d.abs_bound(), rat("1/8"));
    }

    #[test]
    fn rational_string_round_trip() {
        for s in ["0/1", "3/2", "-7/4", "12345678901234567890/7"] {
            let r = rat(s);
            assert_eq!(r.to_string(), s);
            let json = serde_json::to_string(&r).unwrap();
            let back: Rational = serde_json::from_str(&json).unwrap();
            assert_eq!(back, r);
        }
    }
}
