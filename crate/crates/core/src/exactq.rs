//! Exact rational arithmetic and the q-analog primitives built on it.
//!
//! [`Rational`] is a thin newtype over `num_rational::BigRational` that adds
//! the `"num/den"` text form used by reports. The q-analogs (`[m]_q`,
//! `[k]_q!`, Gaussian binomials, `(a;q)_n`) are written once against the
//! [`QField`] trait so the same code runs on plain rationals and on
//! [`Tracked`] values, which additionally carry a degree bound in `q`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Integer power; negative exponents invert. Panics on `0^e` with `e < 0`.
    pub fn pow(&self, e: i64) -> Self {
        if e >= 0 {
            Rational(Pow::pow(&self.0, e as u64))
        } else {
            assert!(!self.is_zero(), "zero raised to a negative power");
            Rational(Pow::pow(&self.0.recip(), e.unsigned_abs()))
        }
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    /// Integers print bare (`"3"`, `"-1"`); everything else as `"num/den"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"n"`, `"n/d"` with optional sign and surrounding whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(num, den))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

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

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Ordinary binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn rational_valuation(r: &Rational, p: u64) -> i64 {
    int_valuation(r.numer(), p) as i64 - int_valuation(r.denom(), p) as i64
}

/// A rational sample point for `q`, excluding the values where `1 - q` or
/// some `[m]_q` vanishes.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QPoint(Rational);

impl QPoint {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_zero() || value.abs().is_one() {
            return Err(Error::InvalidQ(value.to_string()));
        }
        Ok(QPoint(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// `q^l` as a new sample point; never `±1` since `|q| != 1`.
    pub fn power(&self, l: u32) -> QPoint {
        QPoint(self.0.pow(i64::from(l)))
    }
}

impl FromStr for QPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QPoint::new(s.parse()?)
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The default eight-point sample set for identity checks.
pub fn default_q_samples() -> Vec<QPoint> {
    ["2", "3", "1/2", "5/3", "-2", "7", "-3/2", "10"]
        .iter()
        .map(|s| s.parse().expect("valid sample"))
        .collect()
}

/// Field operations shared by [`Rational`] and [`Tracked`].
///
/// Method names avoid `add`/`mul` so that they never collide with the
/// `std::ops` impls on `Rational`.
pub trait QField: Clone + Send + Sync {
    fn constant(r: Rational) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Panics on division by zero; callers validate their inputs first.
    fn over(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn value(&self) -> &Rational;

    fn int(n: i64) -> Self {
        Self::constant(Rational::from(n))
    }

    fn big(n: BigInt) -> Self {
        Self::constant(Rational::from(n))
    }

    fn negated(&self) -> Self {
        Self::int(0).minus(self)
    }

    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 { Self::int(1).over(self) } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::int(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.times(&base);
            }
        }
        acc
    }

    fn scaled(&self, r: &Rational) -> Self {
        self.times(&Self::constant(r.clone()))
    }
}

impl QField for Rational {
    fn constant(r: Rational) -> Self {
        r
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn over(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "rational division by zero");
        self / other
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn value(&self) -> &Rational {
        self
    }
    fn powi(&self, e: i64) -> Self {
        self.pow(e)
    }
}

/// A value of a rational function `N(q)/D(q)` evaluated at one point,
/// together with upper bounds on `deg N` and `deg D`.
///
/// Arithmetic follows the cleared-denominator rules, so the bounds are the
/// same at every sample point. If the value of an expression vanishes at
/// more than `num_deg` distinct points, `N` is the zero polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tracked {
    pub value: Rational,
    pub num_deg: u64,
    pub den_deg: u64,
}

impl Tracked {
    /// The indeterminate `q` itself, evaluated at `q`.
    pub fn variable(q: &QPoint) -> Self {
        Tracked { value: q.value().clone(), num_deg: 1, den_deg: 0 }
    }
}

impl QField for Tracked {
    fn constant(r: Rational) -> Self {
        Tracked { value: r, num_deg: 0, den_deg: 0 }
    }
    fn plus(&self, other: &Self) -> Self {
        Tracked {
            value: &self.value + &other.value,
            num_deg: (self.num_deg + other.den_deg).max(other.num_deg + self.den_deg),
            den_deg: self.den_deg + other.den_deg,
        }
    }
    fn minus(&self, other: &Self) -> Self {
        Tracked {
            value: &self.value - &other.value,
            num_deg: (self.num_deg + other.den_deg).max(other.num_deg + self.den_deg),
            den_deg: self.den_deg + other.den_deg,
        }
    }
    fn times(&self, other: &Self) -> Self {
        Tracked {
            value: &self.value * &other.value,
            num_deg: self.num_deg + other.num_deg,
            den_deg: self.den_deg + other.den_deg,
        }
    }
    fn over(&self, other: &Self) -> Self {
        assert!(!other.value.is_zero(), "tracked division by zero");
        Tracked {
            value: &self.value / &other.value,
            num_deg: self.num_deg + other.den_deg,
            den_deg: self.den_deg + other.num_deg,
        }
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
    fn value(&self) -> &Rational {
        &self.value
    }
    fn scaled(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::int(0);
        }
        Tracked { value: &self.value * r, ..self.clone() }
    }
}

/// `[m]_q = (1 - q^m) / (1 - q)` over any [`QField`].
pub fn qint_in<T: QField>(m: i64, q: &T) -> T {
    let one = T::int(1);
    one.minus(&q.powi(m)).over(&one.minus(q))
}

pub fn qfactorial_in<T: QField>(k: u32, q: &T) -> T {
    (1..=i64::from(k)).fold(T::int(1), |acc, j| acc.times(&qint_in(j, q)))
}

pub fn qbinomial_in<T: QField>(r: u32, k: u32, q: &T) -> T {
    if k > r {
        return T::int(0);
    }
    let num = (0..i64::from(k)).fold(T::int(1), |acc, j| acc.times(&qint_in(i64::from(r) - j, q)));
    num.over(&qfactorial_in(k, q))
}

pub fn qpochhammer_in<T: QField>(a: &T, q: &T, n: u32) -> T {
    let one = T::int(1);
    let mut acc = T::int(1);
    let mut qi = T::int(1);
    for _ in 0..n {
        acc = acc.times(&one.minus(&a.times(&qi)));
        qi = qi.times(q);
    }
    acc
}

/// `[m]_q`; for `m >= 0` this is `1 + q + ... + q^(m-1)`.
pub fn qint(m: i64, q: &QPoint) -> Rational {
    qint_in(m, q.value())
}

/// `[k]_q! = [k]_q [k-1]_q ... [1]_q`, with `[0]_q! = 1`.
pub fn qfactorial(k: u32, q: &QPoint) -> Rational {
    qfactorial_in(k, q.value())
}

/// Gaussian binomial `[r]_q ... [r-k+1]_q / [k]_q!`; zero when `k > r`.
pub fn qbinomial(r: u32, k: u32, q: &QPoint) -> Rational {
    qbinomial_in(r, k, q.value())
}

/// `(a;q)_n = (1-a)(1-aq)...(1-aq^(n-1))`.
pub fn qpochhammer(a: &Rational, q: &QPoint, n: u32) -> Rational {
    qpochhammer_in(a, q.value(), n)
}

/// Falling factorial `x(x-1)...(x-k+1)`.
pub fn falling_factorial(x: &Rational, k: u32) -> Rational {
    (0..k).map(|i| x - Rational::from(i)).product()
}

/// Exact value `1 / (1 - q^c)` of the geometric series `sum_m q^(cm)`.
pub fn geom_sum(c: u32, q: &QPoint) -> Result<Rational> {
    if c == 0 {
        return Err(Error::InvalidArgument("geom_sum needs c >= 1".into()));
    }
    geom_sum_in(c, q.value())
}

pub(crate) fn geom_sum_in<T: QField>(c: u32, q: &T) -> Result<T> {
    let denom = T::int(1).minus(&q.powi(i64::from(c)));
    if denom.is_zero() {
        return Err(Error::InvalidArgument("geom_sum with q^c = 1".into()));
    }
    Ok(T::int(1).over(&denom))
}
