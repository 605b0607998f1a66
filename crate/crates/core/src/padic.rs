//! Finite-precision arithmetic in `Q_p` for odd primes.
//!
//! A [`PadicNumber`] is `p^v * u` known modulo `p^A` (absolute precision
//! `A`), with `u` a unit reduced modulo `p^(A - v)`. Relative precision is
//! capped at the context precision `M`. Precision propagates pessimistically
//! through every operation, so a reported digit is always a correct digit.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactq::{int_valuation, rational_valuation, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicContext {
    p: u64,
    precision: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicContext {
    /// `p` must be an odd prime and `precision >= 1`.
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!("p = {p} must be an odd prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidArgument("p-adic precision must be >= 1".into()));
        }
        Ok(PadicContext { p, precision })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        PadicContext { p: self.p, precision }
    }

    fn ppow(&self, e: i64) -> BigInt {
        debug_assert!(e >= 0);
        num_traits::pow(BigInt::from(self.p), e as usize)
    }
}

impl fmt::Display for PadicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q_{} (M = {})", self.p, self.precision)
    }
}

/// p-adic distance between two values, as an exponent of `1/p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    /// The values are exactly equal.
    Zero,
    /// `|x - y|_p = p^(-e)`.
    Exponent(i64),
    /// The difference vanishes to the available precision: `|x - y|_p <= p^(-e)`.
    AtMost(i64),
}

impl Distance {
    /// The guaranteed lower bound on the valuation of the difference.
    pub fn min_exponent(&self) -> i64 {
        match *self {
            Distance::Zero => i64::MAX,
            Distance::Exponent(e) | Distance::AtMost(e) => e,
        }
    }

    /// Is `|x - y|_p <= p^(-e)` guaranteed?
    pub fn within(&self, e: i64) -> bool {
        self.min_exponent() >= e
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Zero => write!(f, "inf"),
            Distance::Exponent(e) => write!(f, "{e}"),
            Distance::AtMost(e) => write!(f, ">={e}"),
        }
    }
}

/// Exponent `w` in `q^w`: an integer, an element of `Z_p ∩ Q`, or a p-adic number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Integer(i64),
    Rational(Rational),
    Padic(PadicNumber),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    ctx: PadicContext,
    /// `None` when the value is zero to the available precision.
    valuation: Option<i64>,
    unit: BigInt,
    abs_prec: i64,
}

impl PadicNumber {
    /// Zero known modulo `p^abs_prec`.
    pub fn zero(ctx: PadicContext, abs_prec: i64) -> Self {
        PadicNumber { ctx, valuation: None, unit: BigInt::zero(), abs_prec }
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::from_rational(&Rational::one(), ctx)
    }

    pub fn from_integer(n: i64, ctx: PadicContext) -> Self {
        Self::from_rational(&Rational::from(n), ctx)
    }

    /// Image of `r` in `Q_p` at absolute precision `M + v(r)`. Zero maps to
    /// zero known modulo `p^M`.
    pub fn from_rational(r: &Rational, ctx: PadicContext) -> Self {
        if r.is_zero() {
            return Self::zero(ctx, i64::from(ctx.precision));
        }
        let v = rational_valuation(r, ctx.p);
        Self::from_rational_abs(r, ctx, v + i64::from(ctx.precision))
    }

    /// Image of `r` known modulo `p^abs_prec` (relative precision still capped at `M`).
    pub fn from_rational_abs(r: &Rational, ctx: PadicContext, abs_prec: i64) -> Self {
        if r.is_zero() {
            return Self::zero(ctx, abs_prec);
        }
        let p = ctx.p;
        let vn = int_valuation(r.numer(), p);
        let vd = int_valuation(r.denom(), p);
        let v = i64::from(vn) - i64::from(vd);
        let rel = (abs_prec - v).min(i64::from(ctx.precision));
        if rel <= 0 {
            return Self::zero(ctx, abs_prec);
        }
        let modulus = ctx.ppow(rel);
        let num = r.numer() / ctx.ppow(i64::from(vn));
        let den = r.denom() / ctx.ppow(i64::from(vd));
        let inv = den.mod_floor(&modulus).modinv(&modulus).expect("unit denominator");
        let unit = (num * inv).mod_floor(&modulus);
        PadicNumber { ctx, valuation: Some(v), unit, abs_prec: v + rel }
    }

    /// Builds `p^base * digits` known modulo `p^abs_prec`, normalizing the
    /// leading digit.
    fn normalize(ctx: PadicContext, base: i64, digits: BigInt, abs_prec: i64) -> Self {
        if abs_prec <= base {
            return Self::zero(ctx, abs_prec);
        }
        let digits = digits.mod_floor(&ctx.ppow(abs_prec - base));
        if digits.is_zero() {
            return Self::zero(ctx, abs_prec);
        }
        let shift = int_valuation(&digits, ctx.p);
        let v = base + i64::from(shift);
        let abs_prec = abs_prec.min(v + i64::from(ctx.precision));
        let unit = (digits / ctx.ppow(i64::from(shift))).mod_floor(&ctx.ppow(abs_prec - v));
        PadicNumber { ctx, valuation: Some(v), unit, abs_prec }
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn prime(&self) -> u64 {
        self.ctx.p
    }

    /// Valuation, `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    /// Absolute precision `A`: the value is known modulo `p^A`.
    pub fn precision(&self) -> i64 {
        self.abs_prec
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    /// `|x|_p` as an exponent: `|x|_p = p^(-v)`.
    pub fn norm_exponent(&self) -> Distance {
        match self.valuation {
            Some(v) => Distance::Exponent(v),
            None => Distance::AtMost(self.abs_prec),
        }
    }

    /// The representative `p^v * u` as an exact rational.
    pub fn representative(&self) -> Rational {
        match self.valuation {
            None => Rational::zero(),
            Some(v) if v >= 0 => Rational::from(&self.unit * self.ctx.ppow(v)),
            Some(v) => Rational::new(self.unit.clone(), self.ctx.ppow(-v)),
        }
    }

    /// Residue modulo `p^n` for an integral value; `None` if `v < 0` or
    /// `n` exceeds the known precision.
    pub fn residue(&self, n: u32) -> Option<BigInt> {
        let n = i64::from(n);
        if n > self.abs_prec {
            return None;
        }
        match self.valuation {
            None => Some(BigInt::zero()),
            Some(v) if v < 0 => None,
            Some(v) => Some((&self.unit * self.ctx.ppow(v)).mod_floor(&self.ctx.ppow(n))),
        }
    }

    /// Drops precision to at most `abs_prec`.
    pub fn truncate(&self, abs_prec: i64) -> Self {
        if abs_prec >= self.abs_prec {
            return self.clone();
        }
        match self.valuation {
            None => Self::zero(self.ctx, abs_prec),
            Some(v) => Self::normalize(self.ctx, v, self.unit.clone(), abs_prec),
        }
    }

    /// Same representative in a context of different working precision.
    pub fn recontext(&self, ctx: PadicContext) -> Result<Self> {
        if ctx.p != self.ctx.p {
            return Err(Error::ContextMismatch(ctx.to_string(), self.ctx.to_string()));
        }
        Ok(match self.valuation {
            None => Self::zero(ctx, self.abs_prec),
            Some(v) => Self::normalize(ctx, v, self.unit.clone(), self.abs_prec),
        })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch(self.ctx.to_string(), other.ctx.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let abs = self.abs_prec.min(other.abs_prec);
        Ok(match (self.valuation, other.valuation) {
            (None, None) => Self::zero(self.ctx, abs),
            (Some(v), None) => Self::normalize(self.ctx, v, self.unit.clone(), abs),
            (None, Some(v)) => Self::normalize(self.ctx, v, other.unit.clone(), abs),
            (Some(vx), Some(vy)) => {
                let m = vx.min(vy);
                let digits = &self.unit * self.ctx.ppow(vx - m) + &other.unit * self.ctx.ppow(vy - m);
                Self::normalize(self.ctx, m, digits, abs)
            }
        })
    }

    pub fn neg(&self) -> Self {
        match self.valuation {
            None => self.clone(),
            Some(v) => Self::normalize(self.ctx, v, -&self.unit, self.abs_prec),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(match (self.valuation, other.valuation) {
            (None, None) => Self::zero(self.ctx, self.abs_prec + other.abs_prec),
            (Some(v), None) => Self::zero(self.ctx, other.abs_prec + v),
            (None, Some(v)) => Self::zero(self.ctx, self.abs_prec + v),
            (Some(vx), Some(vy)) => {
                let abs = (self.abs_prec + vy).min(other.abs_prec + vx);
                Self::normalize(self.ctx, vx + vy, &self.unit * &other.unit, abs)
            }
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let vy = other.valuation.ok_or(Error::DivisionByZero)?;
        Ok(match self.valuation {
            None => Self::zero(self.ctx, self.abs_prec - vy),
            Some(vx) => {
                let rel = (self.abs_prec - vx).min(other.abs_prec - vy);
                let modulus = self.ctx.ppow(rel);
                let inv = other.unit.mod_floor(&modulus).modinv(&modulus).expect("unit");
                Self::normalize(self.ctx, vx - vy, &self.unit * inv, vx - vy + rel)
            }
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::one(self.ctx).div(self)
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn pow_int(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The p-adic logarithm `sum (-1)^(n+1) (x-1)^n / n` for `v(x - 1) >= 1`.
    ///
    /// For odd `p` the logarithm is an isometry on `1 + pZ_p`, so the result
    /// keeps the absolute precision of `x`.
    pub fn plog(&self) -> Result<Self> {
        let one = Self::one(self.ctx);
        let y = self.sub(&one)?;
        let abs = y.abs_prec;
        let vy = match y.valuation {
            None => return Ok(Self::zero(self.ctx, abs)),
            Some(v) if v >= 1 => v,
            Some(_) => return Err(Error::Domain(format!("plog needs |x - 1|_p < 1, got x = {self}"))),
        };
        let p = self.ctx.p;
        let y = y.representative();
        let mut sum = Rational::zero();
        let mut term = Rational::one();
        let mut n: u64 = 1;
        // n*v - floor(log_p n) bounds term valuations from below and increases with n.
        while (n as i64) * vy - i64::from(n.ilog(p)) < abs {
            term = &term * &y;
            let t = &term / Rational::from(n);
            sum = if n % 2 == 1 { sum + t } else { sum - t };
            n += 1;
        }
        Ok(Self::from_rational_abs(&sum, self.ctx, abs))
    }

    /// The p-adic exponential `sum x^n / n!` for `v(x) >= 1`.
    pub fn pexp(&self) -> Result<Self> {
        let abs = self.abs_prec;
        let vx = match self.valuation {
            None => return Ok(Self::one(self.ctx).truncate(abs)),
            Some(v) if v >= 1 => v,
            Some(_) => return Err(Error::Domain(format!("pexp needs |x|_p < 1, got x = {self}"))),
        };
        let p = self.ctx.p as i64;
        let x = self.representative();
        let mut sum = Rational::one();
        let mut term = Rational::one();
        let mut n: i64 = 1;
        // v(x^n/n!) >= n*v - (n-1)/(p-1), increasing in n for p >= 3.
        while (n * vx) * (p - 1) - (n - 1) < abs * (p - 1) {
            term = &term * &x / Rational::from(n);
            sum = sum + &term;
            n += 1;
        }
        Ok(Self::from_rational_abs(&sum, self.ctx, abs))
    }

    /// `q^w`: exact powers for integer `w`, `exp(w log q)` otherwise.
    pub fn q_power(&self, w: &Exponent) -> Result<Self> {
        let as_padic = match w {
            Exponent::Integer(e) => return self.q_power_int(*e),
            Exponent::Rational(r) => {
                if let Some(e) = r.to_i64() {
                    return self.q_power_int(e);
                }
                if rational_valuation(r, self.ctx.p) < 0 {
                    return Err(Error::Domain(format!("exponent {r} is not in Z_p")));
                }
                Self::from_rational(r, self.ctx)
            }
            Exponent::Padic(x) => {
                if x.valuation.is_some_and(|v| v < 0) {
                    return Err(Error::Domain(format!("exponent {x} is not in Z_p")));
                }
                x.clone()
            }
        };
        let log = self.plog()?;
        as_padic.mul(&log)?.pexp()
    }

    fn q_power_int(&self, e: i64) -> Result<Self> {
        if self.is_zero() && e <= 0 {
            return Err(Error::Domain("zero base with non-positive exponent".into()));
        }
        self.pow_int(e)
    }

    /// `[w]_q = (1 - q^w) / (1 - q)` in `Q_p`.
    pub fn qint(&self, w: &Exponent) -> Result<Self> {
        let one = Self::one(self.ctx);
        let num = one.sub(&self.q_power(w)?)?;
        num.div(&one.sub(self)?)
    }

    /// `|self - other|_p` as an exponent of `1/p`.
    pub fn distance(&self, other: &Self) -> Result<Distance> {
        Ok(self.sub(other)?.norm_exponent())
    }
}

/// Free-function form of [`PadicNumber::qint`].
pub fn qint_padic(w: &Exponent, q: &PadicNumber) -> Result<PadicNumber> {
    q.qint(w)
}

impl fmt::Display for PadicNumber {
    /// `"p^v * u (mod p^A)"`, with `u` in decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.ctx.p;
        match self.valuation {
            None => write!(f, "0 (mod {p}^{})", self.abs_prec),
            Some(v) => write!(f, "{p}^{v} * {} (mod {p}^{})", self.unit, self.abs_prec),
        }
    }
}

impl fmt::Debug for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rational-level helper: p-adic distance exponent of an exact difference.
pub fn rational_distance(x: &Rational, y: &Rational, p: u64) -> Distance {
    let d = x - y;
    if d.is_zero() {
        Distance::Zero
    } else {
        Distance::Exponent(rational_valuation(&d, p))
    }
}
