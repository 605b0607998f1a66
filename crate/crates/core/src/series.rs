//! Truncated power and Laurent series with rational coefficients.
//!
//! A [`PowerSeries`] of order `N` stores coefficients `0..=N` and is known
//! modulo `x^(N+1)`. Binary operations truncate to the smaller order.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactq::{binomial, factorial, Rational};

/// Truncation order used when a caller does not pick one.
pub const DEFAULT_ORDER: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Q,
    U,
}

impl Var {
    pub fn symbol(self) -> char {
        match self {
            Var::T => 't',
            Var::Q => 'q',
            Var::U => 'u',
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PowerSeries {
    var: Var,
    coeffs: Vec<Rational>,
}

impl PowerSeries {
    /// Builds a series of the given order; missing coefficients are zero and
    /// extra ones are dropped.
    pub fn new(var: Var, mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        PowerSeries { var, coeffs }
    }

    pub fn zero(var: Var, order: usize) -> Self {
        Self::new(var, Vec::new(), order)
    }

    pub fn constant(var: Var, c: Rational, order: usize) -> Self {
        Self::new(var, vec![c], order)
    }

    pub fn one(var: Var, order: usize) -> Self {
        Self::constant(var, Rational::one(), order)
    }

    /// `c * x^power`.
    pub fn monomial(var: Var, c: Rational, power: usize, order: usize) -> Self {
        let mut s = Self::zero(var, order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    /// `exp(a x) = sum a^i x^i / i!`.
    pub fn exp_scaled(var: Var, a: &Rational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = Rational::one();
        for i in 0..=order {
            if i > 0 {
                term = term * a / Rational::from(i as u64);
            }
            coeffs.push(term.clone());
        }
        PowerSeries { var, coeffs }
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; zero beyond the stored order.
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.var, self.coeffs[..=order.min(self.order())].to_vec(), order.min(self.order()))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var.symbol(), other.var.symbol()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        Ok(PowerSeries { var: self.var, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let order = self.order().min(other.order());
        let mut coeffs = vec![Rational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + a * b;
                }
            }
        }
        Ok(PowerSeries { var: self.var, coeffs })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PowerSeries { var: self.var, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplicative inverse by the triangular recurrence
    /// `g_n = -(1/f_0) sum_{i=1..n} f_i g_(n-i)`.
    pub fn invert(&self) -> Result<Self> {
        let f0 = &self.coeffs[0];
        if f0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inv0 = f0.recip();
        let order = self.order();
        let mut g: Vec<Rational> = Vec::with_capacity(order + 1);
        g.push(inv0.clone());
        for n in 1..=order {
            let s: Rational = (1..=n)
                .filter(|&i| !self.coeffs[i].is_zero())
                .map(|i| &self.coeffs[i] * &g[n - i])
                .sum();
            g.push(-(s * &inv0));
        }
        Ok(PowerSeries { var: self.var, coeffs: g })
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(self.var, self.order());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies by `x^k`, keeping the order.
    pub fn shift_up(&self, k: usize) -> Self {
        let order = self.order();
        let mut coeffs = vec![Rational::zero(); order + 1];
        for i in 0..=order {
            if i + k <= order {
                coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        PowerSeries { var: self.var, coeffs }
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.var.symbol();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c}){x}")?,
                _ => write!(f, "({c}){x}^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({x}^{})", self.order() + 1)
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `sum_{i >= -pole_order} c_i x^i`, stored as `x^(-pole_order) * body`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentSeries {
    pole_order: usize,
    body: PowerSeries,
}

impl LaurentSeries {
    /// Normalizes by stripping vanishing leading negative-power coefficients;
    /// each stripped coefficient costs one order of the body.
    pub fn new(pole_order: usize, body: PowerSeries) -> Self {
        let mut pole_order = pole_order;
        let mut body = body;
        while pole_order > 0 && body.order() > 0 && body.coeffs[0].is_zero() {
            let order = body.order() - 1;
            body = PowerSeries { var: body.var, coeffs: body.coeffs[1..=order + 1].to_vec() };
            pole_order -= 1;
        }
        LaurentSeries { pole_order, body }
    }

    /// Builds the series without normalizing, so every stored negative-power
    /// coefficient stays inspectable.
    pub fn raw(pole_order: usize, body: PowerSeries) -> Self {
        LaurentSeries { pole_order, body }
    }

    pub fn pole_order(&self) -> usize {
        self.pole_order
    }

    pub fn body(&self) -> &PowerSeries {
        &self.body
    }

    /// Highest power whose coefficient is known.
    pub fn known_up_to(&self) -> i64 {
        self.body.order() as i64 - self.pole_order as i64
    }

    /// Coefficient of `x^i`.
    pub fn coeff(&self, i: i64) -> Rational {
        let idx = i + self.pole_order as i64;
        if idx < 0 {
            Rational::zero()
        } else {
            self.body.coeff(idx as usize)
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(LaurentSeries::raw(self.pole_order + other.pole_order, self.body.mul(&other.body)?))
    }
}

/// `w t / (e^(w t) - 1)` as a series in `t`.
fn todd_factor(w: &Rational, order: usize) -> Result<PowerSeries> {
    // (e^(wt) - 1)/(wt) = sum_i (wt)^i / (i+1)!
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut wp = Rational::one();
    for i in 0..=order {
        coeffs.push(&wp / Rational::from(factorial(i as u64 + 1)));
        wp = wp * w;
    }
    PowerSeries::new(Var::T, coeffs, order).invert()
}

fn egf_to_values(s: &PowerSeries) -> Vec<Rational> {
    s.coeffs().iter().enumerate().map(|(n, c)| c * Rational::from(factorial(n as u64))).collect()
}

/// `B_n^(r)(x)` for `n = 0..=order`, from `(t/(e^t - 1))^r e^(xt)`.
pub fn bernoulli_series(r: u32, x: &Rational, order: usize) -> Vec<Rational> {
    let base = todd_factor(&Rational::one(), order).expect("unit constant term");
    let gf = base
        .pow(r)
        .and_then(|s| s.mul(&PowerSeries::exp_scaled(Var::T, x, order)))
        .expect("same variable");
    egf_to_values(&gf)
}

/// Barnes multiple Bernoulli polynomials `B_n^(k)(x | w_1..w_k)` for
/// `n = 0..=order`, from `prod_j (w_j/(e^(w_j t) - 1)) t^k e^(xt)`.
pub fn barnes_series(x: &Rational, weights: &[Rational], order: usize) -> Result<Vec<Rational>> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("barnes_series needs k >= 1 weights".into()));
    }
    let mut gf = PowerSeries::exp_scaled(Var::T, x, order);
    for w in weights {
        if w.is_zero() {
            return Err(Error::InvalidArgument("Barnes weight must be nonzero".into()));
        }
        gf = gf.mul(&todd_factor(w, order)?)?;
    }
    Ok(egf_to_values(&gf))
}

/// `c / [c]_q` expanded in `u = q - 1`.
pub fn u_expand_ratio(c: u32, order: usize) -> Result<PowerSeries> {
    if c == 0 {
        return Err(Error::InvalidArgument("u_expand_ratio needs c >= 1".into()));
    }
    // [c]_q / c = sum_{i>=1} C(c,i) u^(i-1) / c
    let cr = Rational::from(c);
    let coeffs = (1..=order as u64 + 1).map(|i| Rational::from(binomial(u64::from(c), i)) / &cr).collect();
    PowerSeries::new(Var::U, coeffs, order).invert()
}

/// `log(1 + u) / u = 1 - u/2 + u^2/3 - ...`.
pub fn u_expand_log(order: usize) -> PowerSeries {
    let coeffs = (0..=order)
        .map(|i| {
            let c = Rational::new(1, i as i64 + 1);
            if i % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    PowerSeries::new(Var::U, coeffs, order)
}

/// `(1 + u)^w` as a series in `u`.
pub fn u_expand_power(w: u32, order: usize) -> PowerSeries {
    let coeffs = (0..=order as u64).map(|i| Rational::from(binomial(u64::from(w), i))).collect();
    PowerSeries::new(Var::U, coeffs, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn binom(n: usize, k: usize) -> Rational {
        Rational::from(binomial(n as u64, k as u64))
    }

    #[test]
    fn ring_examples() {
        let f = PowerSeries::new(Var::T, vec![r("1"), r("2"), r("-3")], 6);
        assert_eq!(f.add(&PowerSeries::zero(Var::T, 6)).unwrap(), f);
        let g = PowerSeries::new(Var::T, vec![r("1"), r("-1")], 5).invert().unwrap();
        assert!(g.coeffs().iter().all(|c| c == &r("1")));
        let h = PowerSeries::new(Var::T, vec![r("1"), r("1")], 7);
        assert_eq!(h.mul(&h.invert().unwrap()).unwrap(), PowerSeries::one(Var::T, 7));
        assert_eq!(f.mul(&g).unwrap().order(), 5);
        assert!(matches!(f.add(&PowerSeries::zero(Var::U, 6)), Err(Error::VariableMismatch('t', 'u'))));
        assert_eq!(PowerSeries::zero(Var::T, 3).invert(), Err(Error::NotInvertible));
    }

    #[test]
    fn bernoulli_examples() {
        let x = r("3/7");
        let b0 = bernoulli_series(0, &x, 6);
        for (n, b) in b0.iter().enumerate() {
            assert_eq!(b, &x.pow(n as i64));
        }
        let b1 = bernoulli_series(1, &Rational::zero(), 4);
        assert_eq!(&b1[..5], &[r("1"), r("-1/2"), r("1/6"), r("0"), r("-1/30")]);
        // sum_i C(2,i) B_i B_(2-i) = 1/6 + 2/4 + 1/6
        let cauchy: Rational = (0..=2).map(|i| binom(2, i) * &b1[i] * &b1[2 - i]).sum();
        assert_eq!(cauchy, r("5/6"));
        assert_eq!(bernoulli_series(2, &Rational::zero(), 4)[2], r("5/6"));
    }

    #[test]
    fn barnes_examples() {
        let classical = bernoulli_series(1, &Rational::zero(), 10);
        assert_eq!(barnes_series(&Rational::zero(), &[r("1")], 10).unwrap(), classical);
        let w = [r("2"), r("3/2"), r("5")];
        assert_eq!(barnes_series(&r("1/3"), &w, 4).unwrap()[0], r("1"));
        for wv in ["2", "7/3", "-4"] {
            assert_eq!(barnes_series(&Rational::zero(), &[r(wv)], 3).unwrap()[1], -r(wv) / r("2"));
        }
        assert!(barnes_series(&Rational::zero(), &[r("0")], 3).is_err());
    }

    #[test]
    fn u_expansion_examples() {
        for c in 1..8u32 {
            let s = u_expand_ratio(c, 6).unwrap();
            assert_eq!(s.coeff(0), r("1"));
            assert_eq!(s.coeff(1), -Rational::from(c - 1) / r("2"));
        }
        assert_eq!(u_expand_ratio(1, 9).unwrap(), PowerSeries::one(Var::U, 9));
        assert!(u_expand_ratio(0, 3).is_err());
        let l = u_expand_log(5);
        assert_eq!(&l.coeffs()[..3], &[r("1"), r("-1/2"), r("1/3")]);
    }

    #[test]
    fn laurent_normalization() {
        let body = PowerSeries::new(Var::U, vec![r("0"), r("0"), r("5"), r("1")], 6);
        let l = LaurentSeries::new(3, body);
        assert_eq!(l.pole_order(), 1);
        assert_eq!(l.coeff(-1), r("5"));
        assert_eq!(l.coeff(0), r("1"));
        assert_eq!(l.known_up_to(), 3);
    }

    #[test]
    fn bernoulli_addition_property() {
        for rr in 0..=3 {
            let base = bernoulli_series(rr, &Rational::zero(), 8);
            for x in ["0", "1", "1/2"] {
                let x = r(x);
                let shifted = bernoulli_series(rr, &x, 8);
                for (n, value) in shifted.iter().enumerate() {
                    let rhs: Rational = (0..=n).map(|i| binom(n, i) * &base[i] * x.pow((n - i) as i64)).sum();
                    assert_eq!(*value, rhs, "r={rr} n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn barnes_unit_weights_match_higher_order_bernoulli() {
        for k in 1..=4usize {
            let ones = vec![Rational::one(); k];
            assert_eq!(
                barnes_series(&Rational::zero(), &ones, 8).unwrap(),
                bernoulli_series(k as u32, &Rational::zero(), 8)
            );
        }
    }

    proptest! {
        #[test]
        fn ratio_series_inverts_qint_series(c in 1u32..12, order in 0usize..12) {
            let cr = Rational::from(c);
            let coeffs = (1..=order as u64 + 1).map(|i| Rational::from(binomial(u64::from(c), i)) / &cr).collect();
            let qint_over_c = PowerSeries::new(Var::U, coeffs, order);
            let prod = u_expand_ratio(c, order).unwrap().mul(&qint_over_c).unwrap();
            prop_assert_eq!(prod, PowerSeries::one(Var::U, order));
        }

        #[test]
        fn inverse_is_two_sided(c0 in 1i64..9, rest in proptest::collection::vec(-9i64..9, 0..8)) {
            let mut coeffs = vec![Rational::from(c0)];
            coeffs.extend(rest.iter().map(|&c| Rational::new(c, 3)));
            let f = PowerSeries::new(Var::Q, coeffs, 9);
            let g = f.invert().unwrap();
            prop_assert_eq!(f.mul(&g).unwrap(), PowerSeries::one(Var::Q, 9));
            prop_assert_eq!(g.mul(&f).unwrap(), PowerSeries::one(Var::Q, 9));
        }
    }
}
