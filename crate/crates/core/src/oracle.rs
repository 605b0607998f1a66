//! Brute-force level sums `(1/p^N) sum_{x < p^N} f(x)` approximating the
//! p-adic invariant integral, for polynomials times q-exponentials and for
//! the k-fold integrand defining the Changhee polynomials.
//!
//! Classical integrands are summed exactly over the rationals and embedded
//! once at the end. Integrands carrying `q^(cx)` are summed as integers
//! modulo `p^W`, where `W` is the absolute precision of `q`.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::changhee::{padic_closed_form, ChangheeParams};
use crate::error::{Error, Result};
use crate::exactq::{QPoint, Rational};
use crate::padic::{rational_distance, Distance, PadicContext, PadicNumber};
use crate::series::bernoulli_series;

/// Default cap on the number of summation points `p^(N k)`.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// `coeff * x^power * q^(weight * x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub power: u32,
    pub weight: u32,
}

/// `f(x) = sum coeff x^m q^(c x)`; without a base every weight must be 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPolynomial {
    terms: Vec<Term>,
    q: Option<PadicNumber>,
}

impl WeightedPolynomial {
    pub fn new(terms: Vec<Term>, q: Option<PadicNumber>) -> Result<Self> {
        if q.is_none() && terms.iter().any(|t| t.weight != 0) {
            return Err(Error::InvalidArgument("weighted terms need a base q".into()));
        }
        if let Some(q) = &q {
            if q.valuation().is_none_or(|v| v != 0) {
                return Err(Error::Domain(format!("base q must be a p-adic unit, got {q}")));
            }
        }
        Ok(WeightedPolynomial { terms, q })
    }

    /// `x^m`.
    pub fn monomial(m: u32) -> Self {
        WeightedPolynomial { terms: vec![Term { coeff: Rational::one(), power: m, weight: 0 }], q: None }
    }

    pub fn constant(c: Rational) -> Self {
        WeightedPolynomial { terms: vec![Term { coeff: c, power: 0, weight: 0 }], q: None }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn base(&self) -> Option<&PadicNumber> {
        self.q.as_ref()
    }

    fn is_classical(&self) -> bool {
        self.terms.iter().all(|t| t.weight == 0)
    }

    /// `f'(i)`, using `d/dx q^(cx) = c log_p(q) q^(cx)`.
    pub fn derivative_at(&self, i: i64, ctx: PadicContext) -> Result<PadicNumber> {
        if self.is_classical() {
            let d: Rational = self
                .terms
                .iter()
                .filter(|t| t.power > 0)
                .map(|t| t.coeff.clone() * Rational::from(t.power) * Rational::from(i).pow(i64::from(t.power) - 1))
                .sum();
            return Ok(PadicNumber::from_rational(&d, ctx));
        }
        let q = self.q.as_ref().expect("weighted terms have a base");
        let log = q.plog()?;
        let mut total: Option<PadicNumber> = None;
        for t in &self.terms {
            let qc = q.pow_int(i64::from(t.weight) * i)?;
            let xi = Rational::from(i);
            let mut inner = log.mul(&PadicNumber::from_rational(&(Rational::from(t.weight) * xi.pow(i64::from(t.power))), ctx))?;
            if t.power > 0 {
                let poly = Rational::from(t.power) * xi.pow(i64::from(t.power) - 1);
                inner = inner.add(&PadicNumber::from_rational(&poly, ctx))?;
            }
            let term = inner.mul(&qc)?.mul(&PadicNumber::from_rational(&t.coeff, ctx))?;
            total = Some(match total {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        Ok(total.unwrap_or_else(|| PadicNumber::zero(ctx, i64::from(ctx.precision()))))
    }
}

/// Level-sum runner at a fixed p-adic context and point budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    ctx: PadicContext,
    budget: u128,
}

fn ppow(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

/// `q` as an integer modulo `p^W`, with `W` its absolute precision.
fn integer_base(q: &PadicNumber) -> Result<(BigInt, BigInt, i64)> {
    let w = q.precision();
    if w < 1 {
        return Err(Error::Domain(format!("base q carries no digits: {q}")));
    }
    let modulus = ppow(q.prime(), w as u32);
    let rep = q.representative();
    if !rep.is_integer() {
        return Err(Error::Domain(format!("base q must be a p-adic integer, got {q}")));
    }
    Ok((rep.numer().mod_floor(&modulus), modulus, w))
}

/// `q^(c x)` for `x = 0..len`, modulo `modulus`.
fn power_table(q: &BigInt, c: u64, len: u64, modulus: &BigInt) -> Vec<BigInt> {
    let step = q.modpow(&BigInt::from(c), modulus);
    let mut out = Vec::with_capacity(len as usize);
    let mut cur = BigInt::one();
    for _ in 0..len {
        out.push(cur.clone());
        cur = (cur * &step).mod_floor(modulus);
    }
    out
}

impl Oracle {
    pub fn new(ctx: PadicContext) -> Self {
        Oracle { ctx, budget: DEFAULT_BUDGET }
    }

    /// Override the point budget.
    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    fn check_budget(&self, level: u32, fold: u32) -> Result<u64> {
        let side = u128::from(self.ctx.p()).checked_pow(level);
        let points = side.and_then(|s| s.checked_pow(fold)).unwrap_or(u128::MAX);
        if points > self.budget {
            return Err(Error::BudgetExceeded { points, budget: self.budget });
        }
        if level == 0 {
            return Err(Error::InvalidArgument("level N must be >= 1".into()));
        }
        Ok(side.expect("within budget") as u64)
    }

    /// `(1/p^N) sum_{x=shift}^{shift+p^N-1} f(x)`, exact for classical `f`.
    fn level_sum_exact(&self, f: &WeightedPolynomial, level: u32, shift: i64) -> Result<Rational> {
        let side = self.check_budget(level, 1)?;
        let mut total = Rational::zero();
        for t in &f.terms {
            let mut s = BigInt::zero();
            for x in shift..shift + side as i64 {
                s += BigInt::from(x).pow(t.power);
            }
            total = total + t.coeff.clone() * Rational::from(s);
        }
        Ok(total / Rational::from(ppow(self.ctx.p(), level)))
    }

    fn level_sum_padic(&self, f: &WeightedPolynomial, level: u32, shift: i64) -> Result<PadicNumber> {
        let side = self.check_budget(level, 1)?;
        let q = f.q.as_ref().expect("weighted terms have a base");
        let (qi, modulus, w) = integer_base(q)?;
        let mut total: Option<PadicNumber> = None;
        for t in &f.terms {
            let start = q.pow_int(i64::from(t.weight) * shift)?;
            let table = power_table(&qi, u64::from(t.weight), side, &modulus);
            let mut s = BigInt::zero();
            for (x, qx) in table.iter().enumerate() {
                s = (s + BigInt::from(x as i64 + shift).pow(t.power) * qx).mod_floor(&modulus);
            }
            let term = PadicNumber::from_rational_abs(&Rational::from(s), self.ctx, w)
                .mul(&start)?
                .mul(&PadicNumber::from_rational(&t.coeff, self.ctx))?;
            total = Some(match total {
                None => term,
                Some(acc) => acc.add(&term)?,
            });
        }
        let sum = total.unwrap_or_else(|| PadicNumber::zero(self.ctx, w));
        sum.div(&PadicNumber::from_rational(&Rational::from(ppow(self.ctx.p(), level)), self.ctx))
    }

    /// `(1/p^N) sum_{x < p^N} f(x)` in `Q_p`.
    pub fn volkenborn_level(&self, f: &WeightedPolynomial, level: u32) -> Result<PadicNumber> {
        if f.is_classical() {
            Ok(PadicNumber::from_rational(&self.level_sum_exact(f, level, 0)?, self.ctx))
        } else {
            self.level_sum_padic(f, level, 0)
        }
    }

    /// Exact rational level sum of a classical polynomial.
    pub fn volkenborn_level_exact(&self, f: &WeightedPolynomial, level: u32) -> Result<Rational> {
        if !f.is_classical() {
            return Err(Error::InvalidArgument("exact level sums need a classical polynomial".into()));
        }
        self.level_sum_exact(f, level, 0)
    }

    /// `(1/p^N)^r sum_{x_1..x_r < p^N} (x_1 + .. + x_r + x)^n`, exact.
    ///
    /// Tuples are grouped by `s = x_1 + .. + x_r`; the budget still counts all `p^(N r)` tuples.
    pub fn classical_moments(&self, r: u32, n: u32, x: &Rational, level: u32) -> Result<Rational> {
        if r == 0 {
            return Err(Error::InvalidArgument("moment order r must be >= 1".into()));
        }
        let side = self.check_budget(level, r)? as usize;
        // counts[s] = #{(x_1..x_r) : sum = s}
        let mut counts: Vec<BigInt> = vec![BigInt::one()];
        for _ in 0..r {
            let mut next = vec![BigInt::zero(); counts.len() + side - 1];
            for (s, c) in counts.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for slot in &mut next[s..s + side] {
                    *slot += c;
                }
            }
            counts = next;
        }
        let (u, d) = (x.numer().clone(), x.denom().clone());
        let mut total = BigInt::zero();
        for (s, c) in counts.iter().enumerate() {
            total += c * (BigInt::from(s) * &d + &u).pow(n);
        }
        let scale = ppow(self.ctx.p(), level * r) * d.pow(n);
        Ok(Rational::from(total) / Rational::from(scale))
    }

    /// k-fold level sum of `q^(b.x) [w + a.x]_q^n` in `Q_p`.
    pub fn changhee_level(&self, params: &ChangheeParams, q: &PadicNumber, level: u32) -> Result<PadicNumber> {
        let k = params.k() as u32;
        let side = self.check_budget(level, k)?;
        let one = PadicNumber::one(self.ctx);
        let one_minus_q = one.sub(q)?;
        if one_minus_q.valuation().is_none_or(|v| v < 1) {
            return Err(Error::Domain(format!("need |q - 1|_p < 1 and q != 1, got q = {q}")));
        }
        let (qi, modulus, w_prec) = integer_base(q)?;
        let qa: Vec<Vec<BigInt>> = params.a.iter().map(|&a| power_table(&qi, u64::from(a), side, &modulus)).collect();
        let qb: Vec<Vec<BigInt>> = params.b.iter().map(|&b| power_table(&qi, u64::from(b), side, &modulus)).collect();
        let qw = qi.modpow(&BigInt::from(params.w), &modulus);
        // sum over x in [0, p^N)^k of q^(b.x) (1 - q^(w + a.x))^n, as an integer mod p^W
        let mut idx = vec![0usize; k as usize];
        let mut total = BigInt::zero();
        loop {
            let mut qax = qw.clone();
            let mut qbx = BigInt::one();
            for j in 0..k as usize {
                qax = (qax * &qa[j][idx[j]]).mod_floor(&modulus);
                qbx = (qbx * &qb[j][idx[j]]).mod_floor(&modulus);
            }
            let base = (BigInt::one() - qax).mod_floor(&modulus);
            total = (total + qbx * base.modpow(&BigInt::from(params.n), &modulus)).mod_floor(&modulus);
            let mut j = 0;
            while j < k as usize {
                idx[j] += 1;
                if idx[j] < side as usize {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k as usize {
                break;
            }
        }
        let numer = PadicNumber::from_rational_abs(&Rational::from(total), self.ctx, w_prec);
        let scale = PadicNumber::from_rational(&Rational::from(ppow(self.ctx.p(), level * k)), self.ctx);
        numer.div(&one_minus_q.pow_int(i64::from(params.n))?)?.div(&scale)
    }

    /// Exact rational k-fold level sum at a rational `q`.
    pub fn changhee_level_exact(&self, params: &ChangheeParams, q: &QPoint, level: u32) -> Result<Rational> {
        let k = params.k() as u32;
        let side = self.check_budget(level, k)?;
        let qv = q.value();
        let one = Rational::one();
        let mut idx = vec![0u64; k as usize];
        let mut total = Rational::zero();
        loop {
            let ax: u64 = idx.iter().zip(&params.a).map(|(x, &a)| x * u64::from(a)).sum();
            let bx: u64 = idx.iter().zip(&params.b).map(|(x, &b)| x * u64::from(b)).sum();
            let qint = (&one - qv.pow((u64::from(params.w) + ax) as i64)) / (&one - qv);
            total = total + qv.pow(bx as i64) * qint.pow(i64::from(params.n));
            let mut j = 0;
            while j < k as usize {
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k as usize {
                break;
            }
        }
        Ok(total / Rational::from(ppow(self.ctx.p(), level * k)))
    }

    /// Level-N check of `I(f_n) = I(f) + sum_{i<n} f'(i)` with `f_n(x) = f(x + n)`.
    pub fn shift_identity_check(&self, f: &WeightedPolynomial, shift: u32, level: u32) -> Result<ShiftReport> {
        if shift == 0 {
            return Err(Error::InvalidArgument("shift n must be >= 1".into()));
        }
        let derivative_sum = |oracle: &Oracle| -> Result<PadicNumber> {
            let mut acc = f.derivative_at(0, oracle.ctx)?;
            for i in 1..i64::from(shift) {
                acc = acc.add(&f.derivative_at(i, oracle.ctx)?)?;
            }
            Ok(acc)
        };
        if f.is_classical() {
            let shifted = self.level_sum_exact(f, level, i64::from(shift))?;
            let plain = self.level_sum_exact(f, level, 0)?;
            let derivatives: Rational = (0..i64::from(shift))
                .map(|i| {
                    f.terms
                        .iter()
                        .filter(|t| t.power > 0)
                        .map(|t| t.coeff.clone() * Rational::from(t.power) * Rational::from(i).pow(i64::from(t.power) - 1))
                        .sum::<Rational>()
                })
                .sum();
            let residual = &shifted - &plain - &derivatives;
            let distance = rational_distance(&residual, &Rational::zero(), self.ctx.p());
            return Ok(ShiftReport {
                shift,
                level,
                shifted: PadicNumber::from_rational(&shifted, self.ctx),
                predicted: PadicNumber::from_rational(&(plain + derivatives), self.ctx),
                residual: Some(residual),
                distance,
            });
        }
        let shifted = self.level_sum_padic(f, level, i64::from(shift))?;
        let predicted = self.level_sum_padic(f, level, 0)?.add(&derivative_sum(self)?)?;
        let distance = shifted.distance(&predicted)?;
        Ok(ShiftReport { shift, level, shifted, predicted, residual: None, distance })
    }

    /// Distance from each level sum to the closed-form target.
    pub fn convergence_report(&self, target: &Target, levels: &[u32]) -> Result<ConvergenceReport> {
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("levels must be strictly increasing".into()));
        }
        let mut distances = Vec::with_capacity(levels.len());
        let mut elapsed = Vec::with_capacity(levels.len());
        match target {
            Target::Classical { r, n, x } => {
                let closed = bernoulli_series(*r, x, *n as usize)[*n as usize].clone();
                for &level in levels {
                    let start = Instant::now();
                    let s = self.classical_moments(*r, *n, x, level)?;
                    distances.push(rational_distance(&s, &closed, self.ctx.p()));
                    elapsed.push(start.elapsed().as_millis() as u64);
                }
            }
            Target::Changhee { params, q } => {
                let closed = padic_closed_form(params, q)?;
                for &level in levels {
                    let start = Instant::now();
                    let s = self.changhee_level(params, q, level)?;
                    distances.push(s.distance(&closed)?);
                    elapsed.push(start.elapsed().as_millis() as u64);
                }
            }
        }
        Ok(ConvergenceReport::new(levels.to_vec(), distances, elapsed))
    }
}

/// What a convergence study compares against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    /// `B_n^(r)(x)` from the generating function, against r-fold moments.
    Classical { r: u32, n: u32, x: Rational },
    /// The p-adic closed form, against the k-fold Changhee level sums.
    Changhee { params: ChangheeParams, q: PadicNumber },
}

/// Outcome of one shift-identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftReport {
    pub shift: u32,
    pub level: u32,
    /// Level sum of `f(x + n)`.
    pub shifted: PadicNumber,
    /// Level sum of `f` plus `sum_{i<n} f'(i)`.
    pub predicted: PadicNumber,
    /// Exact residual, for classical `f`.
    pub residual: Option<Rational>,
    pub distance: Distance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub levels: Vec<u32>,
    pub distances: Vec<Distance>,
    pub elapsed_ms: Vec<u64>,
    /// Norms never increase from one level to the next.
    pub monotone: bool,
    /// Some step strictly lowers the norm.
    pub strictly_decreasing_somewhere: bool,
    pub final_distance: Distance,
}

/// Lower bound on the exponent of `1/p`; `None` stands for an exact zero.
fn exponent_bound(d: &Distance) -> Option<i64> {
    match d {
        Distance::Zero => None,
        Distance::Exponent(e) | Distance::AtMost(e) => Some(*e),
    }
}

impl ConvergenceReport {
    fn new(levels: Vec<u32>, distances: Vec<Distance>, elapsed_ms: Vec<u64>) -> Self {
        let mut monotone = true;
        let mut strict = false;
        for w in distances.windows(2) {
            match (exponent_bound(&w[0]), exponent_bound(&w[1])) {
                (None, None) => {}
                (None, Some(_)) => monotone = false,
                (Some(_), None) => strict = true,
                (Some(a), Some(b)) => {
                    if b < a {
                        monotone = false;
                    }
                    if b > a {
                        strict = true;
                    }
                }
            }
        }
        let final_distance = distances.last().copied().unwrap_or(Distance::Zero);
        ConvergenceReport { levels, distances, elapsed_ms, monotone, strictly_decreasing_somewhere: strict, final_distance }
    }

    /// `level,distance_exponent,elapsed_ms` rows with a header line.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from("level,distance_exponent,elapsed_ms\n");
        for ((level, d), ms) in self.levels.iter().zip(&self.distances).zip(&self.elapsed_ms) {
            let _ = writeln!(out, "{level},{d},{}", if timing { *ms } else { 0 });
        }
        out
    }

    pub fn to_json(&self, timing: bool) -> Value {
        let rows: Vec<Value> = self
            .levels
            .iter()
            .zip(&self.distances)
            .zip(&self.elapsed_ms)
            .map(|((level, d), ms)| json!({"level": level, "distance_exponent": d.to_string(), "elapsed_ms": if timing { *ms } else { 0 }}))
            .collect();
        json!({
            "schema": 1,
            "rows": rows,
            "monotone": self.monotone,
            "strictly_decreasing_somewhere": self.strictly_decreasing_somewhere,
            "final_distance_exponent": self.final_distance.to_string(),
        })
    }
}
