//! Identity catalog, checked in the reduced normalization.
//!
//! Rational identities are sampled at exact rational `q`; an optional
//! certify mode turns sampling into a proof by bounding the degree of the
//! cleared-denominator residual and sampling one point more than that.
//! Series identities compare truncated power series coefficientwise.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{addition_in, beta, beta_pow, distribution_in, ChangheeParams, DistributionForm, QCache};
use crate::error::{Error, Result};
use crate::exactq::{
    binomial, default_q_samples, factorial, geom_sum_in, qbinomial_in, qfactorial_in, qint_in, QField,
    QPoint, Rational, Tracked,
};
use crate::series::{barnes_series, u_expand_power, u_expand_ratio, PowerSeries, Var};

/// Catalog entries. The string ids are the external names used by the CLI
/// and in JSON reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    /// `beta_n(b) = (q-1) beta_{n+1}(b-a) + beta_n(b-a)`, at `w = 0`.
    ShiftRecurrence,
    /// Binomial-weighted sums of degrees `n-i..n` against shift `b+a`.
    BinomialShift,
    /// The `k = 1`, `i = n` case collapsing to a single ratio.
    BinomialShiftSingle,
    /// `q^w beta_n(w|b) - beta_n(w|b-a) = (q-1) beta_{n+1}(w|b-a)`.
    WeightShift,
    /// `sum_i C(n,i)(q-1)^i beta_i = (q-1)^-k prod_j c_j/[c_j]_q`.
    BinomialSum,
    /// Unit weights, `b = (1..k)`, written with Gaussian binomials.
    UnitGaussian,
    /// Unit weights, `b = (h, h-1, .., h-k+1)`, written with Gaussian binomials.
    DescendingGaussian,
    /// The descending family as a power series in `q`.
    DescendingQSeries,
    /// Addition theorem in `w`.
    Addition,
    /// Distribution relation over residues mod `l`.
    Distribution,
    /// Generating function in `t`.
    GeneratingFunction,
    /// Carlitz-style series for `k = 1`, `a = b = 1`, `w = 0`.
    CarlitzSeries,
    /// Step `w -> w+1` in the descending family, lowering `k` by one.
    OrderStep,
    /// Termwise limit `q -> 1` of the generating function.
    GeneratingFunctionLimit,
}

impl IdentityId {
    pub const ALL: [IdentityId; 14] = [
        IdentityId::ShiftRecurrence,
        IdentityId::BinomialShift,
        IdentityId::BinomialShiftSingle,
        IdentityId::WeightShift,
        IdentityId::BinomialSum,
        IdentityId::UnitGaussian,
        IdentityId::DescendingGaussian,
        IdentityId::DescendingQSeries,
        IdentityId::Addition,
        IdentityId::Distribution,
        IdentityId::GeneratingFunction,
        IdentityId::CarlitzSeries,
        IdentityId::OrderStep,
        IdentityId::GeneratingFunctionLimit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::ShiftRecurrence => "thm2.3",
            IdentityId::BinomialShift => "thm2.4",
            IdentityId::BinomialShiftSingle => "thm2.4-special",
            IdentityId::WeightShift => "thm2.5",
            IdentityId::BinomialSum => "eq2.12",
            IdentityId::UnitGaussian => "cor2.2",
            IdentityId::DescendingGaussian => "thm2.6",
            IdentityId::DescendingQSeries => "thm2.7-series",
            IdentityId::Addition => "eq2.8-addition",
            IdentityId::Distribution => "eq2.9-distribution",
            IdentityId::GeneratingFunction => "eq2.10-genfunc",
            IdentityId::CarlitzSeries => "carlitz-series",
            IdentityId::OrderStep => "remark2.18",
            IdentityId::GeneratingFunctionLimit => "limit-q1-F",
        }
    }

    /// Mode used when none is requested.
    pub fn default_mode(self) -> Mode {
        match self {
            IdentityId::BinomialShiftSingle
            | IdentityId::DescendingQSeries
            | IdentityId::GeneratingFunction
            | IdentityId::Distribution => Mode::Corrected,
            IdentityId::CarlitzSeries | IdentityId::OrderStep | IdentityId::GeneratingFunctionLimit => {
                Mode::Diagnostic
            }
            _ => Mode::Literal,
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        mode == self.default_mode() || (self == IdentityId::Distribution && mode == Mode::Literal)
    }

    fn needs_zero_w(self) -> bool {
        matches!(
            self,
            IdentityId::ShiftRecurrence
                | IdentityId::BinomialShift
                | IdentityId::BinomialShiftSingle
                | IdentityId::BinomialSum
                | IdentityId::CarlitzSeries
        )
    }

    fn uses_descending_family(self) -> bool {
        matches!(
            self,
            IdentityId::UnitGaussian | IdentityId::DescendingGaussian | IdentityId::DescendingQSeries | IdentityId::OrderStep
        )
    }

    fn is_series(self) -> bool {
        matches!(
            self,
            IdentityId::DescendingQSeries | IdentityId::GeneratingFunction | IdentityId::GeneratingFunctionLimit
        )
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "eq2.11" {
            return Ok(IdentityId::WeightShift);
        }
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Literal,
    Corrected,
    Diagnostic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Literal => "paper-literal",
            Mode::Corrected => "corrected",
            Mode::Diagnostic => "diagnostic",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Mode::Literal),
            "corrected" => Ok(Mode::Corrected),
            "diagnostic" => Ok(Mode::Diagnostic),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Diagnostic,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Diagnostic => "diagnostic",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One identity instance: the id, mode, parameters and auxiliaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCase {
    pub id: IdentityId,
    pub mode: Mode,
    pub params: ChangheeParams,
    /// Distribution modulus.
    pub l: Option<u32>,
    /// Top of the descending `b` list.
    pub h: Option<u32>,
    /// Depth of the binomial-shift identity.
    pub i: Option<u32>,
    /// Truncation order for series identities.
    pub order: Option<usize>,
}

impl IdentityCase {
    pub fn new(id: IdentityId, params: ChangheeParams) -> Self {
        IdentityCase { id, mode: id.default_mode(), params, l: None, h: None, i: None, order: None }
    }

    /// Unit weights with `b = (h, h-1, .., h-k+1)`.
    pub fn descending(id: IdentityId, n: u32, k: u32, h: u32, w: u32) -> Result<Self> {
        if k == 0 || h < k {
            return Err(Error::InvalidArgument(format!("descending family needs 1 <= k <= h, got k = {k}, h = {h}")));
        }
        let params = ChangheeParams::new(n, vec![1; k as usize], (0..k).map(|j| h - j).collect(), w)?;
        let mut case = IdentityCase::new(id, params);
        case.h = Some(h);
        Ok(case)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_l(mut self, l: u32) -> Self {
        self.l = Some(l);
        self
    }

    pub fn with_i(mut self, i: u32) -> Self {
        self.i = Some(i);
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = Some(order);
        self
    }

    fn order_or(&self, default: usize) -> usize {
        self.order.unwrap_or(default)
    }

    fn shifted_b(&self, sign: i64) -> Result<Vec<u32>> {
        self.params
            .a
            .iter()
            .zip(&self.params.b)
            .map(|(&a, &b)| {
                let v = i64::from(b) + sign * i64::from(a);
                u32::try_from(v).ok().filter(|&x| x >= 1).ok_or_else(|| {
                    Error::InvalidArgument(format!("{} needs b_j > a_j, got a = {:?}, b = {:?}", self.id, self.params.a, self.params.b))
                })
            })
            .collect()
    }

    /// Check identity-specific preconditions.
    pub fn validate(&self) -> Result<()> {
        let id = self.id;
        let p = &self.params;
        let k = p.k() as u32;
        if !id.supports(self.mode) {
            return Err(Error::InvalidArgument(format!("{id} does not support mode {}", self.mode)));
        }
        if id.needs_zero_w() && (p.w != 0 || p.qw.is_some()) {
            return Err(Error::InvalidArgument(format!("{id} is stated at w = 0")));
        }
        if p.qw.is_some() && (id.is_series() || id == IdentityId::Distribution) {
            return Err(Error::InvalidArgument(format!("{id} needs an integer w, not an explicit q^w")));
        }
        let h = self.h.unwrap_or(k);
        if id.uses_descending_family() {
            let expected: Vec<u32> = (0..k).map(|j| h.wrapping_sub(j)).collect();
            if h < k || p.a.iter().any(|&a| a != 1) || p.b != expected {
                return Err(Error::InvalidArgument(format!(
                    "{id} needs a = (1,..,1) and b = (h,..,h-k+1) with h >= k, got a = {:?}, b = {:?}",
                    p.a, p.b
                )));
            }
            if id == IdentityId::UnitGaussian && h != k {
                return Err(Error::InvalidArgument("cor2.2 has b = (k, .., 1), so h = k".into()));
            }
        }
        match id {
            IdentityId::ShiftRecurrence | IdentityId::WeightShift => {
                self.shifted_b(-1)?;
            }
            IdentityId::BinomialShift => {
                let i = self.i.ok_or_else(|| Error::InvalidArgument("thm2.4 needs i".into()))?;
                if i < 1 || i > p.n {
                    return Err(Error::InvalidArgument(format!("thm2.4 needs 1 <= i <= n, got i = {i}, n = {}", p.n)));
                }
            }
            IdentityId::BinomialShiftSingle if k != 1 => {
                return Err(Error::InvalidArgument("thm2.4-special is the k = 1 case".into()));
            }
            IdentityId::Distribution if self.l.is_none_or(|l| l == 0) => {
                return Err(Error::InvalidArgument("eq2.9-distribution needs l >= 1".into()));
            }
            IdentityId::CarlitzSeries if p.a != [1] || p.b != [1] => {
                return Err(Error::InvalidArgument("carlitz-series is the k = 1, a = b = 1 case".into()));
            }
            IdentityId::DescendingQSeries if self.order_or(30) == 0 => {
                return Err(Error::InvalidArgument("series order must be >= 1".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Residual at one sample point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    /// Sample point: a rational `q`, `"formal"` for series in `q`, or `"1"` for limits.
    pub q: String,
    /// `LHS - RHS`; for series, the lowest-order nonzero coefficient difference.
    pub residual: Rational,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub case: IdentityCase,
    pub samples: Vec<Sample>,
    pub status: Status,
    /// Degree bound of the residual numerator, when certify mode ran.
    pub degree_bound: Option<u64>,
}

impl IdentityReport {
    fn from_samples(case: IdentityCase, samples: Vec<Sample>, degree_bound: Option<u64>) -> Self {
        let status = if case.mode == Mode::Diagnostic || (case.id == IdentityId::Distribution && case.mode == Mode::Literal) {
            Status::Diagnostic
        } else if samples.iter().all(|s| s.residual.is_zero()) {
            Status::Pass
        } else {
            Status::Fail
        };
        IdentityReport { case, samples, status, degree_bound }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// A failing non-diagnostic check.
    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    /// Whether the certify mode proved the identity.
    pub fn certified(&self) -> bool {
        self.degree_bound.is_some() && self.passed()
    }

    fn params_json(&self) -> Value {
        let p = &self.case.params;
        let mut m = serde_json::Map::new();
        m.insert("n".into(), json!(p.n));
        m.insert("k".into(), json!(p.k()));
        m.insert("a".into(), json!(p.a));
        m.insert("b".into(), json!(p.b));
        m.insert("w".into(), json!(p.w));
        if let Some(l) = self.case.l {
            m.insert("l".into(), json!(l));
        }
        if let Some(h) = self.case.h {
            m.insert("h".into(), json!(h));
        }
        if let Some(i) = self.case.i {
            m.insert("i".into(), json!(i));
        }
        Value::Object(m)
    }

    /// One JSON object per sample, in sample order.
    pub fn to_json_rows(&self, timing: bool) -> Vec<Value> {
        self.samples
            .iter()
            .map(|s| {
                let status = match self.status {
                    Status::Diagnostic => Status::Diagnostic,
                    _ if s.residual.is_zero() => Status::Pass,
                    _ => Status::Fail,
                };
                json!({
                    "schema": 1,
                    "identity": self.case.id.as_str(),
                    "mode": self.case.mode.as_str(),
                    "params": self.params_json(),
                    "q": s.q,
                    "residual": s.residual.to_string(),
                    "status": status.as_str(),
                    "elapsed_ms": if timing { s.elapsed_ms } else { 0 },
                })
            })
            .collect()
    }
}

/// Per-base caches: the sample base `q` and its powers `q^l`.
struct Env<T: QField> {
    main: QCache<T>,
    powered: HashMap<u32, QCache<T>>,
}

impl<T: QField> Env<T> {
    fn new(q: T) -> Self {
        Env { main: QCache::memoizing(q), powered: HashMap::new() }
    }
}

fn big<T: QField>(n: u64, k: u64) -> T {
    T::big(binomial(n, k))
}

/// `(1/(q-1))^k`.
fn inv_q_minus_1_pow<T: QField>(q: &T, k: usize) -> T {
    T::int(1).over(&q.minus(&T::int(1)).powi(k as i64))
}

/// `S_j = sum_{m>=0} q^m [m]_q^j`, resummed exactly after expanding `[m]_q^j`.
fn carlitz_moment<T: QField>(j: u32, q: &T) -> Result<T> {
    let mut s = T::int(0);
    for i in 0..=j {
        let term = geom_sum_in(i + 1, q)?.times(&big(u64::from(j), u64::from(i)));
        s = if i % 2 == 0 { s.plus(&term) } else { s.minus(&term) };
    }
    Ok(s.over(&T::int(1).minus(q).powi(i64::from(j))))
}

/// Value at `q^w` times `q^extra`, through the memo when `q^w` is a power of `q`.
fn at_w<T: QField>(main: &mut QCache<T>, p: &ChangheeParams, n: u32, a: &[u32], b: &[u32], extra: u64) -> T {
    match &p.qw {
        None => beta_pow(main, n, a, b, u64::from(p.w) + extra),
        Some(v) => {
            let qw = T::constant(v.clone()).times(&main.pow(extra));
            beta(main, n, a, b, &qw)
        }
    }
}

fn exact_sides<T: QField>(case: &IdentityCase, env: &mut Env<T>) -> Result<(T, T)> {
    let p = &case.params;
    let (n, k) = (p.n, p.k());
    let Env { main, powered } = env;
    let q = main.q().clone();
    let q_minus_1 = q.minus(&T::int(1));
    let qw = match &p.qw {
        Some(v) => T::constant(v.clone()),
        None => main.pow(u64::from(p.w)),
    };
    let sides = match case.id {
        IdentityId::ShiftRecurrence => {
            let lower = case.shifted_b(-1)?;
            let lhs = beta_pow(main, n, &p.a, &p.b, 0);
            let rhs = q_minus_1
                .times(&beta_pow(main, n + 1, &p.a, &lower, 0))
                .plus(&beta_pow(main, n, &p.a, &lower, 0));
            (lhs, rhs)
        }
        IdentityId::BinomialShift => {
            let i = case.i.expect("validated");
            let upper = case.shifted_b(1)?;
            let mut lhs = T::int(0);
            for j in 0..=i {
                let t = beta_pow(main, n - i + j, &p.a, &p.b, 0);
                lhs = lhs.plus(&t.times(&q_minus_1.powi(i64::from(j))).times(&big(u64::from(i), u64::from(j))));
            }
            let mut rhs = T::int(0);
            for j in 0..i {
                let t = beta_pow(main, n - i + j, &p.a, &upper, 0);
                rhs = rhs.plus(&t.times(&q_minus_1.powi(i64::from(j))).times(&big(u64::from(i - 1), u64::from(j))));
            }
            (lhs, rhs)
        }
        IdentityId::BinomialShiftSingle | IdentityId::BinomialSum => {
            let mut lhs = T::int(0);
            for i in 0..=n {
                let t = beta_pow(main, i, &p.a, &p.b, 0);
                lhs = lhs.plus(&t.times(&q_minus_1.powi(i64::from(i))).times(&big(u64::from(n), u64::from(i))));
            }
            let mut rhs = inv_q_minus_1_pow(&q, k);
            for (&a, &b) in p.a.iter().zip(&p.b) {
                let c = i64::from(n) * i64::from(a) + i64::from(b);
                rhs = rhs.times(&T::int(c).over(&qint_in(c, &q)));
            }
            (lhs, rhs)
        }
        IdentityId::WeightShift => {
            let lower = case.shifted_b(-1)?;
            let lhs = qw.times(&at_w(main, p, n, &p.a, &p.b, 0)).minus(&at_w(main, p, n, &p.a, &lower, 0));
            let rhs = q_minus_1.times(&at_w(main, p, n + 1, &p.a, &lower, 0));
            (lhs, rhs)
        }
        IdentityId::UnitGaussian | IdentityId::DescendingGaussian => {
            let h = case.h.unwrap_or(k as u32);
            let lhs = at_w(main, p, n, &p.a, &p.b, 0);
            let kk = k as u32;
            let tail = T::big(factorial(k as u64)).over(&qfactorial_in(kk, &q));
            let mut sum = T::int(0);
            let mut power = T::int(1);
            for r in 0..=n {
                let ratio = big::<T>(u64::from(r + h), k as u64).over(&qbinomial_in(r + h, kk, &q));
                sum = sum.plus(&power.times(&ratio).times(&big(u64::from(n), u64::from(r))));
                power = power.times(&qw.negated());
            }
            let prefactor = inv_q_minus_1_pow(&q, k).over(&T::int(1).minus(&q).powi(i64::from(n)));
            (lhs, prefactor.times(&sum).times(&tail))
        }
        IdentityId::Addition => (at_w(main, p, n, &p.a, &p.b, 0), addition_in(main, p, &qw)),
        IdentityId::Distribution => {
            let l = case.l.expect("validated");
            let form = if case.mode == Mode::Literal { DistributionForm::Literal } else { DistributionForm::Corrected };
            let base = powered.entry(l).or_insert_with(|| QCache::new(q.powi(i64::from(l))));
            let lhs = at_w(main, p, n, &p.a, &p.b, 0);
            (lhs, distribution_in(main, base, p, l, form))
        }
        IdentityId::CarlitzSeries => {
            let lhs = beta_pow(main, n, &p.a, &p.b, 0);
            let mut rhs = carlitz_moment(n, &q)?.negated();
            if n > 0 {
                let first = carlitz_moment(n - 1, &q)?.times(&T::int(i64::from(n))).over(&T::int(1).minus(&q));
                rhs = rhs.plus(&first);
            }
            (lhs, rhs)
        }
        IdentityId::OrderStep => {
            let h = case.h.expect("validated descending case");
            let a = &p.a;
            let lhs = main.pow(u64::from(h)).times(&at_w(main, p, n, a, &p.b, 1));
            let b_low: Vec<u32> = (1..k as u32).map(|j| h - j).collect();
            let b_top: Vec<u32> = (0..k as u32 - 1).map(|j| h - j).collect();
            let first = at_w(main, p, n, &a[..k - 1], &b_low, 0).times(&T::int(i64::from(h))).times(&T::int(1).minus(&q));
            let mut rhs = first.plus(&at_w(main, p, n, a, &p.b, 0));
            if n > 0 {
                let middle = at_w(main, p, n - 1, &a[..k - 1], &b_top, 0).times(&T::int(i64::from(n)));
                rhs = rhs.minus(&middle);
            }
            (lhs, rhs)
        }
        IdentityId::DescendingQSeries | IdentityId::GeneratingFunction | IdentityId::GeneratingFunctionLimit => {
            unreachable!("series identities are not evaluated pointwise")
        }
    };
    Ok(sides)
}

/// Lowest-order nonzero coefficient difference, or 0.
fn first_difference(lhs: &[Rational], rhs: &[Rational]) -> Rational {
    lhs.iter().zip(rhs).map(|(x, y)| x - y).find(|d| !d.is_zero()).unwrap_or_else(Rational::zero)
}

/// `(1 - q)^-e` as a series in `q`.
fn one_minus_q_inverse_pow(e: u32, order: usize) -> Result<PowerSeries> {
    let base = PowerSeries::new(Var::Q, vec![Rational::one(), -Rational::one()], order);
    base.invert()?.pow(e)
}

/// Gaussian polynomials `C_q(m, j)` for `m <= rows`, via q-Pascal, truncated at `order`.
fn gaussian_table(rows: usize, order: usize) -> Vec<Vec<PowerSeries>> {
    let mut table: Vec<Vec<PowerSeries>> = Vec::with_capacity(rows + 1);
    for m in 0..=rows {
        let mut row = Vec::with_capacity(m + 1);
        for j in 0..=m {
            if j == 0 || j == m {
                row.push(PowerSeries::one(Var::Q, order));
            } else {
                // C_q(m, j) = C_q(m-1, j-1) + q^j C_q(m-1, j)
                let prev: &Vec<PowerSeries> = &table[m - 1];
                let shifted = prev[j].shift_up(j);
                row.push(prev[j - 1].add(&shifted).expect("same variable"));
            }
        }
        table.push(row);
    }
    table
}

fn descending_series_residual(case: &IdentityCase) -> Result<Rational> {
    let p = &case.params;
    let (n, k) = (p.n, p.k());
    let h = case.h.expect("validated descending case");
    let order = case.order_or(30);
    let w = u64::from(p.w);
    let one_minus_q = PowerSeries::new(Var::Q, vec![Rational::one(), -Rational::one()], order);

    // left: (-1)^k (1-q)^-(n+k) sum_r C(n,r) (-1)^r q^(wr) prod_j c(1-q)/(1-q^c)
    let mut sum = PowerSeries::zero(Var::Q, order);
    for r in 0..=u64::from(n) {
        let mut term = PowerSeries::monomial(Var::Q, Rational::from(binomial(u64::from(n), r)), (w * r) as usize, order);
        for b in &p.b {
            let c = r + u64::from(*b);
            let denom = PowerSeries::one(Var::Q, order).sub(&PowerSeries::monomial(Var::Q, Rational::one(), c as usize, order))?;
            term = term.mul(&one_minus_q.scale(&Rational::from(c)).mul(&denom.invert()?)?)?;
        }
        sum = if r % 2 == 0 { sum.add(&term)? } else { sum.sub(&term)? };
    }
    let mut lhs = one_minus_q_inverse_pow(n + k as u32, order)?.mul(&sum)?;
    if k % 2 == 1 {
        lhs = lhs.scale(&-Rational::one());
    }

    // right: k! (1-q)^-n sum_m C_q(m+k-1, m) q^(m(h-k+1)) sum_r C(n,r) C(r+h,k) (-1)^(r+k) q^((m+w) r)
    let step = (h - k as u32 + 1) as usize;
    let table = gaussian_table(order + k, order);
    let mut outer = PowerSeries::zero(Var::Q, order);
    for m in 0..=order / step {
        let mut inner = PowerSeries::zero(Var::Q, order);
        for r in 0..=u64::from(n) {
            let c = binomial(u64::from(n), r) * binomial(r + u64::from(h), k as u64);
            let c = if (r + k as u64).is_multiple_of(2) { Rational::from(c) } else { -Rational::from(c) };
            let e = (m as u64 + w) * r;
            if e <= order as u64 {
                inner = inner.add(&PowerSeries::monomial(Var::Q, c, e as usize, order))?;
            }
        }
        let g = &table[m + k - 1][m];
        outer = outer.add(&g.mul(&inner)?.shift_up(m * step))?;
    }
    let rhs = one_minus_q_inverse_pow(n, order)?.mul(&outer)?.scale(&Rational::from(factorial(k as u64)));
    Ok(first_difference(lhs.coeffs(), rhs.coeffs()))
}

fn genfunc_residual(case: &IdentityCase, q: &QPoint) -> Result<Rational> {
    let p = &case.params;
    let order = case.order_or(8);
    let mut cache = QCache::new(q.value().clone());
    let qw = cache.pow(u64::from(p.w));
    let q_minus_1 = q.value() - Rational::one();
    let k = p.k() as i64;
    // left: sum_n (q-1)^(n+k) beta_n t^n/n!
    let lhs: Vec<Rational> = (0..=order as u32)
        .map(|n| {
            let b = beta(&mut cache, n, &p.a, &p.b, &qw);
            b * q_minus_1.pow(i64::from(n) + k) / Rational::from(factorial(u64::from(n)))
        })
        .collect();
    // right: e^-t sum_i c(i) q^(wi) t^i/i!
    let terms: Vec<Rational> = (0..=order as u64)
        .map(|i| {
            let mut c = qw.pow(i as i64) / Rational::from(factorial(i));
            for (&a, &b) in p.a.iter().zip(&p.b) {
                c = c * cache.ratio(i * u64::from(a) + u64::from(b));
            }
            c
        })
        .collect();
    let rhs = PowerSeries::exp_scaled(Var::T, &-Rational::one(), order).mul(&PowerSeries::new(Var::T, terms, order))?;
    Ok(first_difference(&lhs, rhs.coeffs()))
}

fn genfunc_limit_residual(case: &IdentityCase) -> Result<Rational> {
    let p = &case.params;
    let order = case.order_or(8);
    // termwise q -> 1 limit of e^-t sum_i c(i) q^(wi) t^i/i!; the prefactor (log q/(q-1))^k tends to 1
    let mut terms = Vec::with_capacity(order + 1);
    for i in 0..=order as u64 {
        let mut s = u_expand_power(p.w * i as u32, 1);
        for (&a, &b) in p.a.iter().zip(&p.b) {
            s = s.mul(&u_expand_ratio((i * u64::from(a) + u64::from(b)) as u32, 1)?)?;
        }
        terms.push(s.coeff(0) / Rational::from(factorial(i)));
    }
    let termwise = PowerSeries::exp_scaled(Var::T, &-Rational::one(), order).mul(&PowerSeries::new(Var::T, terms, order))?;
    let weights: Vec<Rational> = p.a.iter().map(|&a| Rational::from(a)).collect();
    let claimed: Vec<Rational> = barnes_series(&Rational::zero(), &weights, order)?
        .into_iter()
        .enumerate()
        .map(|(n, v)| v / Rational::from(factorial(n as u64)))
        .collect();
    Ok(first_difference(termwise.coeffs(), &claimed))
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Runs identity checks against a fixed sample set, reusing per-sample caches.
pub struct Verifier {
    samples: Vec<QPoint>,
    envs: Vec<Env<Rational>>,
    certify: bool,
}

impl Verifier {
    pub fn new(samples: Vec<QPoint>) -> Self {
        let envs = samples.iter().map(|q| Env::new(q.value().clone())).collect();
        Verifier { samples, envs, certify: false }
    }

    /// Replace sampling by evaluation at `D + 1` integer points, with `D` a
    /// degree bound of the residual numerator. Applies to rational identities.
    pub fn certify(mut self, on: bool) -> Self {
        self.certify = on;
        self
    }

    pub fn samples(&self) -> &[QPoint] {
        &self.samples
    }

    pub fn verify(&mut self, case: &IdentityCase) -> Result<IdentityReport> {
        case.validate()?;
        let case = case.clone();
        match case.id {
            IdentityId::DescendingQSeries => {
                let start = Instant::now();
                let residual = descending_series_residual(&case)?;
                let sample = Sample { q: "formal".into(), residual, elapsed_ms: elapsed_ms(start) };
                Ok(IdentityReport::from_samples(case, vec![sample], None))
            }
            IdentityId::GeneratingFunctionLimit => {
                let start = Instant::now();
                let residual = genfunc_limit_residual(&case)?;
                let sample = Sample { q: "1".into(), residual, elapsed_ms: elapsed_ms(start) };
                Ok(IdentityReport::from_samples(case, vec![sample], None))
            }
            IdentityId::GeneratingFunction => {
                let mut out = Vec::with_capacity(self.samples.len());
                for q in &self.samples {
                    let start = Instant::now();
                    let residual = genfunc_residual(&case, q)?;
                    out.push(Sample { q: q.to_string(), residual, elapsed_ms: elapsed_ms(start) });
                }
                Ok(IdentityReport::from_samples(case, out, None))
            }
            _ if self.certify => self.certify_case(case),
            _ => {
                let mut out = Vec::with_capacity(self.samples.len());
                for (q, env) in self.samples.iter().zip(self.envs.iter_mut()) {
                    let start = Instant::now();
                    let (lhs, rhs) = exact_sides(&case, env)?;
                    out.push(Sample { q: q.to_string(), residual: lhs - rhs, elapsed_ms: elapsed_ms(start) });
                }
                Ok(IdentityReport::from_samples(case, out, None))
            }
        }
    }

    fn certify_case(&self, case: IdentityCase) -> Result<IdentityReport> {
        if case.params.qw.is_some() {
            return Err(Error::InvalidArgument("certify mode needs q^w to be a power of q".into()));
        }
        let probe = QPoint::new(Rational::from(2))?;
        let mut env = Env::new(Tracked::variable(&probe));
        let (lhs, rhs) = exact_sides(&case, &mut env)?;
        let bound = lhs.minus(&rhs).num_deg;
        // the denominators are products of (1 - q^c) and powers of q - 1, nonzero at integers >= 2
        let mut out = Vec::new();
        for x in 2..bound as i64 + 3 {
            let q = QPoint::new(Rational::from(x))?;
            let start = Instant::now();
            let mut env = Env::new(q.value().clone());
            let (lhs, rhs) = exact_sides(&case, &mut env)?;
            out.push(Sample { q: q.to_string(), residual: lhs - rhs, elapsed_ms: elapsed_ms(start) });
        }
        Ok(IdentityReport::from_samples(case, out, Some(bound)))
    }
}

/// Check one case at the given samples (the default set when empty).
pub fn verify_identity(case: &IdentityCase, q_samples: &[QPoint]) -> Result<IdentityReport> {
    let samples = if q_samples.is_empty() { default_q_samples() } else { q_samples.to_vec() };
    Verifier::new(samples).verify(case)
}

/// Parameter grid for identity sweeps.
///
/// When `a` and `b` are fixed they override the weight enumeration and fix `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepGrid {
    pub ns: Vec<u32>,
    pub ks: Vec<u32>,
    pub weights: Vec<u32>,
    pub fixed_a: Option<Vec<u32>>,
    pub fixed_b: Option<Vec<u32>>,
    pub ws: Vec<u32>,
    pub ls: Vec<u32>,
    /// Offsets `h - k` for the descending family.
    pub h_offsets: Vec<u32>,
    /// Explicit `h` values, overriding `h_offsets`.
    pub hs: Option<Vec<u32>>,
    pub is: Vec<u32>,
    pub order: Option<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            ns: (0..=6).collect(),
            ks: (1..=3).collect(),
            weights: vec![1, 2, 3],
            fixed_a: None,
            fixed_b: None,
            ws: vec![0, 1, 2],
            ls: vec![1, 2, 3],
            h_offsets: vec![0, 1, 2],
            hs: None,
            is: vec![1, 2, 3],
            order: None,
        }
    }
}

fn tuples(values: &[u32], k: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

impl SweepGrid {
    fn weight_pairs(&self, k: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
        let k = k as usize;
        let a_list = match &self.fixed_a {
            Some(a) if a.len() == k => vec![a.clone()],
            Some(_) => vec![],
            None => tuples(&self.weights, k),
        };
        let b_list = match &self.fixed_b {
            Some(b) if b.len() == k => vec![b.clone()],
            Some(_) => vec![],
            None => tuples(&self.weights, k),
        };
        a_list.iter().flat_map(|a| b_list.iter().map(move |b| (a.clone(), b.clone()))).collect()
    }

    fn ks(&self) -> Vec<u32> {
        match (&self.fixed_a, &self.fixed_b) {
            (Some(a), _) => vec![a.len() as u32],
            (None, Some(b)) => vec![b.len() as u32],
            _ => self.ks.clone(),
        }
    }

    fn h_values(&self, k: u32) -> Vec<u32> {
        match &self.hs {
            Some(hs) => hs.iter().copied().filter(|&h| h >= k).collect(),
            None => self.h_offsets.iter().map(|o| k + o).collect(),
        }
    }

    /// All valid cases for `id` in deterministic order (n, k, then parameters).
    pub fn cases(&self, id: IdentityId, mode: Mode) -> Vec<IdentityCase> {
        let mut out = Vec::new();
        let ws: Vec<u32> = if id.needs_zero_w() { vec![0] } else { self.ws.clone() };
        let finish = |c: IdentityCase| {
            let c = c.with_mode(mode);
            match self.order {
                Some(o) => c.with_order(o),
                None => c,
            }
        };
        for &n in &self.ns {
            for k in self.ks() {
                if k == 0 {
                    continue;
                }
                if id == IdentityId::CarlitzSeries {
                    if k == 1 {
                        out.push(finish(IdentityCase::new(id, ChangheeParams::new(n, vec![1], vec![1], 0).expect("valid"))));
                    }
                    continue;
                }
                if id == IdentityId::BinomialShiftSingle && k != 1 {
                    continue;
                }
                if id.uses_descending_family() {
                    let hs = if id == IdentityId::UnitGaussian { vec![k] } else { self.h_values(k) };
                    for h in hs {
                        for &w in &ws {
                            if let Ok(c) = IdentityCase::descending(id, n, k, h, w) {
                                out.push(finish(c));
                            }
                        }
                    }
                    continue;
                }
                for (a, b) in self.weight_pairs(k) {
                    for &w in &ws {
                        let Ok(params) = ChangheeParams::new(n, a.clone(), b.clone(), w) else { continue };
                        let base = IdentityCase::new(id, params);
                        let variants: Vec<IdentityCase> = match id {
                            IdentityId::BinomialShift => self.is.iter().filter(|&&i| i >= 1 && i <= n).map(|&i| base.clone().with_i(i)).collect(),
                            IdentityId::Distribution => self.ls.iter().map(|&l| base.clone().with_l(l)).collect(),
                            _ => vec![base],
                        };
                        for c in variants {
                            let c = finish(c);
                            if c.validate().is_ok() {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
