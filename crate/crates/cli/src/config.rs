//! Command-line configuration and its canonical flag form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbern::changhee::{IdentityId, Mode};
use qbern::oracle::DEFAULT_BUDGET;
use qbern::{QPoint, Rational};

/// Nonnegative integers given as `lo..hi` (inclusive), a comma list, or a mix (`0..2,5`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSet(pub Vec<u32>);

impl FromStr for IntSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("expected a nonnegative integer, got {t:?}"));
        let mut out = Vec::new();
        for item in s.split(',') {
            match item.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi) = (parse(lo)?, parse(hi)?);
                    if lo > hi {
                        return Err(format!("empty range {item:?}"));
                    }
                    out.extend(lo..=hi);
                }
                None => out.push(parse(item)?),
            }
        }
        Ok(IntSet(out))
    }
}

impl fmt::Display for IntSet {
    /// Ascending runs of three or more collapse to `lo..hi`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.0;
        let mut parts = Vec::new();
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[j] + 1 {
                j += 1;
            }
            if j - i >= 2 {
                parts.push(format!("{}..{}", v[i], v[j]));
                i = j + 1;
            } else {
                parts.push(v[i].to_string());
                i += 1;
            }
        }
        f.write_str(&parts.join(","))
    }
}

/// An ordered comma list of positive weights, e.g. `1,2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<u32>);

impl FromStr for Weights {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|t| match t.trim().parse::<u32>() {
                Ok(0) | Err(_) => Err(format!("expected a positive integer, got {t:?}")),
                Ok(v) => Ok(v),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Weights)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&s.join(","))
    }
}

impl Weights {
    /// The weight vector for `k` folds: itself if it has `k` entries, or a single entry repeated.
    pub fn for_k(&self, k: u32) -> Result<Vec<u32>, String> {
        match self.0.len() {
            n if n == k as usize => Ok(self.0.clone()),
            1 => Ok(vec![self.0[0]; k as usize]),
            n => Err(format!("weight list {self} has {n} entries, expected 1 or k = {k}")),
        }
    }
}

/// Comma list of rational sample points, e.g. `2,1/2,-3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QList(pub Vec<QPoint>);

impl FromStr for QList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(|t| t.trim().parse::<QPoint>().map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>().map(QList)
    }
}

impl fmt::Display for QList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Eq)]
pub struct Output {
    /// Output format: JSON lines or CSV with a header row.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report every elapsed_ms as 0 so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Parser, Clone, Debug, PartialEq, Eq)]
#[command(name = "qbern", version, about = "Changhee q-Bernoulli values, identity checks, p-adic level sums and q -> 1 limits")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    /// Table of reduced closed-form values beta.
    Compute(ComputeArgs),
    /// Check an identity over a parameter grid at rational q samples.
    Verify(VerifyArgs),
    /// Level-sum convergence against a closed form.
    Oracle(OracleArgs),
    /// q -> 1 limits compared with Barnes polynomials.
    Limit(LimitArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Eq)]
pub struct ComputeArgs {
    #[arg(long, default_value = "0")]
    pub n: IntSet,
    #[arg(long, default_value = "1")]
    pub k: IntSet,
    #[arg(long, default_value = "1")]
    pub a: Weights,
    #[arg(long, default_value = "1")]
    pub b: Weights,
    #[arg(long, default_value = "0")]
    pub w: IntSet,
    /// Rational q samples; defaults to the built-in sample set.
    #[arg(long)]
    pub q: Option<QList>,
    /// Add a p-adic column for this odd prime (needs v_p(q - 1) >= 1).
    #[arg(long)]
    pub padic: Option<u64>,
    /// p-adic precision M.
    #[arg(long, default_value_t = 20)]
    pub precision: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Clone, Debug, PartialEq, Eq)]
pub struct VerifyArgs {
    /// Identity id, e.g. thm2.3 or eq2.9-distribution.
    #[arg(long)]
    pub identity: IdentityId,
    /// paper-literal, corrected or diagnostic; defaults per identity.
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long, conflicts_with = "max_n")]
    pub n: Option<IntSet>,
    /// Shorthand for --n 0..MAX.
    #[arg(long)]
    pub max_n: Option<u32>,
    #[arg(long, conflicts_with = "max_k")]
    pub k: Option<IntSet>,
    /// Shorthand for --k 1..MAX.
    #[arg(long)]
    pub max_k: Option<u32>,
    /// Fix the a weights instead of enumerating them.
    #[arg(long)]
    pub a: Option<Weights>,
    /// Fix the b weights instead of enumerating them.
    #[arg(long)]
    pub b: Option<Weights>,
    /// Values enumerated for each a_j and b_j.
    #[arg(long)]
    pub weights: Option<IntSet>,
    #[arg(long)]
    pub w: Option<IntSet>,
    #[arg(long)]
    pub l: Option<IntSet>,
    #[arg(long)]
    pub h: Option<IntSet>,
    #[arg(long)]
    pub i: Option<IntSet>,
    #[arg(long)]
    pub q: Option<QList>,
    /// Truncation order for series identities.
    #[arg(long)]
    pub order: Option<usize>,
    /// Evaluate at enough points to prove the rational identity.
    #[arg(long)]
    pub certify: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Clone, Debug, PartialEq, Eq)]
pub struct OracleArgs {
    /// Classical moments against B_n^(r)(x).
    #[arg(long, conflicts_with = "changhee", required_unless_present = "changhee")]
    pub classical: bool,
    /// Changhee level sums against the p-adic closed form.
    #[arg(long)]
    pub changhee: bool,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Order r of the classical moments.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Classical argument x.
    #[arg(long, default_value = "0")]
    pub x: Rational,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value = "1")]
    pub a: Weights,
    #[arg(long, default_value = "1")]
    pub b: Weights,
    #[arg(long, default_value_t = 0)]
    pub w: u32,
    /// p-adic base q; defaults to 1 + p.
    #[arg(long)]
    pub q: Option<Rational>,
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    #[arg(long, default_value_t = 30)]
    pub precision: u32,
    #[arg(long, default_value = "2..5")]
    pub levels: IntSet,
    /// Maximum number of summation points p^(N k).
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Clone, Debug, PartialEq, Eq)]
pub struct LimitArgs {
    #[arg(long, default_value = "0")]
    pub n: IntSet,
    #[arg(long, default_value = "1")]
    pub k: IntSet,
    #[arg(long, default_value = "1")]
    pub a: Weights,
    #[arg(long, default_value = "0")]
    pub w: IntSet,
    /// Truncation order of the u-expansion; must be at least n + k + 2.
    #[arg(long, default_value_t = 32)]
    pub order: usize,
    #[command(flatten)]
    pub output: Output,
}

fn push(out: &mut Vec<String>, flag: &str, value: impl fmt::Display) {
    out.push(format!("--{flag}"));
    out.push(value.to_string());
}

fn push_opt(out: &mut Vec<String>, flag: &str, value: &Option<impl fmt::Display>) {
    if let Some(v) = value {
        push(out, flag, v);
    }
}

fn push_flag(out: &mut Vec<String>, flag: &str, on: bool) {
    if on {
        out.push(format!("--{flag}"));
    }
}

impl Output {
    fn flags(&self, out: &mut Vec<String>) {
        push(out, "format", self.format.as_str());
        if let Some(p) = &self.out {
            push(out, "out", p.display());
        }
        push_flag(out, "no-timing", self.no_timing);
    }
}

impl RunConfig {
    pub fn parse_from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        RunConfig::try_parse_from(args)
    }

    /// Every setting as flags, defaults included, in a fixed order. Parsing
    /// `qbern` followed by these arguments yields an equal config.
    pub fn canonical_args(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.command {
            Command::Compute(c) => {
                out.push("compute".into());
                push(&mut out, "n", &c.n);
                push(&mut out, "k", &c.k);
                push(&mut out, "a", &c.a);
                push(&mut out, "b", &c.b);
                push(&mut out, "w", &c.w);
                push_opt(&mut out, "q", &c.q);
                push_opt(&mut out, "padic", &c.padic);
                push(&mut out, "precision", c.precision);
                c.output.flags(&mut out);
            }
            Command::Verify(c) => {
                out.push("verify".into());
                push(&mut out, "identity", c.identity);
                push_opt(&mut out, "mode", &c.mode);
                push_opt(&mut out, "n", &c.n);
                push_opt(&mut out, "max-n", &c.max_n);
                push_opt(&mut out, "k", &c.k);
                push_opt(&mut out, "max-k", &c.max_k);
                push_opt(&mut out, "a", &c.a);
                push_opt(&mut out, "b", &c.b);
                push_opt(&mut out, "weights", &c.weights);
                push_opt(&mut out, "w", &c.w);
                push_opt(&mut out, "l", &c.l);
                push_opt(&mut out, "h", &c.h);
                push_opt(&mut out, "i", &c.i);
                push_opt(&mut out, "q", &c.q);
                push_opt(&mut out, "order", &c.order);
                push_flag(&mut out, "certify", c.certify);
                c.output.flags(&mut out);
            }
            Command::Oracle(c) => {
                out.push("oracle".into());
                push_flag(&mut out, "classical", c.classical);
                push_flag(&mut out, "changhee", c.changhee);
                push(&mut out, "n", c.n);
                push(&mut out, "r", c.r);
                push(&mut out, "x", &c.x);
                push(&mut out, "k", c.k);
                push(&mut out, "a", &c.a);
                push(&mut out, "b", &c.b);
                push(&mut out, "w", c.w);
                push_opt(&mut out, "q", &c.q);
                push(&mut out, "p", c.p);
                push(&mut out, "precision", c.precision);
                push(&mut out, "levels", &c.levels);
                push(&mut out, "budget", c.budget);
                c.output.flags(&mut out);
            }
            Command::Limit(c) => {
                out.push("limit".into());
                push(&mut out, "n", &c.n);
                push(&mut out, "k", &c.k);
                push(&mut out, "a", &c.a);
                push(&mut out, "w", &c.w);
                push(&mut out, "order", c.order);
                c.output.flags(&mut out);
            }
        }
        out
    }

    /// [`canonical_args`](Self::canonical_args) joined by spaces.
    pub fn canonical(&self) -> String {
        self.canonical_args().join(" ")
    }

    pub fn output(&self) -> &Output {
        match &self.command {
            Command::Compute(c) => &c.output,
            Command::Verify(c) => &c.output,
            Command::Oracle(c) => &c.output,
            Command::Limit(c) => &c.output,
        }
    }
}
