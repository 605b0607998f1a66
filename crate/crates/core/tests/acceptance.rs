//! Acceptance suite: ten criteria, each run once, timed against its budget
//! and reported on one line. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qbern::changhee::{q_limit, q_limit_expansion, ChangheeParams, IdentityCase, IdentityId, Mode, Status, SweepGrid, Verifier};
use qbern::exactq::{default_q_samples, Rational};
use qbern::oracle::{Oracle, Target, WeightedPolynomial};
use qbern::padic::{rational_distance, Distance, PadicContext, PadicNumber};
use qbern::series::{barnes_series, bernoulli_series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type BinaryOp = fn(&PadicNumber, &PadicNumber) -> qbern::Result<PadicNumber>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ctx(p: u64, m: u32) -> PadicContext {
    PadicContext::new(p, m).expect("valid context")
}

fn classical_congruence() -> Outcome {
    let half = Rational::new(-1, 2);
    let mut checked = 0;
    for p in [3u64, 5, 7] {
        let oracle = Oracle::new(ctx(p, 12));
        for level in 2..=6u32 {
            let f = WeightedPolynomial::monomial(1);
            let exact = oracle.volkenborn_level_exact(&f, level).map_err(|e| e.to_string())?;
            let d = rational_distance(&exact, &half, p);
            ensure(d.within(i64::from(level)), || format!("p={p} N={level}: |S_N + 1/2| has exponent {d}"))?;
            let embedded = oracle.volkenborn_level(&f, level).map_err(|e| e.to_string())?;
            let target = PadicNumber::from_rational(&half, oracle.context());
            let pd = embedded.distance(&target).map_err(|e| e.to_string())?;
            ensure(pd.within(i64::from(level)), || format!("p={p} N={level}: embedded distance {pd}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (p, N) pairs congruent to -1/2 mod p^N"))
}

fn classical_moments() -> Outcome {
    let oracle = Oracle::new(ctx(5, 16));
    let b = bernoulli_series(1, &Rational::zero(), 6);
    let mut worst = i64::MAX;
    for n in 0..=6u32 {
        let mut prev: Option<Distance> = None;
        for level in 2..=6u32 {
            let s = oracle.classical_moments(1, n, &Rational::zero(), level).map_err(|e| e.to_string())?;
            let d = rational_distance(&s, &b[n as usize], 5);
            let bound = i64::from(level) - 2;
            ensure(d.within(bound), || format!("n={n} N={level}: distance exponent {d} < {bound}"))?;
            if let Some(p) = prev {
                ensure(d.min_exponent() >= p.min_exponent(), || format!("n={n}: distance grew from {p} to {d} at N={level}"))?;
            }
            if let Distance::Exponent(e) = d {
                worst = worst.min(e - bound);
            }
            prev = Some(d);
        }
    }
    Ok(format!("n<=6, N=2..6 within 5^-(N-2), nonincreasing; tightest margin {worst}"))
}

fn exact_identity_suite() -> Outcome {
    let grid = SweepGrid::default();
    let mut verifier = Verifier::new(default_q_samples());
    let mut total = 0usize;
    let mut parts = Vec::new();
    for id in [
        IdentityId::ShiftRecurrence,
        IdentityId::BinomialShift,
        IdentityId::BinomialShiftSingle,
        IdentityId::WeightShift,
        IdentityId::BinomialSum,
        IdentityId::Addition,
        IdentityId::UnitGaussian,
        IdentityId::DescendingGaussian,
        IdentityId::Distribution,
    ] {
        let cases = grid.cases(id, id.default_mode());
        ensure(!cases.is_empty(), || format!("{id}: empty grid"))?;
        for case in &cases {
            let report = verifier.verify(case).map_err(|e| format!("{id}: {e}"))?;
            ensure(report.samples.len() == 8, || format!("{id}: {} samples", report.samples.len()))?;
            ensure(report.status == Status::Pass, || {
                let bad = report.samples.iter().find(|s| !s.residual.is_zero()).expect("a nonzero residual");
                format!("{id} {:?} l={:?} h={:?} i={:?}: residual {} at q={}", case.params, case.l, case.h, case.i, bad.residual, bad.q)
            })?;
        }
        total += cases.len();
        parts.push(format!("{id}:{}", cases.len()));
    }
    Ok(format!("{total} cases x 8 samples, all zero residual ({})", parts.join(" ")))
}

fn generating_function() -> Outcome {
    let grid = SweepGrid { ns: vec![0], ks: vec![1, 2], ws: vec![0, 1], order: Some(8), ..SweepGrid::default() };
    let mut verifier = Verifier::new(default_q_samples());
    let cases = grid.cases(IdentityId::GeneratingFunction, Mode::Corrected);
    for case in &cases {
        let report = verifier.verify(case).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{:?}: {:?}", case.params, report.samples))?;
    }
    Ok(format!("{} (k, a, b, w) cases, coefficients through t^8 equal at 8 samples", cases.len()))
}

fn q_series_expansion() -> Outcome {
    let grid = SweepGrid { ns: (0..=4).collect(), ks: vec![1, 2, 3], ws: vec![0, 1], order: Some(30), ..SweepGrid::default() };
    let mut verifier = Verifier::new(default_q_samples());
    let cases = grid.cases(IdentityId::DescendingQSeries, Mode::Corrected);
    ensure(cases.len() == 5 * 3 * 3 * 2, || format!("unexpected grid size {}", cases.len()))?;
    for case in &cases {
        let report = verifier.verify(case).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("n={} k={} h={:?} w={}: first difference {}", case.params.n, case.params.k(), case.h, case.params.w, report.samples[0].residual))?;
    }
    Ok(format!("{} (n, k, h, w) cases equal through q^30", cases.len()))
}

fn limits() -> Outcome {
    let mut count = 0;
    for n in 0..=5u32 {
        for k in 1..=2usize {
            let a_lists: Vec<Vec<u32>> = if k == 1 { vec![vec![1], vec![2]] } else { vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]] };
            for a in &a_lists {
                for w in 0..=1u32 {
                    let weights: Vec<Rational> = a.iter().map(|&x| Rational::from(x)).collect();
                    let reference = barnes_series(&Rational::from(w), &weights, n as usize).map_err(|e| e.to_string())?[n as usize].clone();
                    let order = (n as usize + k + 2).max(12);
                    let mut values = Vec::new();
                    for b in [vec![1; k], vec![2; k], vec![3; k]] {
                        let params = ChangheeParams::new(n, a.clone(), b.clone(), w).map_err(|e| e.to_string())?;
                        let expansion = q_limit_expansion(&params, order).map_err(|e| e.to_string())?;
                        ensure(expansion.pole_order() == n as usize + k, || format!("pole order {}", expansion.pole_order()))?;
                        for power in 1..=(n as usize + k) {
                            let c = expansion.coeff(-(power as i64));
                            ensure(c.is_zero(), || format!("n={n} a={a:?} b={b:?} w={w}: u^-{power} coefficient {c}"))?;
                        }
                        values.push(q_limit(&params, order).map_err(|e| e.to_string())?);
                    }
                    ensure(values.iter().all(|v| *v == reference), || format!("n={n} a={a:?} w={w}: limits {values:?} vs Barnes {reference}"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} (n, a, w) cases equal Barnes values, poles vanish, independent of b"))
}

fn changhee_convergence() -> Outcome {
    let c = ctx(3, 40);
    let oracle = Oracle::new(c);
    let q = PadicNumber::from_integer(4, c);
    let mut summary = Vec::new();
    let mut worst_final = i64::MAX;
    for (a, b) in [(vec![1], vec![1]), (vec![1], vec![2]), (vec![2], vec![1])] {
        for n in 0..=3u32 {
            let params = ChangheeParams::new(n, a.clone(), b.clone(), 0).map_err(|e| e.to_string())?;
            let rep = oracle
                .convergence_report(&Target::Changhee { params, q: q.clone() }, &[2, 3, 4, 5])
                .map_err(|e| e.to_string())?;
            ensure(rep.monotone, || format!("k=1 n={n} a={a:?} b={b:?}: distances {:?}", rep.distances))?;
            ensure(rep.strictly_decreasing_somewhere, || format!("k=1 n={n}: no strict decrease in {:?}", rep.distances))?;
            ensure(rep.final_distance.within(3), || format!("k=1 n={n} a={a:?} b={b:?}: final distance exponent {}", rep.final_distance))?;
            worst_final = worst_final.min(rep.final_distance.min_exponent());
        }
    }
    summary.push(format!("k=1 worst final exponent {worst_final}"));
    for n in 0..=3u32 {
        let params = ChangheeParams::new(n, vec![1, 1], vec![1, 2], 0).map_err(|e| e.to_string())?;
        let rep = oracle
            .convergence_report(&Target::Changhee { params, q: q.clone() }, &[2, 3])
            .map_err(|e| e.to_string())?;
        ensure(rep.monotone && rep.strictly_decreasing_somewhere, || format!("k=2 n={n}: distances {:?}", rep.distances))?;
        let e: Vec<String> = rep.distances.iter().map(|d| d.to_string()).collect();
        summary.push(format!("k=2 n={n}: {}", e.join(",")));
    }
    Ok(summary.join("; "))
}

fn shift_identities() -> Outcome {
    let oracle = Oracle::new(ctx(5, 16));
    let f = WeightedPolynomial::monomial(2);
    let mut out = Vec::new();
    for shift in [1u32, 2] {
        let rep = oracle.shift_identity_check(&f, shift, 4).map_err(|e| e.to_string())?;
        ensure(rep.distance.within(2), || format!("shift {shift}: residual exponent {}", rep.distance))?;
        out.push(format!("n={shift}: exponent {}", rep.distance));
    }
    Ok(out.join(", "))
}

fn diagnostics() -> Outcome {
    let mut verifier = Verifier::new(default_q_samples());
    let mut witnesses = Vec::new();
    let base = ChangheeParams::new(0, vec![1], vec![1], 0).map_err(|e| e.to_string())?;
    let literal = IdentityCase::new(IdentityId::Distribution, base.clone()).with_l(2).with_mode(Mode::Literal);
    let lit = verifier.verify(&literal).map_err(|e| e.to_string())?;
    ensure(lit.status == Status::Diagnostic, || format!("literal-mode status {}", lit.status))?;
    ensure(lit.samples.iter().all(|s| !s.residual.is_zero()), || "literal-mode residual vanished".into())?;
    let corrected = verifier.verify(&literal.clone().with_mode(Mode::Corrected)).map_err(|e| e.to_string())?;
    ensure(corrected.passed(), || "corrected distribution failed at n=0, k=1, l=2".into())?;
    witnesses.push(format!("eq2.9 literal residual {} at q={}", lit.samples[0].residual, lit.samples[0].q));

    let small = SweepGrid { ns: (0..=3).collect(), ks: vec![1, 2], weights: vec![1, 2], ws: vec![0, 1], ls: vec![2, 3], ..SweepGrid::default() };
    for id in [IdentityId::Distribution, IdentityId::CarlitzSeries, IdentityId::OrderStep, IdentityId::GeneratingFunctionLimit] {
        let mode = if id == IdentityId::Distribution { Mode::Literal } else { Mode::Diagnostic };
        let cases = small.cases(id, mode);
        ensure(!cases.is_empty(), || format!("{id}: empty grid"))?;
        let mut nonzero = 0;
        for case in &cases {
            let report = verifier.verify(case).map_err(|e| format!("{id} aborted: {e}"))?;
            ensure(report.status == Status::Diagnostic, || format!("{id}: status {}", report.status))?;
            ensure(!report.samples.is_empty(), || format!("{id}: no samples"))?;
            if report.samples.iter().any(|s| !s.residual.is_zero()) {
                nonzero += 1;
            }
        }
        ensure(nonzero > 0, || format!("{id}: no residual witness in {} cases", cases.len()))?;
        witnesses.push(format!("{id} {nonzero}/{}", cases.len()));
    }
    Ok(witnesses.join(", "))
}

fn padic_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let m = 20u32;
    let mut checked = 0;
    for p in [3u64, 5, 7] {
        let c = ctx(p, m);
        let hi = c.with_precision(m + 8);
        for _ in 0..100 {
            let u: i64 = rng.gen_range(0..1_000_000_000);
            let y = PadicNumber::from_integer(1 + p as i64 * u, c);
            let round = y.plog().and_then(|l| l.pexp()).map_err(|e| e.to_string())?;
            let prec = round.precision().min(y.precision());
            ensure(round.distance(&y).map_err(|e| e.to_string())?.within(prec), || format!("p={p}: exp(log({y})) = {round}"))?;
            let x = PadicNumber::from_integer(p as i64 * rng.gen_range(-1_000_000i64..1_000_000), c);
            let back = x.pexp().and_then(|e| e.plog()).map_err(|e| e.to_string())?;
            let prec = back.precision().min(x.precision());
            ensure(back.distance(&x).map_err(|e| e.to_string())?.within(prec), || format!("p={p}: log(exp({x})) = {back}"))?;

            // recompute at M + 8 and truncate to the claimed precision
            let r1 = Rational::new(rng.gen_range(-100_000i64..100_000), rng.gen_range(1i64..10_000));
            let r2 = Rational::new(rng.gen_range(1i64..100_000), rng.gen_range(1i64..10_000));
            let (a, b) = (PadicNumber::from_rational(&r1, c), PadicNumber::from_rational(&r2, c));
            let (ah, bh) = (PadicNumber::from_rational(&r1, hi), PadicNumber::from_rational(&r2, hi));
            let ops: [(&str, BinaryOp); 4] = [
                ("add", |x, y| x.add(y)),
                ("sub", |x, y| x.sub(y)),
                ("mul", |x, y| x.mul(y)),
                ("div", |x, y| x.div(y)),
            ];
            for (name, op) in ops {
                let low = op(&a, &b).map_err(|e| e.to_string())?;
                let high = op(&ah, &bh).map_err(|e| e.to_string())?;
                let back = high.recontext(c).map_err(|e| e.to_string())?.truncate(low.precision());
                ensure(back == low, || format!("p={p} {name}({r1}, {r2}): {low} vs {back}"))?;
            }
            let ly = y.plog().map_err(|e| e.to_string())?;
            let lyh = PadicNumber::from_integer(1 + p as i64 * u, hi).plog().map_err(|e| e.to_string())?;
            let back = lyh.recontext(c).map_err(|e| e.to_string())?.truncate(ly.precision());
            ensure(back == ly, || format!("p={p} plog: {ly} vs {back}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} samples: log/exp round trips and M+8 recomputation agree"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "classical Bernoulli congruence", budget: Duration::from_secs(5), run: classical_congruence },
        Criterion { id: 2, name: "classical moments", budget: Duration::from_secs(10), run: classical_moments },
        Criterion { id: 3, name: "exact identity suite", budget: Duration::from_secs(60), run: exact_identity_suite },
        Criterion { id: 4, name: "generating-function identity", budget: Duration::from_secs(10), run: generating_function },
        Criterion { id: 5, name: "q-series expansion", budget: Duration::from_secs(30), run: q_series_expansion },
        Criterion { id: 6, name: "q -> 1 limits", budget: Duration::from_secs(10), run: limits },
        Criterion { id: 7, name: "Changhee oracle convergence", budget: Duration::from_secs(60), run: changhee_convergence },
        Criterion { id: 8, name: "shift identities", budget: Duration::from_secs(5), run: shift_identities },
        Criterion { id: 9, name: "diagnostic identities", budget: Duration::from_secs(10), run: diagnostics },
        Criterion { id: 10, name: "p-adic kernel soundness", budget: Duration::from_secs(10), run: padic_kernel },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; took {:.2} s, budget {} s", elapsed.as_secs_f64(), c.budget.as_secs())),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {} ({:.2} s / {} s): {}",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
