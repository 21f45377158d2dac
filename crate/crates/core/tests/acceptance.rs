//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fails.
//!
//! Tolerances are exact: every valuation is compared as a rational number.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use padic_resolvent::formal_group::{
    formal_group_law, group_law_associativity_check, log_inverse_roundtrip_check,
};
use padic_resolvent::formulas::{delta_valuation_rhs, lvalue_valuation_rhs, FormulaInput};
use padic_resolvent::padic::{rat, Valuation};
use padic_resolvent::suite::{
    run_all, CaseResult, Grid, Outcome, SuiteConfig, SuiteName, SuiteReport,
};

struct Line {
    ok: bool,
    text: String,
}

fn line(index: usize, name: &str, ok: bool, detail: String, elapsed: Duration) -> Line {
    Line {
        ok,
        text: format!(
            "criterion {index} [{name}]: {} ({detail}; {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        ),
    }
}

fn report(reports: &[SuiteReport], s: SuiteName) -> &SuiteReport {
    reports.iter().find(|r| r.suite == s).expect("suite ran")
}

fn cases<'a>(reports: &'a [SuiteReport], s: SuiteName, check: &'a str) -> Vec<&'a CaseResult> {
    report(reports, s).cases_for(check).collect()
}

fn all_pass(cases: &[&CaseResult]) -> bool {
    !cases.is_empty() && cases.iter().all(|c| c.outcome == Outcome::Pass)
}

fn failures(cases: &[&CaseResult]) -> String {
    let bad: Vec<String> = cases
        .iter()
        .filter(|c| c.outcome != Outcome::Pass)
        .map(|c| {
            format!(
                "p={} n={} f={} {:?}: {}",
                c.p,
                c.n,
                c.f,
                c.outcome,
                c.violation.as_ref().map_or("", |v| v.detail.as_str())
            )
        })
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(" | "))
    }
}

fn checked(cases: &[&CaseResult]) -> usize {
    cases.iter().map(|c| c.checked).sum()
}

// ---- independent norm oracle ---------------------------------------------------

/// `x^{p^{k-1}(p-1)} + … + x^{p^{k-1}} + 1`, dense, lowest degree first.
fn phi(p: u64, k: u32) -> Vec<BigInt> {
    let step = p.pow(k - 1) as usize;
    let mut c = vec![BigInt::zero(); step * (p as usize - 1) + 1];
    for i in 0..p as usize {
        c[i * step] = BigInt::one();
    }
    c
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a mod m` for monic `m`.
fn poly_rem(a: &[BigInt], m: &[BigInt]) -> Vec<BigInt> {
    let d = m.len() - 1;
    let mut r = a.to_vec();
    for top in (d..r.len()).rev() {
        let c = r[top].clone();
        if c.is_zero() {
            continue;
        }
        for (j, mj) in m.iter().enumerate() {
            r[top - d + j] -= &c * mj;
        }
    }
    r.truncate(d);
    r.resize(d, BigInt::zero());
    r
}

/// Fraction-free determinant.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `v_p(g(ζ_{p^n}))` from the norm `det(mult. by g on Z[x]/Φ_{p^n})`; `None` if zero.
fn oracle_valuation(p: u64, n: u32, g: &[BigInt]) -> Option<BigRational> {
    let modulus = phi(p, n);
    let d = modulus.len() - 1;
    let mut column = poly_rem(g, &modulus);
    let mut rows = vec![vec![BigInt::zero(); d]; d];
    for j in 0..d {
        for (row, c) in rows.iter_mut().zip(&column) {
            row[j] = c.clone();
        }
        let mut shifted = vec![BigInt::zero()];
        shifted.extend(column.iter().cloned());
        column = poly_rem(&shifted, &modulus);
    }
    let mut det = bareiss(rows).abs();
    if det.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0i64;
    while (&det % &pb).is_zero() {
        det /= &pb;
        v += 1;
    }
    Some(BigRational::new(BigInt::from(v), BigInt::from(d as u64)))
}

/// `ω_n^ε` with `ε = (-1)^{n-1}`, assembled independently of the library.
fn omega_eps(p: u64, n: u32) -> Vec<BigInt> {
    let odd = (n - 1) % 2 == 1;
    let mut w = if odd {
        vec![BigInt::from(-1), BigInt::one()]
    } else {
        vec![BigInt::one()]
    };
    for k in 1..=n {
        if (k % 2 == 1) == odd {
            w = poly_mul(&w, &phi(p, k));
        }
    }
    w
}

fn main() {
    let grid = Grid::default();
    let cfg = SuiteConfig::default();
    let mut lines = Vec::new();

    let start = Instant::now();
    let reports = run_all(&grid, &cfg).expect("suites run");
    let suite_time = start.elapsed();
    let points = grid.points();

    // 1
    let c1 = cases(&reports, SuiteName::ResolventBound, "uniformizer_equality");
    lines.push(line(
        1,
        "resolvent valuation (n+1)/2 at the Frobenius uniformizer of Psi_n, every chi of order p^n",
        all_pass(&c1) && c1.len() == points.len() && suite_time < Duration::from_secs(300),
        format!(
            "{} grid points, {} characters, exact equality{}",
            c1.len(),
            checked(&c1),
            failures(&c1)
        ),
        suite_time,
    ));

    // 2
    let c2 = cases(&reports, SuiteName::ResolventBound, "random_lower_bound");
    let enough = c2
        .iter()
        .all(|c| c.details["samples"].as_u64().unwrap_or(0) >= 200);
    lines.push(line(
        2,
        "resolvent lower bound (n+1)/2 for random integral elements",
        all_pass(&c2) && enough && c2.len() == points.len(),
        format!(
            "{} grid points, {} resolvents, zero violations required{}",
            c2.len(),
            checked(&c2),
            failures(&c2)
        ),
        suite_time,
    ));

    // 3
    let dual = cases(&reports, SuiteName::ResolventEquality, "dual_beta");
    let tame = cases(&reports, SuiteName::ResolventEquality, "tame_equality");
    let small = cases(
        &reports,
        SuiteName::ResolventEquality,
        "tame_small_valuation",
    );
    let small_primes: Vec<u64> = small.iter().map(|c| c.p).collect();
    let ok3 = all_pass(&dual)
        && dual.len() == points.len()
        && all_pass(&tame)
        && all_pass(&small)
        && small_primes.contains(&5)
        && small_primes.contains(&7);
    let mut all3 = dual.clone();
    all3.extend(tame.iter());
    all3.extend(small.iter());
    lines.push(line(
        3,
        "equality construction: dual element sums to n+1, tame pairs sum to 1, tame 1/(p-1) example",
        ok3,
        format!(
            "{} dual constructions, {} tame pairs, {} small tame examples{}",
            checked(&dual),
            checked(&tame),
            small.len(),
            failures(&all3)
        ),
        suite_time,
    ));

    // 4
    let c4 = cases(&reports, SuiteName::Ramification, "lower_numbering");
    lines.push(line(
        4,
        "ramification jumps, different exponents (p-1)p^i and trace ideals",
        all_pass(&c4) && c4.len() == points.len(),
        format!(
            "{} grid points, {} exact comparisons{}",
            c4.len(),
            checked(&c4),
            failures(&c4)
        ),
        suite_time,
    ));

    // 5
    let c5 = cases(
        &reports,
        SuiteName::FrobeniusUniformizer,
        "uniformizer_system",
    );
    let per_layer = c5
        .iter()
        .all(|c| c.details["samples_per_layer"].as_u64().unwrap_or(0) >= 51);
    lines.push(line(
        5,
        "uniformizer system congruences and the layer decomposition for random uniformizers",
        all_pass(&c5) && per_layer && c5.len() == points.len(),
        format!(
            "{} grid points, {} congruences{}",
            c5.len(),
            checked(&c5),
            failures(&c5)
        ),
        suite_time,
    ));

    // 6
    let c6 = cases(&reports, SuiteName::GaussLambda, "lambda_compatibility");
    let mut covered: Vec<(u64, u32)> = c6.iter().filter(|c| c.f == 2).map(|c| (c.p, c.n)).collect();
    covered.sort_unstable();
    lines.push(line(
        6,
        "lambda compatibility of resolvents for p in {5,7}, n in {1,2}, f=2",
        all_pass(&c6) && covered == vec![(5, 1), (5, 2), (7, 1), (7, 2)],
        format!(
            "{} resolvent pairs, exact valuations{}",
            checked(&c6),
            failures(&c6)
        ),
        suite_time,
    ));

    // 7
    let t7 = Instant::now();
    let c7 = cases(&reports, SuiteName::FormulaConsistency, "closed_forms");
    let c7b = cases(&reports, SuiteName::FormulaConsistency, "bound_consistency");
    let mut oracle_ok = true;
    let mut oracle_count = 0;
    for p in [3u64, 5, 7] {
        for n in 2..=3u32 {
            for k in 1..n {
                let expected = BigRational::new(
                    BigInt::from(p.pow(k) - p.pow(k - 1)),
                    BigInt::from(p.pow(n - 1) * (p - 1)),
                );
                let got = oracle_valuation(p, n, &phi(p, k));
                oracle_count += 1;
                if got != Some(expected) {
                    oracle_ok = false;
                }
            }
        }
        for n in 1..=3u32 {
            let omega = oracle_valuation(p, n, &omega_eps(p, n));
            let delta = delta_valuation_rhs(p, n).expect("n >= 1");
            let lhs = delta.shift(&rat(n as i64 + 1, 2));
            oracle_count += 1;
            if Some(lhs) != omega.map(Valuation::Finite) {
                oracle_ok = false;
            }
        }
    }
    for p in [5u64, 7, 11, 13] {
        let expected = Valuation::Finite(rat(-3, 2) + rat(1, p as i64 - 1));
        oracle_count += 1;
        if lvalue_valuation_rhs(&FormulaInput::new(p, 2)).ok() != Some(expected) {
            oracle_ok = false;
        }
    }
    let elapsed7 = t7.elapsed();
    let mut all7 = c7.clone();
    all7.extend(c7b.iter());
    lines.push(line(
        7,
        "closed-form valuation identities against norm computations",
        oracle_ok && all_pass(&c7) && all_pass(&c7b) && elapsed7 < Duration::from_secs(60),
        format!(
            "{oracle_count} oracle comparisons, {} suite identities{}",
            checked(&all7),
            failures(&all7)
        ),
        elapsed7,
    ));

    // 8
    let t8 = Instant::now();
    let d = 26;
    let integral = formal_group_law(5, d)
        .map(|f| f.is_p_integral(5))
        .unwrap_or(false);
    let assoc = group_law_associativity_check(5, d).unwrap_or(false);
    let roundtrip = log_inverse_roundtrip_check(5, d).unwrap_or(false);
    let c8 = cases(&reports, SuiteName::GaussLambda, "formal_group_law");
    let elapsed8 = t8.elapsed();
    lines.push(line(
        8,
        "formal group law integral and associative to degree p^2+1 for p=5, log inverse exact",
        integral && assoc && roundtrip && all_pass(&c8) && elapsed8 < Duration::from_secs(60),
        format!(
            "integral={integral}, associative={assoc}, roundtrip={roundtrip}, {} suite cases{}",
            c8.len(),
            failures(&c8)
        ),
        elapsed8,
    ));

    // 9
    let t9 = Instant::now();
    let again = run_all(&grid, &cfg).expect("suites run");
    let first: Vec<String> = reports.iter().map(SuiteReport::to_json_string).collect();
    let second: Vec<String> = again.iter().map(SuiteReport::to_json_string).collect();
    let bytes: usize = first.iter().map(String::len).sum();
    lines.push(line(
        9,
        "byte-identical reports across two runs with the same seed",
        first == second,
        format!("{} reports, {bytes} bytes", first.len()),
        t9.elapsed(),
    ));

    for l in &lines {
        println!("{}", l.text);
    }
    let passed = lines.iter().filter(|l| l.ok).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    if passed != lines.len() {
        std::process::exit(1);
    }
}
