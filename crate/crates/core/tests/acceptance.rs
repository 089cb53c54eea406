//! One line per acceptance criterion. Run with
//! `cargo test -p murmur-core --test acceptance`.
//!
//! The end-to-end comparison is opt-in: set MURMUR_X16_RECORDS to a record
//! file written by `murmur sums --height-bound 65536 --r 2000 --plist 1`
//! (or `murmur run --config configs/compare_x16_desk.toml`), or MURMUR_X16=1 to
//! compute the records here (about an hour on one core).

use std::collections::HashMap;
use std::time::Instant;

use murmur_core::arith::{gcd, primes_up_to};
use murmur_core::curves::{count_curves, enumerate_curves, HeightBound};
use murmur_core::frobenius::{a_prime_power, an_vec, ap_bsgs, ap_naive};
use murmur_core::grid::WindowGrid;
use murmur_core::lhs::{compute_records, lhs_aggregate, read_records, shard_seeds, CurveRecordFile, CurveSet, PFilter, RecordHeader};
use murmur_core::localfactors::brute::{definition_value, local_type_measures};
use murmur_core::localfactors::{hecke_trace_sum, local_factor, moduli_sum, Flavor, LocalFactorTable, Subset};
use murmur_core::reduction::global_invariants;
use murmur_core::rhs::voronoi::{voronoi_check, Bump};
use murmur_core::rhs::{bessel_j1, build_tables, convergence_in_b, convergence_in_p, max_abs_diff, rhs_vector, Density, Variant};
use murmur_core::CurveSeed;
use num_bigint::BigInt;
use num_rational::BigRational;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Fails for a reason recorded with the criterion; does not fail the run.
    Known(String),
    Skip(String),
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, name: &str, start: Instant, o: Outcome) {
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match o {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                self.failed += 1;
                ("FAIL", d)
            }
            Outcome::Known(d) => ("FAIL", format!("known: {d}")),
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {id:<3} {tag}  {name} [{secs:.1}s] {detail}");
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn curve_counts() -> Outcome {
    let start = Instant::now();
    let got: Vec<usize> = [16, 17, 18].iter().map(|&e| count_curves(HeightBound(1 << e)).unwrap()).collect();
    let secs = start.elapsed().as_secs_f64();
    verdict(got == [5042, 9014, 15936] && secs < 1.0, format!("counts {got:?} in {secs:.3}s (limit 1s)"))
}

const B_CONVERGENCE: [(u64, [(u64, f64); 3]); 3] = [
    (1 << 10, [(2, 0.0344), (4, 0.0512), (1024, 0.0602)]),
    (1 << 11, [(2, 0.0063), (4, 0.0064), (1024, 0.0171)]),
    (1 << 12, [(2, 0.0170), (4, 0.0211), (1024, 0.0220)]),
];

fn b_convergence() -> Outcome {
    let grid = WindowGrid::unit(100).unwrap();
    let mut lft = LocalFactorTable::new();
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (b, row) in B_CONVERGENCE {
        for (p, want) in row {
            let got = convergence_in_b(&grid, Some(p), b, Variant::Hat, &mut lft).unwrap();
            worst = worst.max((got - want).abs());
            cells.push(format!("{got:.4}"));
        }
    }
    verdict(worst <= 0.002, format!("max |got - table| = {worst:.5} (tol 0.002); got {}", cells.join(" ")))
}

/// tau(n) for n <= m from q prod (1 - q^n)^24.
fn ramanujan_tau(m: usize) -> Vec<i64> {
    let mut c = vec![0i64; m + 1];
    c[1] = 1;
    for n in 1..=m {
        for _ in 0..24 {
            for i in (n..=m).rev() {
                c[i] -= c[i - n];
            }
        }
    }
    c
}

fn cross_route() -> Outcome {
    let tau = ramanujan_tau(3);
    let mut bad = Vec::new();
    for p in primes_up_to(31) {
        for nu in [10u32, 12, 14, 16] {
            let lhs = moduli_sum(p, nu, Subset::All, true).unwrap();
            let rhs = BigRational::from(-hecke_trace_sum(p, nu + 2).unwrap());
            if lhs != rhs {
                bad.push(format!("p={p} nu={nu}"));
            }
        }
    }
    let t2 = hecke_trace_sum(2, 12).unwrap();
    let t3 = hecke_trace_sum(3, 12).unwrap();
    let oracle = t2 == BigInt::from(tau[2]) && t3 == BigInt::from(tau[3]) && tau[2] == -24 && tau[3] == 252;
    verdict(
        bad.is_empty() && oracle,
        format!("44 identities exact, {} mismatches; T(2)={t2} T(3)={t3} vs tau {} {}", bad.len(), tau[2], tau[3]),
    )
}

fn definitions() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in [2u64, 3, 5, 7] {
        let m = local_type_measures(p);
        for nu in (0..=12).step_by(2) {
            for flavor in [Flavor::Plain, Flavor::Hat, Flavor::Tilde] {
                checked += 1;
                if definition_value(&m, p, nu, flavor) != local_factor(p, nu, flavor) {
                    bad.push(format!("{p},{nu},{}", flavor.name()));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} exact rational comparisons, mismatches {bad:?}"))
}

fn voronoi() -> Outcome {
    let w = Bump::new(0.2, 1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut excluded = Vec::new();
    let mut errors = Vec::new();
    let mut ran = 0;
    for (a, b) in [(0, 1), (-1, 0), (1, 1)] {
        let s = CurveSeed::new(a, b).unwrap();
        let n = global_invariants(&s).unwrap().n;
        for q in [1u64, 3] {
            if gcd(q, n) != 1 {
                excluded.push(format!("({a},{b}) q={q} N={n}"));
                continue;
            }
            match voronoi_check(&s, q, 1, &w, n, 3000 * q * q) {
                Ok(r) => {
                    ran += 1;
                    worst = worst.max(r.diff);
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    let detail = format!("{ran}/6 cases, max |diff| = {worst:.2e} (tol 1e-5)");
    if worst >= 1e-5 || !errors.is_empty() {
        Outcome::Fail(format!("{detail}; errors {errors:?}"))
    } else if !excluded.is_empty() {
        Outcome::Known(format!("{detail}; not evaluable, gcd(q, N) > 1: {}", excluded.join(", ")))
    } else {
        Outcome::Pass(detail)
    }
}

fn reduction_fixture() -> Outcome {
    let text = include_str!("data/reduction_h10000.csv");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let expected: HashMap<(i64, i64), (u64, i8)> = r
        .records()
        .map(|x| {
            let f = x.unwrap();
            ((f[0].parse().unwrap(), f[1].parse().unwrap()), (f[2].parse().unwrap(), f[3].parse().unwrap()))
        })
        .collect();
    let seeds: Vec<CurveSeed> = enumerate_curves(HeightBound(10_000)).unwrap().collect();
    let agree = seeds
        .iter()
        .filter(|s| {
            let g = global_invariants(s).unwrap();
            expected.get(&(s.a, s.b)) == Some(&(g.n, g.eps))
        })
        .count();
    verdict(
        agree == seeds.len() && seeds.len() == expected.len(),
        format!("{agree}/{} curves agree on (N, eps); fixture has {}", seeds.len(), expected.len()),
    )
}

fn x16_comparison() -> Outcome {
    const EXPECTED: f64 = 0.2271;
    const TOL: f64 = 0.05;
    let grid = WindowGrid::unit(2000).unwrap();
    let file = if let Ok(path) = std::env::var("MURMUR_X16_RECORDS") {
        read_records(path.as_ref(), None).unwrap()
    } else if std::env::var("MURMUR_X16").is_ok() {
        let plist = [PFilter::Coprime(1)];
        let seeds = shard_seeds(HeightBound(1 << 16), (0, 1)).unwrap();
        CurveRecordFile { header: RecordHeader::new(&grid, &plist), rows: compute_records(&seeds, &grid, &plist).unwrap() }
    } else {
        return Outcome::Skip("opt-in: set MURMUR_X16_RECORDS or MURMUR_X16=1".into());
    };
    if file.header.r != 2000 {
        return Outcome::Fail(format!("record grid has r = {}, need 2000", file.header.r));
    }
    let lhs = lhs_aggregate(&file, PFilter::Coprime(1), 1 << 16, CurveSet::All).unwrap();
    let rhs = rhs_vector(&grid, Some(1), 1 << 13, Variant::Hat, &mut LocalFactorTable::new()).unwrap();
    let mean = lhs.iter().zip(&rhs.values).map(|(a, b)| (a - b).abs()).sum::<f64>() / lhs.len() as f64;
    verdict(
        (mean - EXPECTED).abs() <= TOL,
        format!("mean |LHS - RHS'| = {mean:.4} vs {EXPECTED} (tol {TOL}, B = 2^13, r = 2000, {} curves)", file.rows.len()),
    )
}

/// Shape of the desk-scale density at P = 1, read off a 50-window average:
/// a positive first hump, sign changes near the zeros of J1(4 pi sqrt u),
/// and whether the bump heights decay.
fn density_shape() -> Outcome {
    let grid = WindowGrid::unit(2000).unwrap();
    let dense = Density::new(1 << 13, Some(1), Variant::Hat, &mut LocalFactorTable::new()).unwrap().vector(&grid);
    let v: Vec<f64> = dense.values.chunks(40).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let width = 1.0 / v.len() as f64;
    let mut changes = Vec::new();
    let mut bumps = vec![0.0f64];
    for j in 1..v.len() {
        if v[j].signum() != v[j - 1].signum() {
            changes.push(j as f64 * width);
            bumps.push(0.0);
        }
        let b = bumps.last_mut().unwrap();
        if v[j].abs() > b.abs() {
            *b = v[j];
        }
    }
    bumps[0] = bumps[0].max(v[0]);
    // Zeros of J1 divided by 4 pi, squared.
    let zeros: Vec<f64> = [3.8317059702075123, 7.015586669815619, 10.173468135062722]
        .iter()
        .map(|z| (z / (4.0 * std::f64::consts::PI)).powi(2))
        .collect();
    let located = changes.len() == zeros.len() && changes.iter().zip(&zeros).all(|(c, z)| (c - z).abs() <= 0.03);
    let hump = v[0] > 0.0 && bumps[0] > 0.0;
    let damped = bumps.windows(2).all(|w| w[1].abs() < w[0].abs());
    let shown: Vec<String> = bumps.iter().map(|b| format!("{b:.2}")).collect();
    let at: Vec<String> = changes.iter().map(|c| format!("{c:.3}")).collect();
    let want: Vec<String> = zeros.iter().map(|z| format!("{z:.3}")).collect();
    let detail = format!(
        "hump {hump}; sign changes at {} (J1 zeros {}); bump heights {}",
        at.join(" "),
        want.join(" "),
        shown.join(" ")
    );
    if !(hump && located) {
        Outcome::Fail(detail)
    } else if !damped {
        Outcome::Known(format!("{detail}; heights grow with u (the sqrt(u) J1 envelope rises like u^(1/4)), so no damping on (0, 1]"))
    } else {
        Outcome::Pass(detail)
    }
}

fn properties() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let seeds: Vec<CurveSeed> = enumerate_curves(HeightBound(1 << 14)).unwrap().step_by(97).collect();

    let hasse = seeds.iter().all(|s| {
        let inv = global_invariants(s).unwrap();
        primes_up_to(20_000).into_iter().filter(|&p| p > 3 && inv.local(p).is_none()).step_by(50).all(|p| {
            let a = ap_bsgs(s, p).unwrap();
            (a * a) as u64 <= 4 * p
        })
    });
    check("hasse", hasse);

    let growth = primes_up_to(200).into_iter().all(|p| {
        let w = (2.0 * (p as f64).sqrt()).floor() as i64;
        (-w..=w).all(|ap| {
            (0..8u32).all(|nu| {
                a_prime_power(ap, p, nu, true).unsigned_abs() as f64 <= (nu + 1) as f64 * (p as f64).powf(nu as f64 / 2.0) + 1e-6
            })
        })
    });
    check("prime power growth", growth);

    let bsgs = seeds.iter().take(10).all(|s| {
        let inv = global_invariants(s).unwrap();
        primes_up_to(10_000)
            .into_iter()
            .filter(|&p| p > 3 && inv.local(p).is_none())
            .all(|p| ap_bsgs(s, p).unwrap() == ap_naive(s, p).unwrap())
    });
    check("bsgs = naive", bsgs);

    let mult = seeds.iter().take(10).all(|s| {
        let a = an_vec(s, &global_invariants(s).unwrap(), 4000).unwrap();
        (1..64u64).all(|m| (1..64u64).all(|n| gcd(m, n) != 1 || a[(m * n) as usize] == a[m as usize] * a[n as usize]))
    });
    check("a_n multiplicative", mult);

    let mut lft = LocalFactorTable::new();
    let t = build_tables(1024, Some(16), Variant::Hat, &mut lft).unwrap();
    let tables = (1..32usize).all(|m| {
        (1..32usize).all(|n| {
            gcd(m as u64, n as u64) != 1
                || ((t.ell[m * n] - t.ell[m] * t.ell[n]).abs() < 1e-12
                    && (t.psi[m * n] - t.psi[m] * t.psi[n]).abs() < 1e-12 * t.psi[m * n].abs().max(1.0)
                    && t.mu[m * n] == t.mu[m] * t.mu[n])
        })
    });
    check("tables multiplicative", tables);

    let odd = primes_up_to(100).into_iter().all(|p| {
        (1..16u32).step_by(2).all(|nu| [Flavor::Plain, Flavor::Hat, Flavor::Tilde].iter().all(|&f| local_factor(p, nu, f) == BigRational::from(BigInt::from(0))))
    });
    check("odd nu vanishing", odd);

    let g = WindowGrid::new(3, 4, 777).unwrap();
    let bins = (1..3000u64).all(|big_n| {
        let mut per = vec![0u64; 777];
        for n in 1..=g.n_max(big_n) {
            per[g.bin(n, big_n).unwrap() as usize] += 1;
        }
        per.iter().sum::<u64>() == g.n_max(big_n) && g.bin(g.n_max(big_n) + 1, big_n).is_none()
    });
    check("bin partition", bins);

    let grid = WindowGrid::unit(100).unwrap();
    let at_b = convergence_in_p(&grid, 256, 256, Variant::Hat, &mut lft).unwrap() == 0.0;
    let x = rhs_vector(&grid, Some(256), 256, Variant::Hat, &mut lft).unwrap();
    let y = rhs_vector(&grid, None, 256, Variant::Hat, &mut lft).unwrap();
    check("convergence_in_P(P=B) = 0", at_b && max_abs_diff(&x.values, &y.values) == 0.0);

    let golden = [
        (0.5, 0.242268457674873886),
        (1.0, 0.440050585744933516),
        (2.0, 0.576724807756873387),
        (5.0, -0.327579137591465222),
        (10.0, 0.0434727461688614367),
        (16.0, 0.0903971756613041862),
        (20.0, 0.0668331241758500456),
        (50.0, -0.0975118281251751377),
        (100.0, -0.0771453520141121580),
        (1000.0, 0.00472831190708952392),
    ];
    check("J1 golden", golden.iter().all(|&(x, y)| (bessel_j1(x).unwrap() - y).abs() < 1e-10));

    if failures.is_empty() {
        Outcome::Pass("hasse, growth, bsgs, a_n and table multiplicativity, odd nu, bins, P = B, J1 (full suites in tests/properties.rs)".into())
    } else {
        Outcome::Fail(format!("failed: {failures:?}"))
    }
}

fn main() {
    let mut report = Report { failed: 0 };
    type Check = fn() -> Outcome;
    let criteria: [(&str, &str, Check); 9] = [
        ("1", "curve counts", curve_counts),
        ("2", "B convergence table, desk rows", b_convergence),
        ("3", "moduli sum = -Hecke trace, tau oracle", cross_route),
        ("4", "closed forms = defining integrals", definitions),
        ("5", "Voronoi identity", voronoi),
        ("6", "reduction against database fixture", reduction_fixture),
        ("7", "LHS vs RHS' at X = 2^16, P = 1", x16_comparison),
        ("7s", "density shape at desk scale", density_shape),
        ("8", "property checks", properties),
    ];
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        report.line(id, name, start, o);
    }
    if report.failed > 0 {
        eprintln!("{} criteria failed", report.failed);
        std::process::exit(1);
    }
}
