use std::collections::HashMap;
use std::sync::OnceLock;

use murmur_core::arith::{gcd, is_prime, primes_up_to};
use murmur_core::curves::{count_curves, disc_quantity, enumerate_curves, is_minimal, HeightBound};
use murmur_core::frobenius::{
    a_prime_power, an_stream, an_vec, ap_bsgs, ap_naive, CoefficientStreamSpec, StreamMode,
};
use murmur_core::grid::WindowGrid;
use murmur_core::lhs::{accumulate_sums, compute_records, lhs_aggregate, CurveRecord, CurveRecordFile, CurveSet, PFilter, RecordHeader};
use murmur_core::localfactors::brute::{local_type_measures, LocalType};
use murmur_core::localfactors::{local_factor, Flavor, LocalFactorTable};
use murmur_core::reduction::{global_invariants, ReductionKind};
use murmur_core::rhs::{build_tables, Variant};
use murmur_core::CurveSeed;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn seeds(range: i64) -> impl Strategy<Value = CurveSeed> {
    (-range..=range, -range..=range)
        .prop_filter("singular or non-minimal", |&(a, b)| disc_quantity(a, b) != 0 && is_minimal(a, b))
        .prop_map(|(a, b)| CurveSeed::new(a, b).unwrap())
}

fn primes_in(lo: u64, hi: u64) -> impl Strategy<Value = u64> {
    (lo..hi).prop_map(|mut n| {
        while !is_prime(n) {
            n += 1;
        }
        n
    })
}

fn good(s: &CurveSeed, p: u64) -> bool {
    global_invariants(s).unwrap().local(p).is_none()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(cases) }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn hasse_bound(s in seeds(10_000), p in primes_in(5, 1_000_000)) {
        prop_assume!(good(&s, p));
        let a = ap_bsgs(&s, p).unwrap();
        prop_assert!((a * a) as u64 <= 4 * p, "a_{p} = {a}");
    }

    #[test]
    fn prime_power_growth(p in primes_in(2, 2000), t in 0.0f64..1.0, nu in 0u32..8) {
        let w = (2.0 * (p as f64).sqrt()).floor() as i64;
        let ap = -w + (t * (2 * w + 1) as f64) as i64;
        let v = a_prime_power(ap, p, nu, true);
        prop_assert!((v.unsigned_abs() as f64) <= (nu + 1) as f64 * (p as f64).powf(nu as f64 / 2.0) + 1e-6);

        // p^{nu/2} U_nu(ap / 2 sqrt p) by the Chebyshev recurrence.
        let x = ap as f64 / (2.0 * (p as f64).sqrt());
        let (mut u0, mut u1) = (1.0, 2.0 * x);
        for _ in 0..nu {
            (u0, u1) = (u1, 2.0 * x * u1 - u0);
        }
        let expect = (p as f64).powf(nu as f64 / 2.0) * u0;
        prop_assert!((v as f64 - expect).abs() <= 1e-9 * expect.abs().max(1.0));
    }

    #[test]
    fn an_is_multiplicative(s in seeds(300), m in 1u64..200, n in 1u64..200) {
        prop_assume!(gcd(m, n) == 1);
        let inv = global_invariants(&s).unwrap();
        let a = an_vec(&s, &inv, m * n).unwrap();
        prop_assert_eq!(a[(m * n) as usize], a[m as usize] * a[n as usize]);
    }

    #[test]
    fn reduction_kinds_follow_conductor(s in seeds(5_000)) {
        let inv = global_invariants(&s).unwrap();
        let d = disc_quantity(s.a, s.b);
        for p in primes_up_to(50) {
            let e = murmur_core::arith::valuation(inv.n as i128, p);
            let kind = inv.local(p).map(|l| l.kind).unwrap_or(ReductionKind::Good);
            match kind {
                ReductionKind::Good => prop_assert_eq!(e, 0),
                ReductionKind::SplitMult | ReductionKind::NonsplitMult => prop_assert_eq!(e, 1),
                ReductionKind::Additive => prop_assert!(e >= 2),
            }
        }
        for l in &inv.locals {
            prop_assert!(d % l.p as i128 == 0 || l.p <= 3, "p = {} does not divide 4A^3 + 27B^2", l.p);
        }
    }

    #[test]
    fn bins_partition_exactly(n in 1u64..1_000_000, big_n in 1u64..100_000, r in 1u64..3000, num in 1u64..8, extra in 0u64..8) {
        let den = num + extra;
        let g = WindowGrid::new(num, den, r).unwrap();
        match g.bin(n, big_n) {
            // j/r < n/(N u_max) <= (j+1)/r, all in integers.
            Some(j) => {
                let lhs = n as u128 * r as u128 * den as u128;
                let scale = num as u128 * big_n as u128;
                prop_assert!(j < r);
                prop_assert!(j as u128 * scale < lhs && lhs <= (j as u128 + 1) * scale);
            }
            None => prop_assert!(n > g.n_max(big_n)),
        }
    }

    #[test]
    fn window_sums_partition_the_filtered_total(s in seeds(12), r in 1u64..50, pi in 0usize..4) {
        let plist = [PFilter::Coprime(1), PFilter::Coprime(2), PFilter::Coprime(7), PFilter::Prime];
        let inv = global_invariants(&s).unwrap();
        prop_assume!(inv.n <= 30_000);
        let grid = WindowGrid::unit(r).unwrap();
        let m = accumulate_sums(&s, &inv, &grid, &plist).unwrap();
        let mode = match plist[pi] {
            PFilter::Coprime(p) => StreamMode::CoprimeTo(p),
            PFilter::Prime => StreamMode::Prime,
        };
        let mut total = 0i64;
        an_stream(&s, &inv, CoefficientStreamSpec { n_max: inv.n, mode }, |_, a| total += a).unwrap();
        prop_assert_eq!(m.row(pi).iter().sum::<i64>(), inv.eps as i64 * total);
    }

    #[test]
    fn coprime_filters_nest(s in seeds(200), p in 1u64..40, extra in 0u64..40) {
        let inv = global_invariants(&s).unwrap();
        let count = |p| {
            let mut c = 0u64;
            an_stream(&s, &inv, CoefficientStreamSpec { n_max: 3000, mode: StreamMode::CoprimeTo(p) }, |_, _| c += 1).unwrap();
            c
        };
        prop_assert!(count(p + extra) <= count(p));
    }

    #[test]
    fn odd_nu_vanishes(p in primes_in(2, 200), k in 0u32..8, f in 0usize..3) {
        let flavor = [Flavor::Plain, Flavor::Hat, Flavor::Tilde][f];
        prop_assert!(local_factor(p, 2 * k + 1, flavor).is_zero());
    }

    #[test]
    fn tables_are_multiplicative(m in 1u64..46, n in 1u64..46, c in 0usize..4, tilde in any::<bool>()) {
        prop_assume!(gcd(m, n) == 1);
        let cutoff = [Some(1), Some(2), Some(16), None][c];
        let variant = if tilde { Variant::Tilde } else { Variant::Hat };
        let t = build_tables(2048, cutoff, variant, &mut LocalFactorTable::new()).unwrap();
        let (m, n, mn) = (m as usize, n as usize, (m * n) as usize);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
        prop_assert!(close(t.ell[mn], t.ell[m] * t.ell[n]));
        prop_assert!(close(t.psi[mn], t.psi[m] * t.psi[n]));
        prop_assert_eq!(t.mu[mn], t.mu[m] * t.mu[n]);
    }
}

fn small_records() -> &'static (RecordHeader, Vec<CurveRecord>) {
    static CELL: OnceLock<(RecordHeader, Vec<CurveRecord>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let seeds: Vec<CurveSeed> = enumerate_curves(HeightBound(300)).unwrap().take(40).collect();
        let grid = WindowGrid::unit(20).unwrap();
        let plist = [PFilter::Coprime(1), PFilter::Prime];
        (RecordHeader::new(&grid, &plist), compute_records(&seeds, &grid, &plist).unwrap())
    })
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn bsgs_agrees_with_naive_below_ten_thousand(s in seeds(1_000_000)) {
        for p in primes_up_to(10_000).into_iter().filter(|&p| p > 3) {
            if disc_quantity(s.a, s.b) % p as i128 == 0 {
                continue;
            }
            prop_assert_eq!(ap_bsgs(&s, p).unwrap(), ap_naive(&s, p).unwrap(), "p = {}", p);
        }
    }

    #[test]
    fn aggregation_ignores_curve_order(perm in Just((0..40usize).collect::<Vec<_>>()).prop_shuffle()) {
        let (header, rows) = small_records().clone();
        let plist = [PFilter::Coprime(1), PFilter::Prime];
        let shuffled: Vec<_> = perm.iter().map(|&i| rows[i].clone()).collect();
        let a = CurveRecordFile { header: header.clone(), rows };
        let b = CurveRecordFile { header, rows: shuffled };
        for p in plist {
            let x = lhs_aggregate(&a, p, u64::MAX, CurveSet::All).unwrap();
            let y = lhs_aggregate(&b, p, u64::MAX, CurveSet::All).unwrap();
            prop_assert!(x.iter().zip(&y).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
    }
}

#[test]
fn enumeration_invariants() {
    for s in enumerate_curves(HeightBound(1 << 12)).unwrap() {
        assert!(disc_quantity(s.a, s.b) != 0 && is_minimal(s.a, s.b) && s.height() <= 1 << 12);
    }
    let mut last = 0;
    for x in (0..=4000u128).step_by(37) {
        let c = count_curves(HeightBound(x)).unwrap();
        assert!(c >= last);
        last = c;
    }
}

fn class_counts(x: u128, ma: i64, mb: i64) -> (HashMap<(i64, i64), u64>, u64) {
    let mut h = HashMap::new();
    let mut total = 0;
    for s in enumerate_curves(HeightBound(x)).unwrap() {
        *h.entry((s.a.rem_euclid(ma), s.b.rem_euclid(mb))).or_insert(0) += 1;
        total += 1;
    }
    (h, total)
}

#[test]
fn congruence_classes_have_the_predicted_density() {
    // Full resolution (a mod 2^4, b mod 2^6) needs both ranges to be long
    // compared with the moduli, which X = 2^26 gives.
    let (h, total) = class_counts(1 << 26, 16, 64);
    let expect = 1.0 / (2f64.powi(10) * (1.0 - 2f64.powi(-10)));
    for a in 0..16 {
        for b in 0..64 {
            let c = h.get(&(a, b)).copied().unwrap_or(0);
            if a == 0 && b == 0 {
                assert_eq!(c, 0);
                continue;
            }
            let f = c as f64 / total as f64;
            assert!((f / expect - 1.0).abs() < 0.1, "class ({a}, {b}): {f} vs {expect}");
        }
    }

    // For q = 3, 5 the classes mod q^4, q^6 outgrow any enumerable range;
    // summing the fine classes over residues mod q gives
    // q^-2 / (1 - q^-10) off the origin and (q^-2 - q^-10) / (1 - q^-10) on it.
    for q in [2i64, 3, 5] {
        let (h, total) = class_counts(1 << 20, q, q);
        let qf = q as f64;
        let z = 1.0 - qf.powi(-10);
        for a in 0..q {
            for b in 0..q {
                let f = h[&(a, b)] as f64 / total as f64;
                let e = if (a, b) == (0, 0) { (qf.powi(-2) - qf.powi(-10)) / z } else { qf.powi(-2) / z };
                assert!((f / e - 1.0).abs() < 0.1, "q = {q}, class ({a}, {b}): {f} vs {e}");
            }
        }
        let (fine, _) = class_counts(1 << 20, q.pow(4), q.pow(6));
        assert!(!fine.contains_key(&(0, 0)));
    }
}

#[test]
fn good_measure_matches_hat_at_zero() {
    for p in [2u64, 3, 5, 7] {
        let m = local_type_measures(p);
        let good: BigRational = m.iter().filter(|(k, _)| matches!(k, LocalType::Good(_))).map(|(_, v)| v.clone()).sum();
        let scale = BigRational::one() - BigRational::new(1.into(), num_bigint::BigInt::from(p).pow(10));
        assert_eq!(local_factor(p, 0, Flavor::Hat), good / scale, "p = {p}");
    }
}
