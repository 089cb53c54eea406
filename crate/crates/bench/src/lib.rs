//! Shared inputs for the benchmarks.

use murmur_core::arith::is_prime;
use murmur_core::CurveSeed;

/// A handful of curves with varied reduction behaviour.
pub fn sample_curves() -> Vec<CurveSeed> {
    [(1, 1), (-1, 0), (0, 1), (-7, 10), (12, -29), (-35, 98)]
        .into_iter()
        .map(|(a, b)| CurveSeed::new(a, b).unwrap())
        .collect()
}

/// The first prime at or above n.
pub fn prime_from(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}
