//! Integral short Weierstrass curves y^2 = x^3 + Ax + B ordered by naive height.

use crate::arith::{icbrt, isqrt, primes_up_to};
use crate::error::{Error, Result};

/// A minimal, nonsingular short Weierstrass model E_{A,B}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveSeed {
    pub a: i64,
    pub b: i64,
}

impl CurveSeed {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if disc_quantity(a, b) == 0 {
            return Err(Error::Singular);
        }
        if !is_minimal(a, b) {
            return Err(Error::InvalidArgument(format!("({a}, {b}) is not minimal")));
        }
        Ok(CurveSeed { a, b })
    }

    pub fn height(&self) -> u128 {
        naive_height(self.a, self.b)
    }

    /// Position in the enumeration order: (|A|, sign, |B|, sign), + before -.
    pub fn order_key(&self) -> (u64, bool, u64, bool) {
        (self.a.unsigned_abs(), self.a < 0, self.b.unsigned_abs(), self.b < 0)
    }

    /// Weierstrass coefficients [a1, a2, a3, a4, a6].
    pub fn ainvs(&self) -> [i128; 5] {
        [0, 0, 0, self.a as i128, self.b as i128]
    }
}

/// 4A^3 + 27B^2.
pub fn disc_quantity(a: i64, b: i64) -> i128 {
    let (a, b) = (a as i128, b as i128);
    4 * a * a * a + 27 * b * b
}

/// max(4|A|^3, 27B^2).
pub fn naive_height(a: i64, b: i64) -> u128 {
    let a = a.unsigned_abs() as u128;
    let b = b.unsigned_abs() as u128;
    (4 * a * a * a).max(27 * b * b)
}

/// True iff no prime p has p^4 | A and p^6 | B. (0, 0) is not minimal.
pub fn is_minimal(a: i64, b: i64) -> bool {
    if a == 0 && b == 0 {
        return false;
    }
    let bound = if a != 0 {
        (a.unsigned_abs() as f64).powf(0.25) as u64 + 1
    } else {
        (b.unsigned_abs() as f64).powf(1.0 / 6.0) as u64 + 1
    };
    for p in primes_up_to(bound) {
        let (p4, p6) = (p.pow(4) as i64, p.pow(6) as i128);
        if a % p4 == 0 && (b as i128) % p6 == 0 {
            return false;
        }
    }
    true
}

/// Naive-height cutoff X.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeightBound(pub u128);

impl HeightBound {
    /// Largest |A| with 4|A|^3 <= X.
    pub fn a_max(&self) -> Result<i64> {
        let m = icbrt(self.0 / 4);
        i64::try_from(m).map_err(|_| Error::Overflow("height bound"))
    }

    /// Largest |B| with 27B^2 <= X.
    pub fn b_max(&self) -> Result<i64> {
        let q = self.0 / 27;
        let q = u64::try_from(q).map_err(|_| Error::Overflow("height bound"))?;
        Ok(isqrt(q) as i64)
    }
}

/// Every minimal nonsingular seed with naive height <= X, ordered
/// lexicographically by (|A|, sign A, |B|, sign B) with + before -.
pub fn enumerate_curves(x: HeightBound) -> Result<impl Iterator<Item = CurveSeed>> {
    let amax = x.a_max()?;
    let bmax = x.b_max()?;
    Ok(enumerate_a_range(0, amax, bmax))
}

/// The part of the enumeration with |A| in `lo..=hi`.
pub fn enumerate_a_range(lo: i64, hi: i64, bmax: i64) -> impl Iterator<Item = CurveSeed> {
    (lo..=hi)
        .flat_map(signed)
        .flat_map(move |a| (0..=bmax).flat_map(signed).map(move |b| (a, b)))
        .filter(|&(a, b)| disc_quantity(a, b) != 0 && is_minimal(a, b))
        .map(|(a, b)| CurveSeed { a, b })
}

fn signed(v: i64) -> impl Iterator<Item = i64> {
    let neg = if v == 0 { None } else { Some(-v) };
    std::iter::once(v).chain(neg)
}

/// #H(X).
pub fn count_curves(x: HeightBound) -> Result<usize> {
    Ok(enumerate_curves(x)?.count())
}
