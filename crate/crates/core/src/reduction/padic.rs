//! Integers for Tate's algorithm: either exact (i128, checked) or known
//! only modulo a power of p with tracked precision.

use crate::arith::reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarError {
    /// The answer depends on digits beyond the known precision.
    Imprecise,
    Overflow,
}

type R<T> = std::result::Result<T, ScalarError>;

const EXACT: u32 = u32::MAX;

/// An element of Z (prec = EXACT) or of Z/p^prec Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zp {
    v: i128,
    prec: u32,
    p: u64,
}

/// Largest k with p^k < 2^62, so products of residues fit in i128.
pub fn precision_cap(p: u64) -> u32 {
    let mut k = 0;
    let mut q: u128 = 1;
    while q * (p as u128) < (1u128 << 62) {
        q *= p as u128;
        k += 1;
    }
    k
}

fn ppow(p: u64, k: u32) -> i128 {
    (p as i128).pow(k)
}

impl Zp {
    pub fn exact(v: i128, p: u64) -> Self {
        Zp { v, prec: EXACT, p }
    }

    /// `v` known modulo p^prec (prec is clamped to the cap).
    pub fn approx(v: i128, prec: u32, p: u64) -> Self {
        let prec = prec.min(precision_cap(p));
        Zp { v: v.rem_euclid(ppow(p, prec)), prec, p }
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    /// The exact integer value.
    pub fn value(&self) -> i128 {
        debug_assert!(self.is_exact());
        self.v
    }

    pub fn constant(&self, c: i128) -> Self {
        Zp::exact(c, self.p)
    }

    /// Lower bound for the valuation, capped by the precision.
    fn vlo(&self) -> u32 {
        if self.v == 0 {
            return self.prec;
        }
        let mut v = self.v;
        let mut k = 0;
        let p = self.p as i128;
        while v % p == 0 {
            v /= p;
            k += 1;
        }
        k.min(self.prec)
    }

    fn with_prec(v: i128, prec: u32, p: u64) -> Self {
        if prec == EXACT {
            Zp::exact(v, p)
        } else {
            Zp::approx(v, prec, p)
        }
    }

    fn lift(&self, prec: u32) -> i128 {
        if self.is_exact() && prec != EXACT {
            self.v.rem_euclid(ppow(self.p, prec.min(precision_cap(self.p))))
        } else {
            self.v
        }
    }

    pub fn add(self, o: Self) -> R<Self> {
        let prec = self.prec.min(o.prec);
        if prec == EXACT {
            return self.v.checked_add(o.v).map(|v| Zp::exact(v, self.p)).ok_or(ScalarError::Overflow);
        }
        Ok(Zp::approx(self.lift(prec) + o.lift(prec), prec, self.p))
    }

    pub fn neg(self) -> Self {
        Zp::with_prec(-self.v, self.prec, self.p)
    }

    pub fn sub(self, o: Self) -> R<Self> {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> R<Self> {
        if self.is_exact() && o.is_exact() {
            return self.v.checked_mul(o.v).map(|v| Zp::exact(v, self.p)).ok_or(ScalarError::Overflow);
        }
        let pa = self.prec.saturating_add(o.vlo());
        let pb = o.prec.saturating_add(self.vlo());
        let prec = pa.min(pb).min(precision_cap(self.p));
        Ok(Zp::approx(self.lift(prec) * o.lift(prec), prec, self.p))
    }

    pub fn mul_i(self, c: i128) -> R<Self> {
        self.mul(self.constant(c))
    }

    /// Does p^k divide the value?
    pub fn divisible(&self, k: u32) -> R<bool> {
        if self.is_exact() {
            return Ok(self.v % ppow(self.p, k) == 0);
        }
        if k <= self.prec {
            Ok(self.v % ppow(self.p, k) == 0)
        } else if self.v != 0 {
            Ok(false)
        } else {
            Err(ScalarError::Imprecise)
        }
    }

    /// Exact division by p^k; the caller guarantees divisibility.
    pub fn div_pk(self, k: u32) -> R<Self> {
        if !self.divisible(k)? {
            panic!("div_pk: value not divisible by p^{k}");
        }
        if self.is_exact() {
            return Ok(Zp::exact(self.v / ppow(self.p, k), self.p));
        }
        let prec = self.prec - k;
        Ok(Zp::approx(self.v / ppow(self.p, k), prec, self.p))
    }

    /// Value mod p^k in [0, p^k).
    pub fn residue_pk(&self, k: u32) -> R<i128> {
        if !self.is_exact() && k > self.prec {
            return Err(ScalarError::Imprecise);
        }
        Ok(self.v.rem_euclid(ppow(self.p, k)))
    }

    pub fn residue(&self) -> R<u64> {
        Ok(self.residue_pk(1)? as u64)
    }

    /// Exact valuation; errors when the value is indistinguishable from 0.
    pub fn valuation(&self) -> R<u32> {
        if self.v == 0 {
            return Err(ScalarError::Imprecise);
        }
        Ok(self.vlo())
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

/// Residue of an exact integer modulo p as an exact scalar.
pub fn small(v: i128, p: u64) -> Zp {
    Zp::exact(reduce(v, p) as i128, p)
}
