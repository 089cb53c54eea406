//! Numerical check of the Voronoi summation identity for one curve.

use std::f64::consts::PI;

use super::bessel::j1;
use super::quad::gauss_kronrod;
use crate::arith::invmod;
use crate::curves::CurveSeed;
use crate::error::{Error, Result};
use crate::frobenius::an_vec;
use crate::reduction::global_invariants;

/// W(u) = c exp(-1 / ((u - lo)(hi - u))) on (lo, hi), scaled to area `mass`.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    c: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64, mass: f64) -> Result<Self> {
        if !(0.0 < lo && lo < hi) {
            return Err(Error::InvalidArgument(format!("bump support ({lo}, {hi}) must lie in (0, inf)")));
        }
        let raw = Bump { lo, hi, c: 1.0 };
        let area = gauss_kronrod(&|u| raw.eval(u), lo, hi, 1e-15, 16);
        Ok(Bump { lo, hi, c: mass / area })
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= self.lo || u >= self.hi {
            return 0.0;
        }
        self.c * (-1.0 / ((u - self.lo) * (self.hi - u))).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VoronoiResult {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub conductor: u64,
}

/// Both sides of the identity, averaged over a and -a so they are real:
///
///   eps sum a_n n^{-1/2} W(n/N) cos(2 pi a n / q)
///     = sqrt(N) / q sum a_n n^{-1/2} cos(2 pi abar n / q) int 2 pi W(u) J1(4 pi sqrt(u n) / q) du
///
/// with abar the inverse of a N modulo q.
pub fn voronoi_check(seed: &CurveSeed, q: u64, a: i64, w: &Bump, n_cut_lhs: u64, n_cut_rhs: u64) -> Result<VoronoiResult> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let ar = a.rem_euclid(q as i64) as u64;
    if num_integer::gcd(ar, q) != 1 {
        return Err(Error::InvalidArgument(format!("gcd(a, q) = gcd({a}, {q}) != 1")));
    }
    let inv = global_invariants(seed)?;
    let n = inv.n;
    let abar = if q == 1 {
        0
    } else {
        invmod(ar * (n % q) % q, q).ok_or_else(|| {
            Error::InvalidArgument(format!("gcd(q, N) = gcd({q}, {n}) != 1, so a N has no inverse mod q"))
        })?
    };
    let coeffs = an_vec(seed, &inv, n_cut_lhs.max(n_cut_rhs))?;
    let e = |x: u64, k: u64| (2.0 * PI * ((x * k) % q) as f64 / q as f64).cos();

    let mut lhs = super::Kahan::default();
    for k in 1..=n_cut_lhs {
        let an = coeffs[k as usize];
        if an != 0 {
            lhs.add(an as f64 / (k as f64).sqrt() * w.eval(k as f64 / n as f64) * e(ar, k));
        }
    }
    let lhs = inv.eps as f64 * lhs.value();

    let mut rhs = super::Kahan::default();
    for k in 1..=n_cut_rhs {
        let an = coeffs[k as usize];
        if an == 0 {
            continue;
        }
        let c = 4.0 * PI * (k as f64).sqrt() / q as f64;
        // Substituting u = t^2 makes the oscillation uniform in t.
        let f = |t: f64| 2.0 * PI * w.eval(t * t) * j1(c * t) * 2.0 * t;
        let panels = 8 + (c * (w.hi.sqrt() - w.lo.sqrt()) / PI) as usize;
        let integral = gauss_kronrod(&f, w.lo.sqrt(), w.hi.sqrt(), 1e-15, panels);
        rhs.add(an as f64 / (k as f64).sqrt() * e(abar, k) * integral);
    }
    let rhs = (n as f64).sqrt() / q as f64 * rhs.value();
    Ok(VoronoiResult { lhs, rhs, diff: (lhs - rhs).abs(), conductor: n })
}
