//! J0, J1, J2 for x >= 0: power series in double-double below 16, Hankel's
//! asymptotic expansion above.

use crate::error::{Error, Result};

const SWITCH: f64 = 16.0;

/// Unevaluated sum hi + lo.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let t = self.1 + o.1 + s.1;
        let hi = s.0 + t;
        Dd(hi, t - (hi - s.0))
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        let lo = e + self.0 * o.1 + self.1 * o.0;
        let hi = p + lo;
        Dd(hi, lo - (hi - p))
    }

    fn div_f(self, d: f64) -> Dd {
        let q1 = self.0 / d;
        let r = Dd(self.0, self.1).add(Dd(-q1 * d, -q1.mul_add(d, -q1 * d)));
        let q2 = r.0 / d;
        let hi = q1 + q2;
        Dd(hi, q2 - (hi - q1))
    }
}

/// sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)
fn series(n: u32, x: f64) -> f64 {
    let h = x / 2.0;
    let mut t = Dd(1.0, 0.0);
    for i in 1..=n {
        t = t.mul(Dd(h, 0.0)).div_f(i as f64);
    }
    let p = x * x;
    let y = Dd(-p, -x.mul_add(x, -p)).div_f(4.0);
    let mut sum = t;
    let mut k = 0u32;
    loop {
        k += 1;
        t = t.mul(y).div_f((k * (k + n)) as f64);
        sum = sum.add(t);
        if t.0.abs() < 1e-34 || (t.0.abs() < 1e-18 * sum.0.abs().max(1e-300)) && k > 3 {
            break;
        }
    }
    sum.0 + sum.1
}

/// sqrt(2 / (pi x)) (P cos chi - Q sin chi), chi = x - (2n + 1) pi / 4.
fn hankel(n: u32, x: f64) -> f64 {
    let mu = (4 * n * n) as f64;
    let (mut p, mut q) = (0.0, 0.0);
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0u32;
    loop {
        let a = term.abs();
        if a > prev || a < 1e-17 {
            break;
        }
        prev = a;
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
        k += 1;
    }
    let (s, c) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // cos and sin of x - (2n+1) pi / 4 by angle addition, avoiding a large
    // argument reduction on a shifted x.
    let (cc, ss) = match n % 4 {
        0 => ((c + s) * r, (s - c) * r),
        1 => ((s - c) * r, (-s - c) * r),
        2 => ((-c - s) * r, (c - s) * r),
        _ => ((c - s) * r, (s + c) * r),
    };
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cc - q * ss)
}

fn jn(n: u32, x: f64) -> f64 {
    if x < SWITCH {
        series(n, x)
    } else {
        hankel(n, x)
    }
}

fn check(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Bessel argument {x} must be finite and >= 0")))
    }
}

pub fn bessel_j0(x: f64) -> Result<f64> {
    check(x)?;
    Ok(jn(0, x))
}

pub fn bessel_j1(x: f64) -> Result<f64> {
    check(x)?;
    Ok(jn(1, x))
}

pub fn bessel_j2(x: f64) -> Result<f64> {
    check(x)?;
    Ok(jn(2, x))
}

/// J1 without the argument check, for hot loops over known-good x.
#[inline]
pub(crate) fn j1(x: f64) -> f64 {
    jn(1, x)
}

#[inline]
pub(crate) fn j2(x: f64) -> f64 {
    jn(2, x)
}
