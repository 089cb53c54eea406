//! Exact local factors l_{p,nu}, lhat_{p,nu}, ltilde_{p,nu}.
//!
//! Every Chebyshev value that appears is p^{nu/2} U_nu(s / (2 sqrt p)) for an
//! integer s, which is the integer [`cheb`]`(s, p, nu)`, so all factors are
//! exact rationals.

pub mod brute;
pub mod table;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{is_prime, legendre, mulmod, reduce};
use crate::error::{Error, Result};
pub use table::LocalFactorTable;

/// Which local factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Plain,
    Hat,
    Tilde,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Plain => "plain",
            Flavor::Hat => "hat",
            Flavor::Tilde => "tilde",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Flavor::Plain),
            "hat" => Ok(Flavor::Hat),
            "tilde" => Ok(Flavor::Tilde),
            _ => Err(Error::InvalidArgument(format!("unknown flavor {s}"))),
        }
    }
}

pub(crate) fn q(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// p^e as a rational, e may be negative.
fn pw(p: u64, e: i32) -> BigRational {
    let base = BigInt::from(p).pow(e.unsigned_abs());
    if e >= 0 {
        int(base)
    } else {
        q(1, base)
    }
}

/// x_nu with x_0 = 1, x_1 = s, x_k = s x_{k-1} - p x_{k-2}; equals
/// p^{nu/2} U_nu(s / (2 sqrt p)).
pub fn cheb(s: i64, p: u64, nu: u32) -> BigInt {
    let (mut a, mut b) = (BigInt::one(), BigInt::from(s));
    if nu == 0 {
        return a;
    }
    for _ in 1..nu {
        let c = &b * s - &a * p;
        a = b;
        b = c;
    }
    b
}

/// Number of reduced primitive forms of discriminant D < 0.
pub fn class_number(d: i64) -> Result<u64> {
    if d >= 0 || !(d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) {
        return Err(Error::InvalidArgument(format!("{d} is not a negative discriminant")));
    }
    let n = -d;
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if num_integer::gcd(num_integer::gcd(a, b), c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    Ok(h)
}

/// 6 H(n) for the Hurwitz class number H(n), n > 0: sum over f^2 | n of
/// h(-n/f^2) divided by half the unit count.
fn hurwitz6(n: i64) -> i64 {
    let mut s = 0;
    let mut f = 1;
    while f * f <= n {
        if n % (f * f) == 0 {
            let d = -n / (f * f);
            if d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1 {
                let h = class_number(d).unwrap() as i64;
                s += match d {
                    -3 => 2 * h,
                    -4 => 3 * h,
                    _ => 6 * h,
                };
            }
        }
        f += 1;
    }
    s
}

/// Dimension of the space of level one cusp forms of even weight k >= 4.
pub fn cusp_dimension(k: u32) -> u32 {
    if k % 12 == 2 {
        k / 12 - 1
    } else {
        k / 12
    }
}

/// Sum of a_p(f) over normalised eigenforms f of weight k for SL_2(Z).
///
/// Trace formula: elliptic terms s^2 < 4p carry cheb(s, p, k - 2) H(4p - s^2) / 2,
/// the hyperbolic terms s = +-(p + 1) carry (sgn s)^{k-2} / 2, and the
/// total is their negative sum.
pub fn hecke_trace_sum(p: u64, k: u32) -> Result<BigInt> {
    if k % 2 == 1 || k < 4 {
        return Err(Error::InvalidArgument(format!("weight {k} must be even and >= 4")));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if cusp_dimension(k) == 0 {
        return Ok(BigInt::zero());
    }
    Ok(trace_formula(p, k))
}

fn trace_formula(p: u64, k: u32) -> BigInt {
    let nu = k - 2;
    let mut sum6 = BigInt::zero();
    let mut s: i64 = 0;
    while (s * s) < 4 * p as i64 {
        let h6 = hurwitz6(4 * p as i64 - s * s);
        let mult = if s == 0 { 1 } else { 2 }; // s and -s agree for even nu
        sum6 += cheb(s, p, nu) * (h6 * mult);
        s += 1;
    }
    // -(sum6 / 12) - 1
    let (qt, r) = sum6.div_rem(&BigInt::from(12));
    assert!(r.is_zero(), "trace formula gave a non-integer");
    -qt - 1
}

/// Set of smooth curves summed by [`moduli_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    /// All smooth classes; nodal classes follow `include_nodal`.
    All,
    /// All smooth classes; nodal classes never included.
    SmoothOnly,
    Supersingular,
    Ordinary,
}

/// One weighted class of (possibly nodal) Weierstrass cubics over F_p.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPoint {
    pub ap: i64,
    pub nodal: bool,
    /// Sum of 1/|Aut| over isomorphism classes with this (ap, nodal).
    pub weight: BigRational,
}

fn count_points(a: [u64; 5], p: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut n = 1;
    for x in 0..p {
        let x2 = mulmod(x, x, p);
        let rhs = (mulmod(x2, x, p) + mulmod(a2, x2, p) + mulmod(a4, x, p) + a6) % p;
        for y in 0..p {
            let lhs = (mulmod(y, y, p) + mulmod(a1, mulmod(x, y, p), p) + mulmod(a3, y, p)) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// (is smooth, is nodal) for a model over F_p.
fn singularity(a: [u64; 5], p: u64) -> (bool, bool) {
    let [a1, a2, a3, a4, a6] = a.map(|v| v as i128);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = b2 * b2 - 24 * b4;
    let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
    let smooth = reduce(disc, p) != 0;
    (smooth, !smooth && reduce(c4, p) != 0)
}

/// Weighted classes of smooth and nodal cubics over F_p, found by brute
/// force: each isomorphism class of E occurs among all models with
/// frequency |G| / |Aut E|, where G is the group of coordinate changes.
pub fn moduli_points(p: u64) -> Result<Vec<ModuliPoint>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > 2000 {
        return Err(Error::InvalidArgument(format!("p = {p} is over the brute-force budget")));
    }
    let mut acc: std::collections::BTreeMap<(i64, bool), BigRational> = Default::default();
    let mut add = |ap: i64, nodal: bool, w: BigRational| {
        *acc.entry((ap, nodal)).or_insert_with(BigRational::zero) += w;
    };
    if p <= 3 {
        // All general models; |G| = (p - 1) p^3.
        let g = q(1, (p - 1) * p * p * p);
        for idx in 0..p.pow(5) {
            let mut a = [0u64; 5];
            let mut t = idx;
            for c in a.iter_mut() {
                *c = t % p;
                t /= p;
            }
            let (smooth, nodal) = singularity(a, p);
            if smooth || nodal {
                add(p as i64 + 1 - count_points(a, p), nodal, g.clone());
            }
        }
    } else {
        // Short models y^2 = x^3 + a x + b; |G| = p - 1 (x -> u^2 x).
        let mut chi = vec![-1i64; p as usize];
        chi[0] = 0;
        for x in 1..p {
            chi[mulmod(x, x, p) as usize] = 1;
        }
        let ap_of = |a: u64, b: u64| -> i64 {
            -(0..p).map(|x| chi[((mulmod(mulmod(x, x, p), x, p) + mulmod(a, x, p) + b) % p) as usize]).sum::<i64>()
        };
        let kind = |a: u64, b: u64| singularity([0, 0, 0, a, b], p);
        let w = q(1, p - 1);
        for b in 0..p {
            let (smooth, nodal) = kind(0, b);
            if smooth || nodal {
                add(ap_of(0, b), nodal, w.clone());
            }
        }
        // a != 0: (a, b) ~ (l^2 a, l^3 b) flips a_p by chi(l); representatives a in {1, g}
        // cover each square class, and each (a, b) stands for (p - 1)/2 models
        // of each sign of a_p.
        let mut g = 2;
        while legendre(g as i128, p) != -1 {
            g += 1;
        }
        let quarter = q(1, 4);
        for a in [1, g] {
            for b in 0..p {
                let (smooth, nodal) = kind(a, b);
                if smooth || nodal {
                    let t = ap_of(a, b);
                    add(t, nodal, quarter.clone());
                    add(-t, nodal, quarter.clone());
                }
            }
        }
    }
    Ok(acc.into_iter().filter(|(_, w)| !w.is_zero()).map(|((ap, nodal), weight)| ModuliPoint { ap, nodal, weight }).collect())
}

/// Sum over classes E of a_{p^nu}(E) / |Aut E|.
pub fn moduli_sum(p: u64, nu: u32, subset: Subset, include_nodal: bool) -> Result<BigRational> {
    let mut s = BigRational::zero();
    for pt in moduli_points(p)? {
        let keep = if pt.nodal {
            include_nodal && subset != Subset::SmoothOnly
        } else {
            match subset {
                Subset::All | Subset::SmoothOnly => true,
                Subset::Supersingular => pt.ap.rem_euclid(p as i64) == 0,
                Subset::Ordinary => pt.ap.rem_euclid(p as i64) != 0,
            }
        };
        if keep {
            let v = if pt.nodal { BigInt::from(pt.ap).pow(nu) } else { cheb(pt.ap, p, nu) };
            s += pt.weight * int(v);
        }
    }
    Ok(s)
}

fn trace(p: u64, nu: u32) -> BigRational {
    int(hecke_trace_sum(p, nu + 2).expect("even weight"))
}

/// 1 / (1 - p^{-10}).
fn norm(p: u64) -> BigRational {
    (BigRational::one() - pw(p, -10)).recip()
}

/// l_{p,nu}: average of a_{p^nu}(E_{A,B}) over the admissible (A, B).
pub fn ell(p: u64, nu: u32) -> BigRational {
    if nu == 0 {
        return BigRational::one();
    }
    if nu % 2 == 1 {
        return BigRational::zero();
    }
    let t = trace(p, nu);
    match p {
        2 => -pw(2, -10) * norm(2) * t,
        3 => {
            let ss = int(cheb(3, 3, nu) + cheb(0, 3, nu) * 4 + cheb(-3, 3, nu)) * pw(3, -2);
            ss - (pw(3, -10) - pw(3, -11)) * norm(3) * t
        }
        _ => -(pw(p, -1) - pw(p, -2)) * norm(p) * t,
    }
}

/// lhat_{p,nu}: the local factor for curves counted with p-power weights.
pub fn ell_hat(p: u64, nu: u32) -> BigRational {
    if nu % 2 == 1 {
        return BigRational::zero();
    }
    let one = BigRational::one();
    match (p, nu) {
        (2, 0) => pw(2, -9) * norm(2),
        (2, 2) => -(int(4) - pw(2, -6) + int(3) * pw(2, -10)) * norm(2),
        (2, _) => -q(1, 1023) * (int(3) + trace(2, nu)),
        (3, 0) => norm(3) * (q(2, 3) + int(4) * pw(3, -11)),
        (3, 2) => -(int(3) - pw(3, -7) + int(16) * pw(3, -11)) * norm(3) / int(2),
        (3, _) => {
            let inner = int(cheb(3, 3, nu) + cheb(0, 3, nu) * 2)
                + pw(3, -9) * int(cheb(2, 3, nu) + cheb(1, 3, nu))
                - pw(3, -8);
            q(2, 9) * norm(3) * inner
        }
        (_, 0) => (one - pw(p, -1)) * norm(p),
        (_, 2) => {
            let num = int(p) - pw(p, -1) + pw(p, -2) - pw(p, -8);
            -num * norm(p) / int(p - 1)
        }
        _ => -(pw(p, -1) - pw(p, -2)) * norm(p) * (int(p + 1) + trace(p, nu)),
    }
}

/// ltilde_{p,nu}: average of a_{p^nu} over the good-reduction (A, B).
pub fn ell_tilde(p: u64, nu: u32) -> BigRational {
    if nu == 0 {
        return BigRational::one();
    }
    if nu % 2 == 1 {
        return BigRational::zero();
    }
    if p == 3 {
        let inner = int(cheb(3, 3, nu) + cheb(0, 3, nu) * 2) + pw(3, -9) * int(cheb(2, 3, nu) + cheb(1, 3, nu));
        return inner / (int(3) * (BigRational::one() + int(2) * pw(3, -10)));
    }
    -pw(p, -1) * (BigRational::one() + trace(p, nu))
}

/// Local factor of the given flavor.
pub fn local_factor(p: u64, nu: u32, flavor: Flavor) -> BigRational {
    match flavor {
        Flavor::Plain => ell(p, nu),
        Flavor::Hat => ell_hat(p, nu),
        Flavor::Tilde => ell_tilde(p, nu),
    }
}

/// Rational to the nearest f64.
pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("finite rational")
}
