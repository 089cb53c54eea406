//! Frobenius traces a_p, prime powers a_{p^k}, and the a_n stream.

use crate::arith::{factor, invmod, isqrt, legendre, mulmod, primes_up_to, sqrtmod};
use crate::curves::{disc_quantity, CurveSeed};
use crate::error::{Error, Result};
use crate::reduction::{tate_local, GlobalInvariants, ReductionKind};

/// Below this, a_p is always counted naively.
pub const BSGS_CUTOFF: u64 = 229;

/// Largest p accepted by [`ap_naive`].
pub const NAIVE_LIMIT: u64 = 1 << 20;

/// Segment length of the factor sieve in [`an_stream`].
pub const SEGMENT: u64 = 1 << 22;

fn check_good(seed: &CurveSeed, p: u64) -> Result<()> {
    if crate::arith::reduce(disc_quantity(seed.a, seed.b), p) == 0 {
        return Err(Error::BadPrime { p });
    }
    Ok(())
}

/// Affine point count plus one on a general Weierstrass model over F_p.
fn count_general(a: [i128; 5], p: u64) -> u64 {
    let r = |v: i128| crate::arith::reduce(v, p);
    let [a1, a2, a3, a4, a6] = a.map(r);
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = (mulmod(y, y, p) + mulmod(a1, mulmod(x, y, p), p) + mulmod(a3, y, p)) % p;
            let x2 = mulmod(x, x, p);
            let rhs = (mulmod(x2, x, p) + mulmod(a2, x2, p) + mulmod(a4, x, p) + a6) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// a_p of the reduction of a general model already minimal and smooth mod p.
pub fn ap_of_model(a: [i128; 5], p: u64) -> i64 {
    p as i64 + 1 - count_general(a, p) as i64
}

/// p + 1 - #E(F_p) by counting.
pub fn ap_naive(seed: &CurveSeed, p: u64) -> Result<i64> {
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p <= 3 {
        let l = tate_local(seed, p)?;
        if l.kind != ReductionKind::Good {
            return Err(Error::BadPrime { p });
        }
        return Ok(ap_of_model(l.minimal_model, p));
    }
    if p > NAIVE_LIMIT {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds the naive counting limit")));
    }
    check_good(seed, p)?;
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for x in 1..(p + 1) / 2 {
        chi[mulmod(x, x, p) as usize] = 1;
    }
    let a = crate::arith::reduce(seed.a as i128, p);
    let b = crate::arith::reduce(seed.b as i128, p);
    let mut s: i64 = 0;
    for x in 0..p {
        let f = (mulmod(mulmod(x, x, p), x, p) + mulmod(a, x, p) + b) % p;
        s += chi[f as usize] as i64;
    }
    Ok(-s)
}

/// Short Weierstrass curve over F_p, p >= 5.
#[derive(Clone, Copy)]
struct Fp {
    p: u64,
    a: u64,
    b: u64,
}

type Pt = Option<(u64, u64)>;

impl Fp {
    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, _) => return v,
            (_, None) => return u,
            (Some(a), Some(b)) => (a, b),
        };
        let lam = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * mulmod(x1, x1, p) + self.a) % p;
            mulmod(num, invmod(2 * y1 % p, p).unwrap(), p)
        } else {
            let num = (y2 + p - y1) % p;
            mulmod(num, invmod((x2 + p - x1) % p, p).unwrap(), p)
        };
        let x3 = (mulmod(lam, lam, p) + 2 * p - x1 - x2) % p;
        let y3 = (mulmod(lam, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, pt: Pt) -> Pt {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, state: &mut u64) -> Pt {
        let p = self.p;
        loop {
            *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (*state >> 11) % p;
            let f = (mulmod(mulmod(x, x, p), x, p) + mulmod(self.a, x, p) + self.b) % p;
            if let Some(y) = sqrtmod(f, p) {
                return Some((x, y));
            }
        }
    }

    /// Exact order of `pt`, knowing only that it divides something in [lo, hi].
    fn order(&self, pt: Pt, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo;
        let m = isqrt(width) + 1;
        let mut baby = std::collections::HashMap::with_capacity(m as usize);
        let mut q = None;
        for j in 0..m {
            if let Some((x, y)) = q {
                baby.entry(x).or_insert((j, y));
            }
            q = self.add(q, pt);
        }
        let step = self.mul(m, pt);
        let mut r = self.mul(lo, pt);
        let mut found = None;
        let mut i = 0;
        while lo + i * m <= hi + m {
            match r {
                None => {
                    found = Some(lo + i * m);
                    break;
                }
                Some((x, y)) => {
                    if let Some(&(j, yj)) = baby.get(&x) {
                        // r = +-[j]pt
                        let base = lo + i * m;
                        found = Some(if yj == y { base.checked_sub(j)? } else { base + j });
                        break;
                    }
                }
            }
            r = self.add(r, step);
            i += 1;
        }
        let mut ord = found?;
        if ord == 0 || self.mul(ord, pt).is_some() {
            return None;
        }
        for (q, _) in factor(ord) {
            while ord % q == 0 && self.mul(ord / q, pt).is_none() {
                ord /= q;
            }
        }
        Some(ord)
    }

    /// lcm of point orders over a few random points.
    fn exponent_bound(&self, lo: u64, hi: u64, tries: u32, state: &mut u64) -> Option<u64> {
        let mut l = 1u64;
        for _ in 0..tries {
            let pt = self.random_point(state);
            let o = self.order(pt, lo, hi)?;
            l = num_integer::lcm(l, o);
            if l > hi - lo {
                break;
            }
        }
        Some(l)
    }
}

/// a_p by baby-step giant-step in the Hasse interval.
pub fn ap_bsgs(seed: &CurveSeed, p: u64) -> Result<i64> {
    if p <= BSGS_CUTOFF {
        return ap_naive(seed, p);
    }
    check_good(seed, p)?;
    match bsgs_inner(seed, p) {
        Some(v) => Ok(v),
        None => ap_naive(seed, p),
    }
}

fn bsgs_inner(seed: &CurveSeed, p: u64) -> Option<i64> {
    let a = crate::arith::reduce(seed.a as i128, p);
    let b = crate::arith::reduce(seed.b as i128, p);
    let e = Fp { p, a, b };
    let w = isqrt(4 * p);
    let (lo, hi) = (p + 1 - w, p + 1 + w);
    let mut state = p ^ 0x9e37_79b9_7f4a_7c15;
    let l1 = e.exponent_bound(lo, hi, 6, &mut state)?;
    let cands: Vec<u64> = (lo.div_ceil(l1)..=hi / l1).map(|k| k * l1).collect();
    if cands.len() == 1 {
        return Some(p as i64 + 1 - cands[0] as i64);
    }
    let mut d = 2;
    while legendre(d as i128, p) != -1 {
        d += 1;
    }
    let d2 = mulmod(d, d, p);
    let t = Fp { p, a: mulmod(a, d2, p), b: mulmod(b, mulmod(d2, d, p), p) };
    let l2 = t.exponent_bound(lo, hi, 6, &mut state)?;
    let both: Vec<u64> = cands.into_iter().filter(|&m| (2 * p + 2 - m) % l2 == 0).collect();
    if both.len() == 1 {
        Some(p as i64 + 1 - both[0] as i64)
    } else {
        None
    }
}

/// a_{p^k}: the Hecke recurrence at good primes, a_p^k at bad ones.
pub fn a_prime_power(ap: i64, p: u64, k: u32, good: bool) -> i64 {
    if !good {
        return ap.pow(k);
    }
    let (mut prev, mut cur) = (1i128, ap as i128);
    if k == 0 {
        return 1;
    }
    for _ in 1..k {
        let next = ap as i128 * cur - p as i128 * prev;
        prev = cur;
        cur = next;
    }
    cur as i64
}

/// a_p for any prime, using local data at bad primes.
pub fn ap(seed: &CurveSeed, inv: &GlobalInvariants, p: u64) -> Result<i64> {
    if let Some(l) = inv.local(p) {
        return Ok(match l.kind {
            ReductionKind::SplitMult => 1,
            ReductionKind::NonsplitMult => -1,
            _ => 0,
        });
    }
    if p > BSGS_CUTOFF {
        ap_bsgs(seed, p)
    } else {
        ap_naive(seed, p)
    }
}

/// Which n an [`an_stream`] visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    All,
    /// n with no prime factor <= P.
    CoprimeTo(u64),
    Prime,
}

#[derive(Debug, Clone, Copy)]
pub struct CoefficientStreamSpec {
    pub n_max: u64,
    pub mode: StreamMode,
}

/// Calls `sink(n, a_n)` once for each n <= n_max passing the mode filter.
/// Visiting order is not monotone in n.
pub fn an_stream(
    seed: &CurveSeed,
    inv: &GlobalInvariants,
    spec: CoefficientStreamSpec,
    mut sink: impl FnMut(u64, i64),
) -> Result<()> {
    an_stream_lpf(seed, inv, spec.n_max, |n, a, lpf| {
        let keep = match spec.mode {
            StreamMode::All => true,
            StreamMode::CoprimeTo(p) => lpf > p,
            StreamMode::Prime => n > 1 && lpf == n,
        };
        if keep {
            sink(n, a)
        }
    })
}

/// Like [`an_stream`] over all n, also passing the least prime factor of n
/// (u64::MAX for n = 1).
pub fn an_stream_lpf(
    seed: &CurveSeed,
    inv: &GlobalInvariants,
    n_max: u64,
    mut sink: impl FnMut(u64, i64, u64),
) -> Result<()> {
    if n_max == 0 {
        return Ok(());
    }
    let s = isqrt(n_max);
    let small = primes_up_to(s);
    // a_{p^k} for p <= s and p^k <= n_max.
    let mut powers: Vec<Vec<i64>> = Vec::with_capacity(small.len());
    for &p in &small {
        let a = ap(seed, inv, p)?;
        let good = inv.local(p).is_none();
        let mut v = vec![1i64];
        let mut q = p;
        let mut k = 1;
        loop {
            v.push(a_prime_power(a, p, k, good));
            match q.checked_mul(p) {
                Some(nq) if nq <= n_max => {
                    q = nq;
                    k += 1;
                }
                _ => break,
            }
        }
        powers.push(v);
    }
    // a_m and lpf(m) for m <= s.
    let mut cache_a = vec![1i64; s as usize + 1];
    let mut cache_l = vec![u64::MAX; s as usize + 1];
    let mut rem: Vec<u64> = (0..=s).collect();
    for (i, &p) in small.iter().enumerate() {
        let mut m = p;
        while m <= s {
            let mut e = 0;
            while rem[m as usize] % p == 0 {
                rem[m as usize] /= p;
                e += 1;
            }
            cache_a[m as usize] *= powers[i][e];
            if cache_l[m as usize] == u64::MAX {
                cache_l[m as usize] = p;
            }
            m += p;
        }
    }

    let seg = SEGMENT.min(n_max);
    let mut rem = vec![0u64; seg as usize];
    let mut acc = vec![0i64; seg as usize];
    let mut lpf = vec![0u64; seg as usize];
    let mut lo = 1u64;
    while lo <= n_max {
        let hi = (lo + seg - 1).min(n_max);
        let len = (hi - lo + 1) as usize;
        for i in 0..len {
            rem[i] = lo + i as u64;
            acc[i] = 1;
            lpf[i] = u64::MAX;
        }
        for (k, &p) in small.iter().enumerate() {
            let mut n = lo.div_ceil(p) * p;
            while n <= hi {
                let i = (n - lo) as usize;
                let mut e = 0;
                while rem[i] % p == 0 {
                    rem[i] /= p;
                    e += 1;
                }
                acc[i] *= powers[k][e];
                if lpf[i] == u64::MAX {
                    lpf[i] = p;
                }
                n += p;
            }
        }
        for i in 0..len {
            let n = lo + i as u64;
            if rem[i] == 1 {
                sink(n, acc[i], lpf[i]);
            } else if rem[i] == n {
                // n is a prime above sqrt(n_max): emit every t * n.
                let aq = ap(seed, inv, n)?;
                for t in 1..=n_max / n {
                    let l = if t == 1 { n } else { cache_l[t as usize] };
                    sink(t * n, cache_a[t as usize] * aq, l);
                }
            }
        }
        lo = hi + 1;
    }
    Ok(())
}

/// All a_n for n <= n_max as a vector indexed by n (index 0 unused).
pub fn an_vec(seed: &CurveSeed, inv: &GlobalInvariants, n_max: u64) -> Result<Vec<i64>> {
    let mut v = vec![0i64; n_max as usize + 1];
    an_stream_lpf(seed, inv, n_max, |n, a, _| v[n as usize] = a)?;
    Ok(v)
}
