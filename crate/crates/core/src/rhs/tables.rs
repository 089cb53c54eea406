//! Sieved multiplicative tables l(m), l'(m), psi(m), mu(m), phi(m) for m <= B.

use crate::error::{Error, Result};
use crate::localfactors::{to_f64, Flavor, LocalFactorTable};

/// Which prediction the tables feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// All curves, sum over n free of small primes (l' built from lhat).
    Hat,
    /// Curves with good reduction below P (l' built from ltilde).
    Tilde,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Hat => "hat",
            Variant::Tilde => "tilde",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hat" => Ok(Variant::Hat),
            "tilde" => Ok(Variant::Tilde),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?} (hat|tilde)"))),
        }
    }
}

/// Smoothness cutoff; `None` is P = infinity.
pub type Cutoff = Option<u64>;

/// `p <= P` with P possibly infinite.
#[inline]
pub fn below(p: u64, cutoff: Cutoff) -> bool {
    cutoff.is_none_or(|c| p <= c)
}

#[derive(Debug, Clone)]
pub struct MultiplicativeTables {
    pub b: u64,
    pub cutoff: Cutoff,
    pub variant: Variant,
    pub lpf: Vec<u32>,
    pub ell: Vec<f64>,
    pub ellp: Vec<f64>,
    pub psi: Vec<f64>,
    pub mu: Vec<i8>,
    pub phi: Vec<u64>,
    /// P-smooth part of m.
    pub smooth: Vec<u32>,
}

/// Least prime factor of every m <= n (lpf[0] = lpf[1] = 0).
pub fn lpf_sieve(n: usize) -> Vec<u32> {
    let mut lpf = vec![0u32; n + 1];
    for i in 2..=n {
        if lpf[i] == 0 {
            let mut j = i;
            while j <= n {
                if lpf[j] == 0 {
                    lpf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    lpf
}

pub fn build_tables(b: u64, cutoff: Cutoff, variant: Variant, lft: &mut LocalFactorTable) -> Result<MultiplicativeTables> {
    if b == 0 {
        return Err(Error::InvalidArgument("B must be >= 1".into()));
    }
    if b > u32::MAX as u64 {
        return Err(Error::Overflow("B above 2^32"));
    }
    let n = b as usize;
    let lpf = lpf_sieve(n);
    let prime_flavor = match variant {
        Variant::Hat => Flavor::Hat,
        Variant::Tilde => Flavor::Tilde,
    };
    let mut ell = vec![0.0; n + 1];
    let mut ellp = vec![0.0; n + 1];
    let mut psi = vec![0.0; n + 1];
    let mut mu = vec![0i8; n + 1];
    let mut phi = vec![0u64; n + 1];
    let mut smooth = vec![0u32; n + 1];
    ell[1] = 1.0;
    ellp[1] = 1.0;
    psi[1] = 1.0;
    mu[1] = 1;
    phi[1] = 1;
    smooth[1] = 1;
    for m in 2..=n {
        let p = lpf[m] as usize;
        let (mut rest, mut pv, mut v) = (m, 1usize, 0u32);
        while rest % p == 0 {
            rest /= p;
            pv *= p;
            v += 1;
        }
        let pu = p as u64;
        let l = to_f64(&lft.get(pu, 2 * v, Flavor::Plain));
        let lp = to_f64(&lft.get(pu, 2 * v, prime_flavor));
        let ph = (pv / p * (p - 1)) as u64;
        let local_psi = match variant {
            Variant::Hat => to_f64(&lft.get(pu, 0, Flavor::Hat)) / ph as f64,
            Variant::Tilde => 1.0 / ph as f64,
        };
        ell[m] = l * ell[rest];
        ellp[m] = lp * ellp[rest];
        psi[m] = local_psi * psi[rest];
        mu[m] = if v == 1 { -mu[rest] } else { 0 };
        phi[m] = ph * phi[rest];
        smooth[m] = if below(pu, cutoff) { pv as u32 * smooth[rest] } else { smooth[rest] };
    }
    Ok(MultiplicativeTables { b, cutoff, variant, lpf, ell, ellp, psi, mu, phi, smooth })
}

impl MultiplicativeTables {
    /// Distinct prime factors of m <= B, increasing.
    pub fn primes_of(&self, mut m: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while m > 1 {
            let p = self.lpf[m as usize] as u64;
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        out
    }

    /// phi_{d,P}(m).
    pub fn phi_dp(&self, d: u64, m: u64) -> u64 {
        match self.variant {
            Variant::Tilde => self.smooth[m as usize] as u64,
            Variant::Hat => {
                let mut out = 1;
                for p in self.primes_of(d) {
                    let mut t = m;
                    while t % p == 0 {
                        t /= p;
                        out *= p;
                    }
                }
                out
            }
        }
    }

    /// The (q, d, m) summand of RHS without the Bessel factor.
    pub fn coefficient(&self, q: u64, d: u64, m: u64) -> f64 {
        let f = self.phi_dp(d, m);
        let (q_, d_, m_) = (q as usize, d as usize, m as usize);
        self.psi[q_] / q as f64 * (self.mu[d_] as f64 / self.psi[d_]) / m as f64
            * self.ellp[f as usize]
            * self.ell[m_ / f as usize]
    }
}
