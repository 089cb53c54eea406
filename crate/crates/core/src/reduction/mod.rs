//! Local reduction data, conductor and global root number.

pub mod padic;
pub mod rootno;
pub mod tate;

use crate::arith::factor;
use crate::curves::{disc_quantity, CurveSeed};
use crate::error::{Error, Result};
use padic::{ScalarError, Zp};
pub use tate::{Kodaira, ReductionKind};

/// Reduction data of E_{A,B} at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalReduction {
    pub p: u64,
    pub kind: ReductionKind,
    pub kodaira: Kodaira,
    pub conductor_exponent: u32,
    /// w_p; +1 at good primes.
    pub local_root_number: i8,
    /// a1..a6 of a model minimal at p (exact integers).
    pub minimal_model: [i128; 5],
}

/// Conductor and root number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalInvariants {
    pub n: u64,
    pub eps: i8,
    pub locals: Vec<LocalReduction>,
}

impl GlobalInvariants {
    /// Local data at p, if p is a bad prime.
    pub fn local(&self, p: u64) -> Option<&LocalReduction> {
        self.locals.iter().find(|l| l.p == p)
    }
}

fn scalar_err(e: ScalarError) -> Error {
    match e {
        ScalarError::Overflow => Error::Overflow("Tate's algorithm"),
        ScalarError::Imprecise => unreachable!("exact arithmetic is never imprecise"),
    }
}

/// Tate's algorithm at p on y^2 = x^3 + Ax + B.
pub fn tate_local(seed: &CurveSeed, p: u64) -> Result<LocalReduction> {
    let model = seed.ainvs().map(|v| Zp::exact(v, p));
    let out = tate::tate(model, p, true).map_err(scalar_err)?;
    let f = out.conductor_exponent.expect("full run");
    let w = match out.kind {
        ReductionKind::Good | ReductionKind::NonsplitMult => 1,
        ReductionKind::SplitMult => -1,
        ReductionKind::Additive => {
            let (c4, c6, d) = tate::c_invariants(&out.model).map_err(scalar_err)?;
            let (c4, c6, d) = (c4.value(), c6.value(), d.value());
            if p <= 3 {
                rootno::additive_small(p, c4, c6, d)?
            } else {
                rootno::additive_large(p, c4, d)
            }
        }
    };
    Ok(LocalReduction {
        p,
        kind: out.kind,
        kodaira: out.kodaira.expect("full run"),
        conductor_exponent: f,
        local_root_number: w,
        minimal_model: out.model.map(|z| z.value()),
    })
}

/// Local data at every prime dividing 4A^3 + 27B^2 (and 2, 3), bad ones only.
pub fn bad_locals(seed: &CurveSeed) -> Result<Vec<LocalReduction>> {
    let d = disc_quantity(seed.a, seed.b);
    let d = u64::try_from(d.unsigned_abs()).map_err(|_| Error::Overflow("discriminant"))?;
    let mut primes: Vec<u64> = factor(d).into_iter().map(|(p, _)| p).collect();
    for q in [2, 3] {
        if !primes.contains(&q) {
            primes.push(q);
        }
    }
    primes.sort_unstable();
    let mut out = Vec::new();
    for p in primes {
        let l = tate_local(seed, p)?;
        if l.kind != ReductionKind::Good {
            out.push(l);
        }
    }
    Ok(out)
}

/// N(E) = prod p^f_p.
pub fn conductor(seed: &CurveSeed) -> Result<u64> {
    Ok(conductor_from(&bad_locals(seed)?))
}

fn conductor_from(locals: &[LocalReduction]) -> u64 {
    locals.iter().map(|l| l.p.pow(l.conductor_exponent)).product()
}

/// eps(E) = -prod_p w_p.
pub fn root_number(locals: &[LocalReduction]) -> i8 {
    -locals.iter().map(|l| l.local_root_number).product::<i8>()
}

pub fn global_invariants(seed: &CurveSeed) -> Result<GlobalInvariants> {
    let locals = bad_locals(seed)?;
    Ok(GlobalInvariants { n: conductor_from(&locals), eps: root_number(&locals), locals })
}

pub fn is_prime_conductor(seed: &CurveSeed) -> Result<bool> {
    Ok(crate::arith::is_prime(conductor(seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(a: i64, b: i64) -> CurveSeed {
        CurveSeed::new(a, b).unwrap()
    }

    #[test]
    fn examples() {
        let l = tate_local(&seed(-1, 0), 2).unwrap();
        assert_eq!((l.kind, l.conductor_exponent), (ReductionKind::Additive, 5));
        let l = tate_local(&seed(0, 1), 5).unwrap();
        assert_eq!((l.kind, l.conductor_exponent), (ReductionKind::Good, 0));
        assert_eq!(tate_local(&seed(0, 2), 3).unwrap().kind, ReductionKind::Additive);
        assert_eq!(conductor(&seed(0, 1)).unwrap(), 36);
        assert_eq!(conductor(&seed(-1, 0)).unwrap(), 32);
        assert_eq!(conductor(&seed(1, 1)).unwrap(), 496);
        assert!(!is_prime_conductor(&seed(0, 1)).unwrap());
    }

    #[test]
    fn split_only_gives_plus_one() {
        let l = LocalReduction {
            p: 37,
            kind: ReductionKind::SplitMult,
            kodaira: Kodaira::I(1),
            conductor_exponent: 1,
            local_root_number: -1,
            minimal_model: [0; 5],
        };
        assert_eq!(root_number(&[l]), 1);
    }
}
