//! The defining p-adic integrals, evaluated by exhaustive refinement of
//! balls in Z_p^2 until Tate's algorithm decides the reduction type.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{cheb, q, Flavor};
use crate::frobenius::ap_of_model;
use crate::reduction::padic::{precision_cap, ScalarError, Zp};
use crate::reduction::tate::{tate, ReductionKind};

/// Reduction type of E_{A,B} over Q_p together with a_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LocalType {
    Good(i64),
    Split,
    Nonsplit,
    Additive,
}

/// Measure of each local type on Z_p^2 minus p^4 Z_p x p^6 Z_p.
pub fn local_type_measures(p: u64) -> BTreeMap<LocalType, BigRational> {
    let mut out: BTreeMap<LocalType, BigRational> = BTreeMap::new();
    let cap = precision_cap(p);
    // (a, b, k): the ball a + p^k Z_p, b + p^k Z_p.
    let mut stack: Vec<(i128, i128, u32)> = Vec::new();
    for a in 0..p as i128 {
        for b in 0..p as i128 {
            stack.push((a, b, 1));
        }
    }
    let pi = p as i128;
    while let Some((a, b, k)) = stack.pop() {
        let meets_excluded = a % pi.pow(k.min(4)) == 0 && b % pi.pow(k.min(6)) == 0;
        let decided = if meets_excluded {
            if k >= 6 {
                continue;
            }
            None
        } else {
            classify(a, b, k, p)
        };
        match decided {
            Some(t) => {
                let m = q(1, BigInt::from(p).pow(2 * k));
                *out.entry(t).or_insert_with(BigRational::zero) += m;
            }
            None => {
                assert!(k < cap, "refinement exceeded the precision cap at p = {p}");
                let step = pi.pow(k);
                for i in 0..pi {
                    for j in 0..pi {
                        stack.push((a + i * step, b + j * step, k + 1));
                    }
                }
            }
        }
    }
    out
}

fn classify(a: i128, b: i128, k: u32, p: u64) -> Option<LocalType> {
    let zero = Zp::exact(0, p);
    let model = [zero, zero, zero, Zp::approx(a, k, p), Zp::approx(b, k, p)];
    let run = || -> Result<LocalType, ScalarError> {
        let out = tate(model, p, false)?;
        Ok(match out.kind {
            ReductionKind::Good => {
                let mut r = [0i128; 5];
                for (x, z) in r.iter_mut().zip(out.model.iter()) {
                    *x = z.residue()? as i128;
                }
                LocalType::Good(ap_of_model(r, p))
            }
            ReductionKind::SplitMult => LocalType::Split,
            ReductionKind::NonsplitMult => LocalType::Nonsplit,
            ReductionKind::Additive => LocalType::Additive,
        })
    };
    match run() {
        Ok(t) => Some(t),
        Err(ScalarError::Imprecise) => None,
        Err(ScalarError::Overflow) => unreachable!("residue arithmetic cannot overflow"),
    }
}

fn a_pnu(t: LocalType, p: u64, nu: u32) -> BigInt {
    match t {
        LocalType::Good(ap) => cheb(ap, p, nu),
        LocalType::Split => BigInt::one(),
        LocalType::Nonsplit => BigInt::from(if nu % 2 == 0 { 1 } else { -1 }),
        LocalType::Additive => BigInt::from(if nu == 0 { 1 } else { 0 }),
    }
}

/// The defining integral of the local factor, from a measure table.
pub fn definition_value(measures: &BTreeMap<LocalType, BigRational>, p: u64, nu: u32, flavor: Flavor) -> BigRational {
    let norm = (BigRational::one() - q(1, BigInt::from(p).pow(10))).recip();
    let pr = BigRational::from_integer(BigInt::from(p));
    let mut total = BigRational::zero();
    let mut good_measure = BigRational::zero();
    for (&t, m) in measures {
        let a = BigRational::from_integer(a_pnu(t, p, nu));
        let mult = matches!(t, LocalType::Split | LocalType::Nonsplit);
        let good = matches!(t, LocalType::Good(_));
        if good {
            good_measure += m;
        }
        let integrand = match flavor {
            Flavor::Plain => a,
            Flavor::Tilde => {
                if good {
                    a
                } else {
                    BigRational::zero()
                }
            }
            Flavor::Hat => match nu {
                0 => {
                    if good {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                }
                1 => {
                    if good {
                        a
                    } else if mult {
                        a * (pr.clone() / (pr.clone() - BigRational::one()))
                    } else {
                        BigRational::zero()
                    }
                }
                2 => {
                    if good {
                        a
                    } else if mult {
                        -pr.clone() * a
                    } else {
                        -(pr.clone() * pr.clone()) / (pr.clone() - BigRational::one())
                    }
                }
                _ => {
                    if good {
                        a
                    } else if mult {
                        -pr.clone() * a
                    } else {
                        BigRational::zero()
                    }
                }
            },
        };
        total += integrand * m;
    }
    match flavor {
        Flavor::Tilde => total / good_measure,
        _ => total * norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_partition() {
        for p in [5u64, 7] {
            let m = local_type_measures(p);
            let total: BigRational = m.values().cloned().sum();
            let pp = BigInt::from(p);
            assert_eq!(total, BigRational::one() - q(1, pp.pow(10)));
            let good_mult: BigRational =
                m.iter().filter(|(t, _)| **t != LocalType::Additive).map(|(_, v)| v.clone()).sum();
            assert_eq!(good_mult, (q(1, pp.clone()) - q(1, pp.pow(2))) * BigRational::from_integer(pp + 1));
        }
    }

    #[test]
    fn closed_forms_match_definitions() {
        for p in [2u64, 3, 5, 7] {
            let m = local_type_measures(p);
            for nu in 0..=12u32 {
                for fl in [Flavor::Plain, Flavor::Hat, Flavor::Tilde] {
                    let want = definition_value(&m, p, nu, fl);
                    let got = crate::localfactors::local_factor(p, nu, fl);
                    assert_eq!(want, got, "p={p} nu={nu} {}", fl.name());
                }
            }
        }
    }
}
