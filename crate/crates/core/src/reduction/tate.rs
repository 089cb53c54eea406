//! Tate's algorithm over Z_p for a general Weierstrass model.

use super::padic::{ScalarError, Zp};
use crate::arith::{invmod, legendre};

/// Kodaira symbol of the special fibre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kodaira {
    I(u32),
    II,
    III,
    IV,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

/// Reduction type of a minimal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionKind {
    Good,
    SplitMult,
    NonsplitMult,
    Additive,
}

impl ReductionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReductionKind::Good => "good",
            ReductionKind::SplitMult => "split",
            ReductionKind::NonsplitMult => "nonsplit",
            ReductionKind::Additive => "additive",
        }
    }

    pub fn is_multiplicative(&self) -> bool {
        matches!(self, ReductionKind::SplitMult | ReductionKind::NonsplitMult)
    }
}

/// Output of Tate's algorithm. With `full = false` only `kind` and
/// `model` are meaningful: the run stops as soon as the kind is known.
#[derive(Debug, Clone)]
pub struct TateOutput {
    pub kind: ReductionKind,
    pub kodaira: Option<Kodaira>,
    pub conductor_exponent: Option<u32>,
    /// A model minimal at p, reached from the input by (r, s, t) moves and
    /// divisions by p.
    pub model: [Zp; 5],
    /// Number of divisions by p performed (u = p^scalings).
    pub scalings: u32,
}

type R<T> = std::result::Result<T, ScalarError>;

struct Inv {
    b2: Zp,
    b4: Zp,
    b6: Zp,
    b8: Zp,
    c4: Zp,
    disc: Zp,
}

fn invariants(a: &[Zp; 5]) -> R<Inv> {
    let [a1, a2, a3, a4, a6] = *a;
    let b2 = a1.mul(a1)?.add(a2.mul_i(4)?)?;
    let b4 = a4.mul_i(2)?.add(a1.mul(a3)?)?;
    let b6 = a3.mul(a3)?.add(a6.mul_i(4)?)?;
    let b8 = a1
        .mul(a1)?
        .mul(a6)?
        .add(a2.mul(a6)?.mul_i(4)?)?
        .sub(a1.mul(a3)?.mul(a4)?)?
        .add(a2.mul(a3)?.mul(a3)?)?
        .sub(a4.mul(a4)?)?;
    let c4 = b2.mul(b2)?.sub(b4.mul_i(24)?)?;
    let disc = b2
        .mul(b2)?
        .mul(b8)?
        .neg()
        .sub(b4.mul(b4)?.mul(b4)?.mul_i(8)?)?
        .sub(b6.mul(b6)?.mul_i(27)?)?
        .add(b2.mul(b4)?.mul(b6)?.mul_i(9)?)?;
    Ok(Inv { b2, b4, b6, b8, c4, disc })
}

/// c4, c6, disc of a model.
pub fn c_invariants(a: &[Zp; 5]) -> R<(Zp, Zp, Zp)> {
    let i = invariants(a)?;
    let c6 = i
        .b2
        .mul(i.b2)?
        .mul(i.b2)?
        .neg()
        .add(i.b2.mul(i.b4)?.mul_i(36)?)?
        .sub(i.b6.mul_i(216)?)?;
    Ok((i.c4, c6, i.disc))
}

/// Substitution x = x' + r, y = y' + s x' + t.
fn rst(a: &[Zp; 5], r: i128, s: i128, t: i128) -> R<[Zp; 5]> {
    let [a1, a2, a3, a4, a6] = *a;
    let c = |v: i128| a1.constant(v);
    let (r_, s_, t_) = (c(r), c(s), c(t));
    let n1 = a1.add(c(2 * s))?;
    let n2 = a2.sub(s_.mul(a1)?)?.add(c(3 * r))?.sub(c(s * s))?;
    let n3 = a3.add(r_.mul(a1)?)?.add(c(2 * t))?;
    let n4 = a4
        .sub(s_.mul(a3)?)?
        .add(r_.mul(a2)?.mul_i(2)?)?
        .sub(c(t + r * s).mul(a1)?)?
        .add(c(3 * r * r))?
        .sub(c(2 * s * t))?;
    let n6 = a6
        .add(r_.mul(a4)?)?
        .add(c(r * r).mul(a2)?)?
        .add(c(r * r * r))?
        .sub(t_.mul(a3)?)?
        .sub(c(t * t))?
        .sub(c(r * t).mul(a1)?)?;
    Ok([n1, n2, n3, n4, n6])
}

fn inv_mod(a: i128, p: u64) -> i128 {
    invmod(a.rem_euclid(p as i128) as u64, p).expect("unit mod p") as i128
}

fn md(a: i128, p: u64) -> i128 {
    a.rem_euclid(p as i128)
}

/// Run Tate's algorithm at p. With `full = false` the run may stop early
/// and leaves `kodaira` / `conductor_exponent` unset for additive types.
pub fn tate(model: [Zp; 5], p: u64, full: bool) -> R<TateOutput> {
    let pi = p as i128;
    let mut a = model;
    let mut scalings = 0;
    loop {
        let inv = invariants(&a)?;
        let done = |kind, kod, f: Option<u32>, a: [Zp; 5]| TateOutput {
            kind,
            kodaira: kod,
            conductor_exponent: f,
            model: a,
            scalings,
        };
        if !inv.disc.divisible(1)? {
            return Ok(done(ReductionKind::Good, Some(Kodaira::I(0)), Some(0), a));
        }
        let n = if full { Some(inv.disc.valuation()?) } else { None };
        let res = |z: &Zp| -> R<i128> { Ok(z.residue()? as i128) };

        // Move the singular point of the reduction to (0, 0).
        let (r, t) = match p {
            2 => {
                if res(&inv.b2)? == 0 {
                    let r = res(&a[3])?;
                    let t = md(r * (1 + res(&a[1])? + res(&a[3])?) + res(&a[4])?, 2);
                    (r, t)
                } else {
                    let r = res(&a[2])?;
                    (r, md(r + res(&a[3])?, 2))
                }
            }
            3 => {
                let r = if res(&inv.b2)? == 0 {
                    md(-res(&inv.b6)?, 3)
                } else {
                    md(-res(&inv.b2)? * res(&inv.b4)?, 3)
                };
                (r, md(res(&a[0])? * r + res(&a[2])?, 3))
            }
            _ => {
                let (c4, c6) = {
                    let (c4, c6, _) = c_invariants(&a)?;
                    (res(&c4)?, res(&c6)?)
                };
                let b2 = res(&inv.b2)?;
                let r = if c4 == 0 {
                    md(-inv_mod(12, p) * b2, p)
                } else {
                    md(-inv_mod(md(12 * c4, p), p) * md(c6 + b2 * c4, p), p)
                };
                let t = md(-inv_mod(2, p) * md(res(&a[0])? * r + res(&a[2])?, p), p);
                (r, t)
            }
        };
        a = rst(&a, r, 0, t)?;

        if !inv.c4.divisible(1)? {
            let split = if p == 2 {
                a[1].residue()? == 0
            } else {
                let b2 = a[0].mul(a[0])?.add(a[1].mul_i(4)?)?;
                legendre(b2.residue()? as i128, p) == 1
            };
            let kind = if split { ReductionKind::SplitMult } else { ReductionKind::NonsplitMult };
            return Ok(done(kind, n.map(Kodaira::I), Some(1), a));
        }

        let additive = |kod: Kodaira, drop: u32, a: [Zp; 5]| {
            let f = n.map(|n| n - drop);
            done(ReductionKind::Additive, Some(kod), f, a)
        };
        if !a[4].divisible(2)? {
            return Ok(additive(Kodaira::II, 0, a));
        }
        let inv = invariants(&a)?;
        if !inv.b8.divisible(3)? {
            return Ok(additive(Kodaira::III, 1, a));
        }
        if !inv.b6.divisible(3)? {
            return Ok(additive(Kodaira::IV, 2, a));
        }

        // Arrange p | a1, a2; p^2 | a3, a4; p^3 | a6.
        let (s, t) = if p == 2 {
            (res(&a[1])?, 2 * md(a[4].div_pk(2)?.residue()? as i128, 2))
        } else {
            let h = inv_mod(2, p);
            let p2 = pi * pi;
            let t = (-a[2].residue_pk(2)? * ((p2 + 1) / 2)).rem_euclid(p2);
            (md(-res(&a[0])? * h, p), t)
        };
        a = rst(&a, 0, s, t)?;

        let b = a[1].div_pk(1)?;
        let c = a[3].div_pk(2)?;
        let d = a[4].div_pk(3)?;
        let (rb, rc, rd) = (res(&b)?, res(&c)?, res(&d)?);
        let w = 27 * rd * rd - rb * rb * rc * rc + 4 * rb * rb * rb * rd - 18 * rb * rc * rd
            + 4 * rc * rc * rc;
        let x = 3 * rc - rb * rb;
        if md(w, p) != 0 {
            return Ok(additive(Kodaira::IStar(0), 4, a));
        }
        if md(x, p) != 0 {
            // Double root: I_m^*, m >= 1.
            if !full {
                return Ok(done(ReductionKind::Additive, None, None, a));
            }
            let alpha = match p {
                2 => rc,
                3 => rb * rc,
                _ => md(md(rb * rc - 9 * rd, p) * inv_mod(2 * x, p), p),
            };
            a = rst(&a, pi * md(alpha, p), 0, 0)?;
            let mut m = 1u32;
            let (mut mx, mut my) = (2u32, 2u32);
            loop {
                let xa3 = a[2].div_pk(my)?;
                let xa6 = a[4].div_pk(mx + my)?;
                let (r3, r6) = (res(&xa3)?, res(&xa6)?);
                if md(r3 * r3 + 4 * r6, p) != 0 {
                    break;
                }
                let y0 = if p == 2 { r6 } else { md(-r3 * inv_mod(2, p), p) };
                a = rst(&a, 0, 0, pi.pow(my) * y0)?;
                my += 1;
                m += 1;
                let xa2 = res(&a[1].div_pk(1)?)?;
                let xa4 = res(&a[3].div_pk(1 + mx)?)?;
                let xa6 = res(&a[4].div_pk(mx + my)?)?;
                if md(xa4 * xa4 - 4 * xa2 * xa6, p) != 0 {
                    break;
                }
                let x0 = if p == 2 {
                    md(xa6 * xa2, 2)
                } else {
                    md(-xa4 * inv_mod(2 * xa2, p), p)
                };
                a = rst(&a, pi.pow(mx) * x0, 0, 0)?;
                mx += 1;
                m += 1;
            }
            return Ok(additive(Kodaira::IStar(m), m + 4, a));
        }

        // Triple root.
        let alpha = match p {
            2 => rb,
            3 => -rd,
            _ => -rb * inv_mod(3, p),
        };
        a = rst(&a, pi * md(alpha, p), 0, 0)?;
        let x3 = res(&a[2].div_pk(2)?)?;
        let x6 = res(&a[4].div_pk(4)?)?;
        if md(x3 * x3 + 4 * x6, p) != 0 {
            return Ok(additive(Kodaira::IVStar, 6, a));
        }
        let y0 = if p == 2 { x6 } else { md(x3 * inv_mod(2, p), p) };
        a = rst(&a, 0, 0, -pi * pi * y0)?;
        if !a[3].divisible(4)? {
            return Ok(additive(Kodaira::IIIStar, 7, a));
        }
        if !a[4].divisible(6)? {
            return Ok(additive(Kodaira::IIStar, 8, a));
        }
        // Not minimal: divide by p and start again.
        a = [a[0].div_pk(1)?, a[1].div_pk(2)?, a[2].div_pk(3)?, a[3].div_pk(4)?, a[4].div_pk(6)?];
        scalings += 1;
    }
}
