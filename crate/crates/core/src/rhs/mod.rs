//! Predicted murmuration density RHS(j, P, B) and its diagnostics.

pub mod bessel;
pub mod quad;
pub mod tables;
pub mod voronoi;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::WindowGrid;
use crate::localfactors::LocalFactorTable;
pub use bessel::{bessel_j0, bessel_j1, bessel_j2};
pub use tables::{below, build_tables, Cutoff, MultiplicativeTables, Variant};

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Closed-form transform of the normalised indicator of (a, b]:
/// int 2 pi W(u) sqrt(u) J1(4 pi sqrt(u y)) du.
pub fn hankel_hat(a: f64, b: f64, y: f64) -> Result<f64> {
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidArgument(format!("window ({a}, {b}] is empty")));
    }
    if !(y > 0.0) {
        return Err(Error::InvalidArgument(format!("y = {y} must be positive")));
    }
    let c = 4.0 * PI * y.sqrt();
    let f = |t: f64| t * bessel::j2(c * t.sqrt());
    Ok((f(b) - f(a)) / ((b - a) * y.sqrt()))
}

/// How admissible m are found for each q.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Build m from prime powers whose local factors can be nonzero.
    Recursive,
    /// Try every m <= B.
    ScanAll,
}

/// The truncated double sum as a list of (m/q, coefficient), one entry per
/// distinct ratio, in a fixed order.
#[derive(Debug, Clone)]
pub struct TermList {
    pub ratios: Vec<f64>,
    pub coefs: Vec<f64>,
    /// Raw (q, d, m) triples with nonzero coefficient.
    pub raw_terms: usize,
}

/// Squarefree q <= B all of whose primes are <= P.
fn admissible_q(t: &MultiplicativeTables) -> Vec<u64> {
    (1..=t.b)
        .filter(|&q| t.mu[q as usize] != 0 && t.primes_of(q).iter().all(|&p| below(p, t.cutoff)))
        .collect()
}

/// Numbers <= limit whose prime support is exactly `primes`.
fn with_support(primes: &[u64], limit: u64, out: &mut Vec<u64>) {
    fn rec(primes: &[u64], acc: u64, limit: u64, out: &mut Vec<u64>) {
        let Some((&p, rest)) = primes.split_first() else {
            out.push(acc);
            return;
        };
        let mut x = acc;
        while x <= limit / p {
            x *= p;
            rec(rest, x, limit, out);
        }
    }
    rec(primes, 1, limit, out);
}

pub fn enumerate_terms(t: &MultiplicativeTables, mode: Enumeration) -> TermList {
    let b = t.b;
    let qs = admissible_q(t);
    // Candidate cofactors r coprime to q: their factor must be nonzero.
    let free: Vec<u64> = match mode {
        Enumeration::Recursive => (1..=b)
            .filter(|&r| {
                let s = t.smooth[r as usize] as usize;
                match t.variant {
                    Variant::Hat => t.ell[r as usize] != 0.0,
                    Variant::Tilde => t.ellp[s] != 0.0 && t.ell[r as usize / s] != 0.0,
                }
            })
            .collect(),
        Enumeration::ScanAll => Vec::new(),
    };
    let per_q: Vec<Vec<(u64, u64, f64)>> = qs
        .par_iter()
        .map(|&q| {
            let mut out = Vec::new();
            match mode {
                Enumeration::ScanAll => {
                    for m in 1..=b {
                        let d = num_integer::gcd(m, q);
                        let c = t.coefficient(q, d, m);
                        if c != 0.0 {
                            out.push((m, q, c));
                        }
                    }
                }
                Enumeration::Recursive => {
                    let primes = t.primes_of(q);
                    let mut heads = Vec::new();
                    for mask in 0u32..(1 << primes.len()) {
                        let sub: Vec<u64> =
                            primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
                        let d: u64 = sub.iter().product();
                        heads.clear();
                        with_support(&sub, b, &mut heads);
                        for &h in &heads {
                            for &r in free.iter().take_while(|&&r| r <= b / h) {
                                if num_integer::gcd(r, q) != 1 {
                                    continue;
                                }
                                let m = h * r;
                                let c = t.coefficient(q, d, m);
                                if c != 0.0 {
                                    out.push((m, q, c));
                                }
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut all: Vec<(u64, u64, u64, u64, f64)> = per_q
        .into_iter()
        .flatten()
        .map(|(m, q, c)| {
            let g = num_integer::gcd(m, q);
            (m / g, q / g, q, m, c)
        })
        .collect();
    let raw_terms = all.len();
    all.sort_by(|x, y| (x.0, x.1, x.2, x.3).cmp(&(y.0, y.1, y.2, y.3)));
    let mut ratios = Vec::new();
    let mut coefs = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let key = (all[i].0, all[i].1);
        let mut k = Kahan::default();
        while i < all.len() && (all[i].0, all[i].1) == key {
            k.add(all[i].4);
            i += 1;
        }
        ratios.push(key.0 as f64 / key.1 as f64);
        coefs.push(k.value());
    }
    TermList { ratios, coefs, raw_terms }
}

/// 2 pi sqrt(u) sum c J1(4 pi sqrt(u) x).
pub fn density_at(terms: &TermList, u: f64) -> f64 {
    let s = u.sqrt();
    let mut k = Kahan::default();
    for (&x, &c) in terms.ratios.iter().zip(&terms.coefs) {
        k.add(c * bessel::j1(4.0 * PI * s * x));
    }
    2.0 * PI * s * k.value()
}

/// The same sum integrated exactly against the normalised indicator of
/// (a, b] instead of evaluated at a point.
pub fn density_over_window(terms: &TermList, a: f64, b: f64) -> Result<f64> {
    let mut k = Kahan::default();
    for (&x, &c) in terms.ratios.iter().zip(&terms.coefs) {
        k.add(c * hankel_hat(a, b, x * x)?);
    }
    Ok(k.value())
}

/// RHS(j, P, B) at the midpoint of window j.
pub fn rhs_point(j: u64, grid: &WindowGrid, terms: &TermList) -> f64 {
    density_at(terms, grid.u_mid(j))
}

#[derive(Debug, Clone)]
pub struct DensityVector {
    pub grid: WindowGrid,
    pub cutoff: Cutoff,
    pub b: u64,
    pub variant: Variant,
    pub values: Vec<f64>,
}

impl DensityVector {
    /// CSV rows `j,u_mid,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,u_mid,value\n");
        for (j, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{:.12},{:.15e}\n", j, self.grid.u_mid(j as u64), v));
        }
        s
    }

    pub fn from_csv(text: &str, grid: WindowGrid) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Format(format!("line {}: expected j,u_mid,value", i + 1)));
            }
            values.push(f[2].trim().parse::<f64>().map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))?);
        }
        if values.len() as u64 != grid.r {
            return Err(Error::HeaderMismatch(format!("{} rows for a grid of r = {}", values.len(), grid.r)));
        }
        Ok(values)
    }
}

/// A prepared evaluator for one (B, P, variant).
pub struct Density {
    pub terms: TermList,
    pub cutoff: Cutoff,
    pub b: u64,
    pub variant: Variant,
}

impl Density {
    pub fn new(b: u64, cutoff: Cutoff, variant: Variant, lft: &mut LocalFactorTable) -> Result<Self> {
        Self::with_mode(b, cutoff, variant, lft, Enumeration::Recursive)
    }

    pub fn with_mode(b: u64, cutoff: Cutoff, variant: Variant, lft: &mut LocalFactorTable, mode: Enumeration) -> Result<Self> {
        let t = build_tables(b, cutoff, variant, lft)?;
        Ok(Density { terms: enumerate_terms(&t, mode), cutoff, b, variant })
    }

    pub fn vector(&self, grid: &WindowGrid) -> DensityVector {
        let values = (0..grid.r).into_par_iter().map(|j| rhs_point(j, grid, &self.terms)).collect();
        DensityVector { grid: *grid, cutoff: self.cutoff, b: self.b, variant: self.variant, values }
    }

    /// Window averages instead of midpoint values.
    pub fn vector_exact(&self, grid: &WindowGrid) -> Result<DensityVector> {
        let d = grid.delta();
        let values = (0..grid.r)
            .into_par_iter()
            .map(|j| density_over_window(&self.terms, j as f64 * d, (j + 1) as f64 * d))
            .collect::<Result<_>>()?;
        Ok(DensityVector { grid: *grid, cutoff: self.cutoff, b: self.b, variant: self.variant, values })
    }
}

pub fn rhs_vector(grid: &WindowGrid, cutoff: Cutoff, b: u64, variant: Variant, lft: &mut LocalFactorTable) -> Result<DensityVector> {
    Ok(Density::new(b, cutoff, variant, lft)?.vector(grid))
}

/// Block averages over `factor` consecutive windows.
pub fn rhs_coarse(dense: &DensityVector, factor: u64) -> Result<DensityVector> {
    let grid = dense.grid.coarsen(factor)?;
    let values = dense
        .values
        .chunks(factor as usize)
        .map(|c| {
            let mut k = Kahan::default();
            c.iter().for_each(|&v| k.add(v));
            k.value() / factor as f64
        })
        .collect();
    Ok(DensityVector { grid, values, ..dense.clone() })
}

/// Largest gap between RHS on 2r windows and its linear interpolation from
/// r windows, over 1 <= j <= 2r - 2.
pub fn interpolation_residual_of(coarse: &[f64], fine: &[f64]) -> f64 {
    let r = coarse.len();
    assert_eq!(fine.len(), 2 * r);
    let mut worst: f64 = 0.0;
    for j in 1..2 * r - 1 {
        // Fine midpoint (j + 1/2) / 2r lies between coarse midpoints i and i + 1.
        let i = (j - 1) / 2;
        let (wi, wn) = if j % 2 == 1 { (3.0, 1.0) } else { (1.0, 3.0) };
        let interp = (wi * coarse[i] + wn * coarse[i + 1]) / 4.0;
        worst = worst.max((fine[j] - interp).abs());
    }
    worst
}

pub fn interpolation_residual(coarse_r: u64, cutoff: Cutoff, b: u64, variant: Variant, lft: &mut LocalFactorTable) -> Result<f64> {
    let d = Density::new(b, cutoff, variant, lft)?;
    let c = d.vector(&WindowGrid::unit(coarse_r)?);
    let f = d.vector(&WindowGrid::unit(2 * coarse_r)?);
    Ok(interpolation_residual_of(&c.values, &f.values))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// max_j |RHS(j, P, B) - RHS(j, P, 2B)|.
pub fn convergence_in_b(grid: &WindowGrid, cutoff: Cutoff, b: u64, variant: Variant, lft: &mut LocalFactorTable) -> Result<f64> {
    let x = rhs_vector(grid, cutoff, b, variant, lft)?;
    let y = rhs_vector(grid, cutoff, 2 * b, variant, lft)?;
    Ok(max_abs_diff(&x.values, &y.values))
}

/// max_j |RHS(j, P, B) - RHS(j, B, B)|.
pub fn convergence_in_p(grid: &WindowGrid, p: u64, b: u64, variant: Variant, lft: &mut LocalFactorTable) -> Result<f64> {
    if p >= b {
        return Ok(0.0);
    }
    let x = rhs_vector(grid, Some(p), b, variant, lft)?;
    let y = rhs_vector(grid, Some(b), b, variant, lft)?;
    Ok(max_abs_diff(&x.values, &y.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfactors::{local_factor, to_f64, Flavor};

    #[test]
    fn pruning_is_exact() {
        let mut lft = LocalFactorTable::new();
        for variant in [Variant::Hat, Variant::Tilde] {
            for cutoff in [Some(1), Some(2), Some(16), None] {
                for b in [1u64, 17, 256] {
                    let t = build_tables(b, cutoff, variant, &mut lft).unwrap();
                    let x = enumerate_terms(&t, Enumeration::Recursive);
                    let y = enumerate_terms(&t, Enumeration::ScanAll);
                    assert_eq!(x.raw_terms, y.raw_terms);
                    assert_eq!(x.ratios, y.ratios);
                    assert_eq!(x.coefs, y.coefs);
                }
            }
        }
    }

    #[test]
    fn single_sum_at_p_one() {
        let mut lft = LocalFactorTable::new();
        let b = 3000u64;
        let d = Density::new(b, Some(1), Variant::Tilde, &mut lft).unwrap();
        let ell: Vec<f64> = (1..=b)
            .map(|m| {
                let mut v = 1.0;
                for (p, e) in crate::arith::factor(m) {
                    v *= to_f64(&local_factor(p, 2 * e, Flavor::Plain));
                }
                v
            })
            .collect();
        for u in [0.005f64, 0.1, 0.37, 0.995] {
            let direct: f64 = 2.0
                * PI
                * u.sqrt()
                * (1..=b).map(|m| ell[m as usize - 1] / m as f64 * bessel_j1(4.0 * PI * u.sqrt() * m as f64).unwrap()).sum::<f64>();
            assert!((density_at(&d.terms, u) - direct).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn b_one_base_case() {
        let mut lft = LocalFactorTable::new();
        let d = Density::new(1, None, Variant::Hat, &mut lft).unwrap();
        let u: f64 = 0.3;
        let want = 2.0 * PI * u.sqrt() * bessel_j1(4.0 * PI * u.sqrt()).unwrap();
        assert!((density_at(&d.terms, u) - want).abs() < 1e-15);
    }

    #[test]
    fn coarse_and_interpolation() {
        let grid = WindowGrid::unit(6).unwrap();
        let dv = DensityVector { grid, cutoff: Some(2), b: 1, variant: Variant::Hat, values: (0..6).map(|j| j as f64).collect() };
        assert_eq!(rhs_coarse(&dv, 1).unwrap().values, dv.values);
        assert_eq!(rhs_coarse(&dv, 3).unwrap().values, vec![1.0, 4.0]);
        assert!(rhs_coarse(&dv, 4).is_err());
        // A linear function of the midpoint interpolates exactly.
        let f = |u: f64| 2.0 * u - 0.3;
        let c: Vec<f64> = (0..8).map(|j| f((j as f64 + 0.5) / 8.0)).collect();
        let fine: Vec<f64> = (0..16).map(|j| f((j as f64 + 0.5) / 16.0)).collect();
        assert!(interpolation_residual_of(&c, &fine) < 1e-15);
    }

    #[test]
    fn hankel_hat_small_y() {
        for y in [1e-4, 1e-6, 1e-8] {
            let v = hankel_hat(0.0, 1.0, y).unwrap();
            // 2 pi int_0^1 sqrt(u) J1(4 pi sqrt(u y)) du ~ 2 pi^2 sqrt(y) / 2 * (2/2)
            let lead = 2.0 * PI * 2.0 * PI * y.sqrt() / 2.0;
            assert!((v / lead - 1.0).abs() < 1e-2, "y = {y}");
        }
        assert!(hankel_hat(0.5, 0.5, 1.0).is_err());
        assert!(hankel_hat(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hankel_hat_against_quadrature() {
        let (a, b, y) = (0.25, 0.5, 2.0);
        let f = |u: f64| 2.0 * PI * u.sqrt() * bessel_j1(4.0 * PI * (u * y).sqrt()).unwrap() / (b - a);
        let q = quad::adaptive_simpson(&f, a, b, 1e-12);
        assert!((hankel_hat(a, b, y).unwrap() - q).abs() < 1e-8);
    }

    #[test]
    fn hankel_hat_decay() {
        let mut worst: f64 = 0.0;
        let mut y = 1.0;
        while y <= 1e4 {
            worst = worst.max(hankel_hat(0.25, 0.5, y).unwrap().abs() * y);
            y *= 1.05;
        }
        assert!(worst < 10.0, "|W(y)| y reached {worst}");
    }

    #[test]
    fn exact_windows_track_midpoints() {
        let mut lft = LocalFactorTable::new();
        let d = Density::new(16, Some(4), Variant::Hat, &mut lft).unwrap();
        let g = WindowGrid::unit(2000).unwrap();
        let mid = d.vector(&g);
        let ex = d.vector_exact(&g).unwrap();
        let gap = max_abs_diff(&mid.values[20..], &ex.values[20..]);
        let g2 = WindowGrid::unit(4000).unwrap();
        let gap2 = max_abs_diff(&d.vector(&g2).values[40..], &d.vector_exact(&g2).unwrap().values[40..]);
        // Midpoint rule error is O(delta^2).
        assert!(gap < 1e-2 && gap2 < 0.3 * gap, "{gap} {gap2}");
    }

    #[test]
    fn convergence_in_p_at_b_is_zero() {
        let mut lft = LocalFactorTable::new();
        let g = WindowGrid::unit(10).unwrap();
        assert_eq!(convergence_in_p(&g, 64, 64, Variant::Hat, &mut lft).unwrap(), 0.0);
        assert!(convergence_in_p(&g, 2, 64, Variant::Hat, &mut lft).unwrap() > 0.0);
    }
}
