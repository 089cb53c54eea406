//! Windowed sums s_{j,P}(E) and the empirical averages LHS(j, P, X).

pub mod records;

use rayon::prelude::*;

use crate::arith::primes_up_to;
use crate::curves::{enumerate_curves, CurveSeed, HeightBound};
use crate::error::{Error, Result};
use crate::frobenius::an_stream_lpf;
pub use crate::grid::WindowGrid;
use crate::reduction::{global_invariants, GlobalInvariants};
use crate::rhs::Kahan;
pub use records::{merge_records, read_records, write_records, CurveRecord, CurveRecordFile, RecordHeader, RecordWriter};

/// Which n enter a row of sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PFilter {
    /// n with no prime factor <= P (P = 1 keeps every n).
    Coprime(u64),
    /// n prime; the P = infinity row.
    Prime,
}

impl PFilter {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(PFilter::Prime),
            t => t
                .parse::<u64>()
                .ok()
                .filter(|&p| p >= 1 && p != u64::MAX)
                .map(PFilter::Coprime)
                .ok_or_else(|| Error::InvalidArgument(format!("bad P {s:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PFilter::Coprime(p) => p.to_string(),
            PFilter::Prime => "inf".into(),
        }
    }

    pub(crate) fn code(&self) -> u64 {
        match self {
            PFilter::Coprime(p) => *p,
            PFilter::Prime => u64::MAX,
        }
    }

    pub(crate) fn from_code(c: u64) -> Self {
        if c == u64::MAX {
            PFilter::Prime
        } else {
            PFilter::Coprime(c)
        }
    }
}

/// Sorted, deduplicated P values; finite ones first, then the prime row.
pub fn normalize_plist(mut v: Vec<PFilter>) -> Result<Vec<PFilter>> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty P list".into()));
    }
    v.sort();
    v.dedup();
    Ok(v)
}

/// 1, 2, 4, ..., 1024 and the prime row.
pub fn default_plist() -> Vec<PFilter> {
    let mut v: Vec<PFilter> = (0..=10).map(|k| PFilter::Coprime(1 << k)).collect();
    v.push(PFilter::Prime);
    v
}

pub fn parse_plist(s: &str) -> Result<Vec<PFilter>> {
    normalize_plist(s.split(',').map(PFilter::parse).collect::<Result<_>>()?)
}

/// Exact integer sums s_{j,P}(E), row-major over `plist` then j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumMatrix {
    pub plist: Vec<PFilter>,
    pub r: usize,
    pub s: Vec<i64>,
}

impl SumMatrix {
    pub fn row(&self, i: usize) -> &[i64] {
        &self.s[i * self.r..(i + 1) * self.r]
    }
}

pub fn accumulate_sums(seed: &CurveSeed, inv: &GlobalInvariants, grid: &WindowGrid, plist: &[PFilter]) -> Result<SumMatrix> {
    let plist = normalize_plist(plist.to_vec())?;
    let r = grid.r as usize;
    let finite: Vec<u64> = plist
        .iter()
        .filter_map(|f| match f {
            PFilter::Coprime(p) => Some(*p),
            PFilter::Prime => None,
        })
        .collect();
    let prime_row = plist.iter().position(|f| *f == PFilter::Prime);
    // acc[c - 1] collects n passing exactly the first c finite filters;
    // suffix sums turn that into per-P totals.
    let mut acc = vec![0i64; plist.len() * r];
    let n_cond = inv.n;
    let n_max = grid.n_max(n_cond);
    let eps = inv.eps as i64;
    an_stream_lpf(seed, inv, n_max, |n, a, lpf| {
        if a == 0 {
            return;
        }
        let Some(j) = grid.bin(n, n_cond) else { return };
        let j = j as usize;
        let v = eps * a;
        let c = finite.partition_point(|&p| p < lpf);
        if c > 0 {
            acc[(c - 1) * r + j] += v;
        }
        if let Some(i) = prime_row {
            if n > 1 && lpf == n {
                acc[i * r + j] += v;
            }
        }
    })?;
    for i in (0..finite.len().saturating_sub(1)).rev() {
        for j in 0..r {
            acc[i * r + j] += acc[(i + 1) * r + j];
        }
    }
    Ok(SumMatrix { plist, r, s: acc })
}

/// Which curves enter the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSet {
    All,
    /// p does not divide N for every p <= P.
    GoodBelowP,
    /// N prime.
    PrimeConductor,
}

impl CurveSet {
    /// The set matching the prime-conductor flag for this row.
    pub fn for_flag(p: PFilter, prime_conductor_only: bool) -> Self {
        match (prime_conductor_only, p) {
            (false, _) => CurveSet::All,
            (true, PFilter::Coprime(_)) => CurveSet::GoodBelowP,
            (true, PFilter::Prime) => CurveSet::PrimeConductor,
        }
    }

    fn admits(&self, n: u64, p: PFilter) -> bool {
        match self {
            CurveSet::All => true,
            CurveSet::PrimeConductor => crate::arith::is_prime(n),
            CurveSet::GoodBelowP => match p {
                PFilter::Coprime(pp) => primes_up_to(pp).iter().all(|q| n % q != 0),
                PFilter::Prime => crate::arith::is_prime(n),
            },
        }
    }
}

/// prod_{p <= P} (1 - 1/p)^{-1}
pub fn mertens_factor(p: u64) -> f64 {
    primes_up_to(p).iter().map(|&q| q as f64 / (q as f64 - 1.0)).product()
}

/// LHS(j, P, X) for every window j.
pub fn lhs_aggregate(file: &CurveRecordFile, p: PFilter, x: u64, set: CurveSet) -> Result<Vec<f64>> {
    let h = &file.header;
    let i = h
        .plist
        .iter()
        .position(|f| *f == p)
        .ok_or_else(|| Error::InvalidArgument(format!("P = {} is not in the record file", p.label())))?;
    let grid = h.grid()?;
    let r = grid.r as usize;
    let delta = grid.delta();
    let mut rows: Vec<&CurveRecord> = file.rows.iter().filter(|c| c.h <= x && set.admits(c.n, p)).collect();
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no curves under bound".into()));
    }
    rows.sort_by_key(|c| c.key());
    let fixed = match p {
        PFilter::Coprime(pp) => Some(mertens_factor(pp)),
        PFilter::Prime => None,
    };
    let count = rows.len() as f64;
    Ok((0..r)
        .map(|j| {
            let mut k = Kahan::default();
            for c in &rows {
                let s = c.sums[i * r + j];
                if s == 0 {
                    continue;
                }
                let n = c.n as f64;
                let w = fixed.unwrap_or_else(|| ((2 * j + 1) as f64 * delta * n / 2.0).ln());
                k.add(w * s as f64 / n);
            }
            k.value() / (delta * count)
        })
        .collect())
}

/// Seeds with A in the i-th of k contiguous slices of [-A_max, A_max].
pub fn shard_seeds(x: HeightBound, shard: (u64, u64)) -> Result<Vec<CurveSeed>> {
    let (i, k) = shard;
    if k == 0 || i >= k {
        return Err(Error::InvalidArgument(format!("bad shard {i}/{k}")));
    }
    let amax = x.a_max()? as i128;
    let width = 2 * amax + 1;
    let lo = -amax + width * i as i128 / k as i128;
    let hi = -amax + width * (i as i128 + 1) / k as i128;
    Ok(enumerate_curves(x)?.filter(|s| (lo..hi).contains(&(s.a as i128))).collect())
}

/// Per-curve records for a set of seeds, computed in parallel, returned in
/// input order.
pub fn compute_records(seeds: &[CurveSeed], grid: &WindowGrid, plist: &[PFilter]) -> Result<Vec<CurveRecord>> {
    seeds
        .par_iter()
        .map(|seed| {
            let inv = global_invariants(seed)?;
            let m = accumulate_sums(seed, &inv, grid, plist)?;
            let h = u64::try_from(seed.height()).map_err(|_| Error::Overflow("height above 2^64"))?;
            Ok(CurveRecord { a: seed.a, b: seed.b, h, n: inv.n, eps: inv.eps, sums: m.s })
        })
        .collect()
}
