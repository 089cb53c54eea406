//! End to end run: records, then LHS, RHS and comparison for every P.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use murmur_core::grid::WindowGrid;
use murmur_core::lhs::{lhs_aggregate, merge_records, read_records, CurveRecordFile, CurveSet, PFilter, RecordHeader};
use murmur_core::localfactors::LocalFactorTable;
use murmur_core::rhs::{rhs_coarse, Density, DensityVector};
use serde_json::json;

use crate::commands::{records_for_shard, RunArgs};
use crate::config::{parse_shard, RunConfig};
use crate::Failure;

/// Default RHS truncation for the Voronoi check at modulus q.
pub fn default_voronoi_cut(q: u64) -> u64 {
    3000 * q * q
}

/// Compute one shard and stream it to `path`. Returns the number of rows.
pub fn write_shard(path: &Path, x: u64, grid: &WindowGrid, plist: &[PFilter], shard: (u64, u64)) -> Result<usize, Failure> {
    records_for_shard(x, grid, plist, shard, path)
}

/// Per-window comparison of LHS with the block-averaged RHS.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub grid: WindowGrid,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub mean_abs_diff: f64,
    pub curves: usize,
}

impl Comparison {
    pub fn new(grid: WindowGrid, lhs: Vec<f64>, rhs: Vec<f64>, curves: usize) -> Result<Self, Failure> {
        if lhs.len() != rhs.len() {
            return Err(Failure::Config(format!("grid mismatch: {} LHS windows, {} RHS windows", lhs.len(), rhs.len())));
        }
        let mean_abs_diff = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).sum::<f64>() / lhs.len() as f64;
        Ok(Comparison { grid, lhs, rhs, mean_abs_diff, curves })
    }

    /// CSV rows `j,u_mid,lhs,rhs,diff`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,u_mid,lhs,rhs,diff\n");
        for (j, (l, r)) in self.lhs.iter().zip(&self.rhs).enumerate() {
            s.push_str(&format!("{},{:.12},{:.15e},{:.15e},{:.15e}\n", j, self.grid.u_mid(j as u64), l, r, l - r));
        }
        s
    }
}

fn admitted(file: &CurveRecordFile, x: u64) -> usize {
    file.rows.iter().filter(|c| c.h <= x).count()
}

/// Compare the records against a dense RHS CSV whose window count is a
/// multiple of the record grid's.
pub fn compare(file: &CurveRecordFile, rhs_csv: &str, p: PFilter, x: u64, prime_conductor: bool) -> Result<Comparison, Failure> {
    let grid = file.header.grid()?;
    let rows = rhs_csv.lines().skip(1).filter(|l| !l.trim().is_empty()).count() as u64;
    if rows == 0 || rows % grid.r != 0 {
        return Err(Failure::Config(format!("grid mismatch: {rows} RHS windows do not refine r = {}", grid.r)));
    }
    let dense_grid = WindowGrid::new(grid.umax_num, grid.umax_den, rows)?;
    let values = DensityVector::from_csv(rhs_csv, dense_grid)?;
    let dense = DensityVector { grid: dense_grid, cutoff: None, b: 0, variant: murmur_core::rhs::Variant::Hat, values };
    let coarse = rhs_coarse(&dense, rows / grid.r)?;
    let lhs = lhs_aggregate(file, p, x, CurveSet::for_flag(p, prime_conductor))?;
    Comparison::new(grid, lhs, coarse.values, admitted(file, x))
}

fn shard_path(dir: &Path, x: u64, (i, k): (u64, u64)) -> PathBuf {
    dir.join(format!("records-X{x}-{i}-of-{k}.bin"))
}

/// Reuse a shard file when it exists with the expected header.
fn ensure_shard(dir: &Path, cfg: &RunConfig, shard: (u64, u64), log: &mut dyn Write) -> Result<PathBuf, Failure> {
    let path = shard_path(dir, cfg.height_bound, shard);
    let header = RecordHeader::new(&cfg.lhs_grid, &cfg.plist);
    if path.exists() && read_records(&path, Some(&header)).is_ok() {
        writeln!(log, "sums: reusing {}", path.display())?;
        return Ok(path);
    }
    let n = write_shard(&path, cfg.height_bound, &cfg.lhs_grid, &cfg.plist, shard)?;
    writeln!(log, "sums: wrote {n} records to {}", path.display())?;
    Ok(path)
}

/// Run every stage. Returns false when only a partial set of shards exists.
pub fn run_pipeline(cfg: &RunConfig, log: &mut dyn Write) -> Result<bool, Failure> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir)?;
    let header = RecordHeader::new(&cfg.lhs_grid, &cfg.plist);
    ensure_shard(dir, cfg, cfg.shard, log)?;

    let k = cfg.shard.1;
    let paths: Vec<PathBuf> = (0..k).map(|i| shard_path(dir, cfg.height_bound, (i, k))).collect();
    let missing: Vec<&PathBuf> = paths.iter().filter(|p| !p.exists()).collect();
    if !missing.is_empty() {
        writeln!(log, "run: {} of {k} shards present, stopping before aggregation", k as usize - missing.len())?;
        return Ok(false);
    }
    let parts = paths.iter().map(|p| read_records(p, Some(&header))).collect::<Result<Vec<_>, _>>()?;
    let file = merge_records(parts)?;
    murmur_core::lhs::write_records(&dir.join("records.bin"), &file)?;

    let factor = cfg.rhs_grid.r / cfg.lhs_grid.r;
    let mut lft = LocalFactorTable::new();
    let mut summary = BTreeMap::new();
    for &p in &cfg.plist {
        let label = p.label();
        let cutoff = match p {
            PFilter::Coprime(pp) => Some(pp),
            PFilter::Prime => None,
        };
        let density = Density::new(cfg.b, cutoff, cfg.variant, &mut lft)?;
        let dense = if cfg.window_exact { density.vector_exact(&cfg.rhs_grid)? } else { density.vector(&cfg.rhs_grid) };
        let coarse = rhs_coarse(&dense, factor)?;
        let set = CurveSet::for_flag(p, cfg.prime_conductor);
        let lhs = match lhs_aggregate(&file, p, cfg.height_bound, set) {
            Ok(v) => v,
            Err(murmur_core::Error::InvalidArgument(m)) if m.contains("no curves") => {
                writeln!(log, "P = {label}: no admissible curves, skipped")?;
                summary.insert(label, json!(null));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let lhs_v = DensityVector { values: lhs.clone(), grid: cfg.lhs_grid, ..coarse.clone() };
        let cmp = Comparison::new(cfg.lhs_grid, lhs, coarse.values, admitted(&file, cfg.height_bound))?;
        std::fs::write(dir.join(format!("lhs_{label}.csv")), lhs_v.to_csv())?;
        std::fs::write(dir.join(format!("rhs_{label}.csv")), dense.to_csv())?;
        std::fs::write(dir.join(format!("compare_{label}.csv")), cmp.to_csv())?;
        writeln!(log, "P = {label}: mean |LHS - RHS'| = {:.4}", cmp.mean_abs_diff)?;
        summary.insert(label, json!({ "mean_abs_diff": format!("{:.6}", cmp.mean_abs_diff) }));
    }
    let doc = json!({
        "height_bound": cfg.height_bound,
        "curves": file.rows.len(),
        "u_max": format!("{}/{}", cfg.lhs_grid.umax_num, cfg.lhs_grid.umax_den),
        "r_lhs": cfg.lhs_grid.r,
        "r_rhs": cfg.rhs_grid.r,
        "B": cfg.b,
        "variant": cfg.variant.name(),
        "window_exact": cfg.window_exact,
        "prime_conductor": cfg.prime_conductor,
        "results": summary,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(true)
}

pub fn run_from_args(a: RunArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(d) = a.out_dir {
        cfg.out_dir = d;
    }
    if let Some(x) = a.height_bound {
        cfg.height_bound = x;
    }
    if let Some(s) = a.shard {
        cfg.shard = parse_shard(&s)?;
    }
    crate::init_threads(threads.or(cfg.threads))?;
    run_pipeline(&cfg, out)?;
    Ok(())
}
