//! Subcommand definitions and their implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use murmur_core::curves::{count_curves, enumerate_curves, CurveSeed, HeightBound};
use murmur_core::frobenius::{an_stream, ap, ap_bsgs, ap_naive, CoefficientStreamSpec, StreamMode};
use murmur_core::grid::WindowGrid;
use murmur_core::lhs::{
    compute_records, lhs_aggregate, parse_plist, read_records, shard_seeds, CurveSet, PFilter, RecordHeader,
    RecordWriter,
};
use murmur_core::localfactors::brute::{definition_value, local_type_measures};
use murmur_core::localfactors::{to_f64, Flavor, LocalFactorTable};
use murmur_core::reduction::global_invariants;
use murmur_core::rhs::voronoi::{voronoi_check, Bump};
use murmur_core::rhs::{interpolation_residual_of, max_abs_diff, Cutoff, Density, DensityVector, Variant};
use serde_json::json;

use crate::config::{parse_shard, TablesSection};
use crate::pipeline;
use crate::Failure;

type Out<'a> = &'a mut dyn Write;

#[derive(Debug, Parser)]
#[command(name = "murmur", version, about = "Murmuration densities for elliptic curves ordered by naive height")]
pub struct Cli {
    /// Worker threads (default: MURMUR_THREADS, else all logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List curves with naive height <= X as CSV `A,B,H`.
    Enumerate(EnumerateArgs),
    /// Conductor, root number and local reduction data as JSON.
    Reduce(CurveArgs),
    /// Trace of Frobenius a_p at a good prime.
    Ap(ApArgs),
    /// Coefficients a_n as CSV `n,a_n`.
    An(AnArgs),
    /// Per-curve windowed sums, written to a record file.
    Sums(SumsArgs),
    /// Aggregate LHS(j, P, X) from a record file.
    Lhs(LhsArgs),
    /// Predicted density RHS(j, P, B) as CSV `j,u_mid,value`.
    Rhs(RhsArgs),
    /// Compare LHS against the block-averaged RHS.
    Compare(CompareArgs),
    /// Convergence tables in B, r or P.
    Tables(TablesArgs),
    /// Exact local factor l, lhat or ltilde.
    LocalFactors(LocalFactorArgs),
    /// Check the Voronoi identity numerically for one curve.
    VoronoiCheck(VoronoiArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long = "height-bound")]
    pub height_bound: u64,
    #[arg(long = "count-only")]
    pub count_only: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: i64,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: i64,
}

#[derive(Debug, Args)]
pub struct ApArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long)]
    pub p: u64,
    /// naive, bsgs, or auto (local data at bad primes).
    #[arg(long, default_value = "auto")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct AnArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long)]
    pub nmax: u64,
    /// all, prime, or coprime:P.
    #[arg(long, default_value = "all")]
    pub mode: String,
}

#[derive(Debug, Args)]
pub struct SumsArgs {
    #[arg(long = "height-bound")]
    pub height_bound: u64,
    #[arg(long, default_value = "1")]
    pub umax: String,
    #[arg(long)]
    pub r: u64,
    #[arg(long, default_value = "1,2,4,8,16,32,64,128,256,512,1024,inf")]
    pub plist: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "0/1")]
    pub shard: String,
}

#[derive(Debug, Args)]
pub struct LhsArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long = "P")]
    pub p: String,
    /// Height bound; defaults to every curve in the file.
    #[arg(long = "X")]
    pub x: Option<u64>,
    #[arg(long = "prime-conductor")]
    pub prime_conductor: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RhsArgs {
    #[arg(long, default_value = "1")]
    pub umax: String,
    #[arg(long)]
    pub r: u64,
    /// Smoothness cutoff; `inf` removes it.
    #[arg(long = "P")]
    pub p: String,
    #[arg(long = "B")]
    pub b: u64,
    #[arg(long, default_value = "hat")]
    pub variant: String,
    /// Integrate over each window instead of using its midpoint.
    #[arg(long = "window-exact")]
    pub window_exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// Dense RHS CSV on a grid refining the record grid.
    #[arg(long = "rhs")]
    pub rhs_csv: PathBuf,
    #[arg(long = "P")]
    pub p: String,
    #[arg(long = "X")]
    pub x: Option<u64>,
    #[arg(long = "prime-conductor")]
    pub prime_conductor: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// A `[tables]` config file; flags given alongside override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 1: B -> 2B, 2: interpolation r -> 2r, 3: P -> infinity.
    #[arg(long)]
    pub which: Option<u8>,
    /// Comma separated B values (which = 1) or a single B.
    #[arg(long = "B")]
    pub b: Option<String>,
    /// Comma separated r values (which = 2) or a single r.
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub plist: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct LocalFactorArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub nu: u32,
    #[arg(long, default_value = "plain")]
    pub flavor: String,
    /// Also evaluate the defining p-adic integral by refinement.
    #[arg(long = "check-bruteforce")]
    pub check_bruteforce: bool,
    /// Cache file of exact values, read and updated.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VoronoiArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long = "a", default_value_t = 1, allow_hyphen_values = true)]
    pub residue: i64,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Bump support lo,hi.
    #[arg(long, default_value = "0.2,1.0")]
    pub window: String,
    #[arg(long = "n-lhs")]
    pub n_lhs: Option<u64>,
    #[arg(long = "n-rhs")]
    pub n_rhs: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[arg(long = "height-bound")]
    pub height_bound: Option<u64>,
    #[arg(long)]
    pub shard: Option<String>,
}

pub fn dispatch(cli: Cli, out: Out) -> Result<(), Failure> {
    if !matches!(cli.command, Command::Run(_)) {
        crate::init_threads(cli.threads)?;
    }
    match cli.command {
        Command::Enumerate(a) => enumerate(a, out),
        Command::Reduce(a) => reduce(a, out),
        Command::Ap(a) => ap_cmd(a, out),
        Command::An(a) => an_cmd(a, out),
        Command::Sums(a) => sums(a, out),
        Command::Lhs(a) => lhs(a, out),
        Command::Rhs(a) => rhs(a, out),
        Command::Compare(a) => compare_cmd(a, out),
        Command::Tables(a) => tables(a, out),
        Command::LocalFactors(a) => local_factors(a, out),
        Command::VoronoiCheck(a) => voronoi(a, out),
        Command::Run(a) => pipeline::run_from_args(a, cli.threads, out),
    }
}

fn seed(c: &CurveArgs) -> Result<CurveSeed, Failure> {
    Ok(CurveSeed::new(c.a, c.b)?)
}

pub fn cutoff_of(s: &str) -> Result<Cutoff, Failure> {
    match PFilter::parse(s)? {
        PFilter::Coprime(p) => Ok(Some(p)),
        PFilter::Prime => Ok(None),
    }
}

fn list(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| Failure::Config(format!("{t:?} is not a positive integer"))))
        .collect()
}

/// Write to a file when given, else to `out`.
pub fn emit(path: Option<&Path>, text: &str, out: Out) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs, out: Out) -> Result<(), Failure> {
    let x = HeightBound(a.height_bound as u128);
    if a.count_only {
        writeln!(out, "{}", count_curves(x)?)?;
        return Ok(());
    }
    writeln!(out, "A,B,H")?;
    for s in enumerate_curves(x)? {
        writeln!(out, "{},{},{}", s.a, s.b, s.height())?;
    }
    Ok(())
}

fn reduce(a: CurveArgs, out: Out) -> Result<(), Failure> {
    let inv = global_invariants(&seed(&a)?)?;
    let locals: Vec<_> = inv
        .locals
        .iter()
        .map(|l| json!({"p": l.p, "kind": l.kind.name(), "exponent": l.conductor_exponent}))
        .collect();
    let v = json!({"N": inv.n, "eps": inv.eps, "locals": locals});
    writeln!(out, "{}", serde_json::to_string(&v).map_err(|e| Failure::Runtime(e.to_string()))?)?;
    Ok(())
}

fn ap_cmd(a: ApArgs, out: Out) -> Result<(), Failure> {
    let s = seed(&a.curve)?;
    let v = match a.method.as_str() {
        "naive" => ap_naive(&s, a.p)?,
        "bsgs" => ap_bsgs(&s, a.p)?,
        "auto" => {
            if !murmur_core::arith::is_prime(a.p) {
                return Err(Failure::Config(format!("{} is not prime", a.p)));
            }
            ap(&s, &global_invariants(&s)?, a.p)?
        }
        m => return Err(Failure::Config(format!("unknown method {m:?} (naive|bsgs|auto)"))),
    };
    writeln!(out, "{v}")?;
    Ok(())
}

fn parse_mode(s: &str) -> Result<StreamMode, Failure> {
    match s {
        "all" => Ok(StreamMode::All),
        "prime" => Ok(StreamMode::Prime),
        _ => match s.strip_prefix("coprime:").and_then(|p| p.parse().ok()) {
            Some(p) => Ok(StreamMode::CoprimeTo(p)),
            None => Err(Failure::Config(format!("mode {s:?} must be all, prime or coprime:P"))),
        },
    }
}

fn an_cmd(a: AnArgs, out: Out) -> Result<(), Failure> {
    let s = seed(&a.curve)?;
    let inv = global_invariants(&s)?;
    let mode = parse_mode(&a.mode)?;
    let mut rows = Vec::new();
    an_stream(&s, &inv, CoefficientStreamSpec { n_max: a.nmax, mode }, |n, v| rows.push((n, v)))?;
    rows.sort_unstable();
    writeln!(out, "n,a_n")?;
    for (n, v) in rows {
        writeln!(out, "{n},{v}")?;
    }
    Ok(())
}

fn sums(a: SumsArgs, out: Out) -> Result<(), Failure> {
    let (un, ud) = WindowGrid::parse_umax(&a.umax)?;
    let grid = WindowGrid::new(un, ud, a.r)?;
    let plist = parse_plist(&a.plist)?;
    let shard = parse_shard(&a.shard)?;
    let n = pipeline::write_shard(&a.out, a.height_bound, &grid, &plist, shard)?;
    writeln!(out, "wrote {n} curve records to {}", a.out.display())?;
    Ok(())
}

fn lhs(a: LhsArgs, out: Out) -> Result<(), Failure> {
    let file = read_records(&a.records, None)?;
    let p = PFilter::parse(&a.p)?;
    let x = a.x.unwrap_or(u64::MAX);
    let values = lhs_aggregate(&file, p, x, CurveSet::for_flag(p, a.prime_conductor))?;
    let grid = file.header.grid()?;
    let dv = DensityVector { grid, cutoff: None, b: 0, variant: Variant::Hat, values };
    emit(a.out.as_deref(), &dv.to_csv(), out)
}

fn rhs(a: RhsArgs, out: Out) -> Result<(), Failure> {
    let (un, ud) = WindowGrid::parse_umax(&a.umax)?;
    let grid = WindowGrid::new(un, ud, a.r)?;
    let mut lft = LocalFactorTable::new();
    let d = Density::new(a.b, cutoff_of(&a.p)?, Variant::parse(&a.variant)?, &mut lft)?;
    let v = if a.window_exact { d.vector_exact(&grid)? } else { d.vector(&grid) };
    emit(a.out.as_deref(), &v.to_csv(), out)
}

fn compare_cmd(a: CompareArgs, out: Out) -> Result<(), Failure> {
    let file = read_records(&a.records, None)?;
    let p = PFilter::parse(&a.p)?;
    let text = std::fs::read_to_string(&a.rhs_csv)?;
    let c = pipeline::compare(&file, &text, p, a.x.unwrap_or(u64::MAX), a.prime_conductor)?;
    emit(a.out.as_deref(), &c.to_csv(), out)?;
    writeln!(out, "mean_abs_diff,{:.6}", c.mean_abs_diff)?;
    Ok(())
}

fn tables_spec(a: TablesArgs) -> Result<TablesSection, Failure> {
    let mut t = match &a.config {
        Some(path) => TablesSection::from_toml(
            &std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?,
        )?,
        None => TablesSection::from_toml("[tables]\nwhich = 0\nB = [0]\nr = [100]\n")?,
    };
    if let Some(w) = a.which {
        t.which = w;
    }
    if let Some(b) = &a.b {
        t.b = list(b)?;
    }
    if let Some(r) = &a.r {
        t.r = list(r)?;
    }
    if let Some(p) = a.plist {
        t.plist = p;
    }
    if let Some(v) = a.variant {
        t.variant = v;
    }
    if t.b.contains(&0) {
        return Err(Failure::Config("--B is required".into()));
    }
    Ok(t)
}

fn tables(a: TablesArgs, out: Out) -> Result<(), Failure> {
    let t = tables_spec(a)?;
    let variant = Variant::parse(&t.variant)?;
    let plist: Vec<Cutoff> = t.plist.split(',').map(cutoff_of).collect::<Result<_, _>>()?;
    let label = |c: &Cutoff| c.map(|p| p.to_string()).unwrap_or_else(|| "inf".into());
    let mut lft = LocalFactorTable::new();
    match t.which {
        1 => {
            let grid = WindowGrid::unit(t.r[0])?;
            writeln!(out, "B,P,value")?;
            for c in &plist {
                for &b in &t.b {
                    let x = Density::new(b, *c, variant, &mut lft)?.vector(&grid);
                    let y = Density::new(2 * b, *c, variant, &mut lft)?.vector(&grid);
                    writeln!(out, "{b},{},{:.6}", label(c), max_abs_diff(&x.values, &y.values))?;
                }
            }
        }
        2 => {
            let b = t.b[0];
            writeln!(out, "r,P,value")?;
            for c in &plist {
                let d = Density::new(b, *c, variant, &mut lft)?;
                for &r in &t.r {
                    let coarse = d.vector(&WindowGrid::unit(r)?);
                    let fine = d.vector(&WindowGrid::unit(2 * r)?);
                    writeln!(out, "{r},{},{:.6}", label(c), interpolation_residual_of(&coarse.values, &fine.values))?;
                }
            }
        }
        3 => {
            let b = t.b[0];
            let grid = WindowGrid::unit(t.r[0])?;
            let limit = Density::new(b, Some(b), variant, &mut lft)?.vector(&grid);
            writeln!(out, "P,value")?;
            for c in &plist {
                let v = match c {
                    Some(p) if *p < b => {
                        max_abs_diff(&Density::new(b, *c, variant, &mut lft)?.vector(&grid).values, &limit.values)
                    }
                    _ => 0.0,
                };
                writeln!(out, "{},{:.6}", label(c), v)?;
            }
        }
        w => return Err(Failure::Config(format!("--which {w}: expected 1, 2 or 3"))),
    }
    Ok(())
}

fn local_factors(a: LocalFactorArgs, out: Out) -> Result<(), Failure> {
    if !murmur_core::arith::is_prime(a.p) {
        return Err(Failure::Config(format!("{} is not prime", a.p)));
    }
    let flavor = Flavor::parse(&a.flavor)?;
    let mut lft = match &a.cache {
        Some(path) if path.exists() => LocalFactorTable::load(path)?,
        _ => LocalFactorTable::new(),
    };
    let v = lft.get(a.p, a.nu, flavor);
    writeln!(out, "{},{},{},{}/{},{:.17e}", a.p, a.nu, flavor.name(), v.numer(), v.denom(), to_f64(&v))?;
    if let Some(path) = &a.cache {
        lft.save(path)?;
    }
    if a.check_bruteforce {
        if a.p > 7 {
            return Err(Failure::Config("the brute-force integral is limited to p <= 7".into()));
        }
        let b = definition_value(&local_type_measures(a.p), a.p, a.nu, flavor);
        writeln!(out, "bruteforce,{}/{}", b.numer(), b.denom())?;
        if b != v {
            return Err(Failure::Tolerance(format!("closed form {v} differs from the defining integral {b}")));
        }
        writeln!(out, "match")?;
    }
    Ok(())
}

fn voronoi(a: VoronoiArgs, out: Out) -> Result<(), Failure> {
    let s = seed(&a.curve)?;
    let (lo, hi) = a
        .window
        .split_once(',')
        .and_then(|(x, y)| Some((x.trim().parse::<f64>().ok()?, y.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| Failure::Config(format!("window {:?} must be lo,hi", a.window)))?;
    let w = Bump::new(lo, hi, 1.0)?;
    let n = global_invariants(&s)?.n;
    let n_lhs = a.n_lhs.unwrap_or((hi * n as f64).ceil() as u64);
    let n_rhs = a.n_rhs.unwrap_or(pipeline::default_voronoi_cut(a.q));
    let r = voronoi_check(&s, a.q, a.residue, &w, n_lhs, n_rhs)?;
    let pass = r.diff < a.tol;
    let v = json!({"N": r.conductor, "q": a.q, "a": a.residue, "lhs": r.lhs, "rhs": r.rhs, "diff": r.diff, "tol": a.tol, "pass": pass});
    writeln!(out, "{}", serde_json::to_string(&v).map_err(|e| Failure::Runtime(e.to_string()))?)?;
    if !pass {
        return Err(Failure::Tolerance(format!("|lhs - rhs| = {:.3e} >= {:.1e}", r.diff, a.tol)));
    }
    Ok(())
}

/// Header for a record file.
pub fn header_for(grid: &WindowGrid, plist: &[PFilter]) -> RecordHeader {
    RecordHeader::new(grid, plist)
}

/// Compute one shard of records and stream them to `path`.
pub fn records_for_shard(x: u64, grid: &WindowGrid, plist: &[PFilter], shard: (u64, u64), path: &Path) -> Result<usize, Failure> {
    let seeds = shard_seeds(HeightBound(x as u128), shard)?;
    let rows = compute_records(&seeds, grid, plist)?;
    let tmp = path.with_extension("partial");
    let mut w = RecordWriter::create(&tmp, &header_for(grid, plist))?;
    for r in &rows {
        w.push(r)?;
    }
    w.finish()?;
    std::fs::rename(&tmp, path)?;
    Ok(rows.len())
}
