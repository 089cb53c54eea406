//! Run configuration: a TOML file plus command line overrides.

use std::path::PathBuf;

use murmur_core::grid::WindowGrid;
use murmur_core::lhs::{parse_plist, PFilter};
use murmur_core::rhs::Variant;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSection {
    pub height_bound: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhsSection {
    #[serde(default = "one")]
    pub umax: String,
    pub r: u64,
    #[serde(default = "default_plist")]
    pub plist: String,
    #[serde(default)]
    pub prime_conductor: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsSection {
    pub r: u64,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(default = "hat")]
    pub variant: String,
    #[serde(default)]
    pub window_exact: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: PathBuf,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "whole")]
    pub shard: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub curves: CurvesSection,
    pub lhs: LhsSection,
    pub rhs: RhsSection,
    pub run: RunSection,
}

fn one() -> String {
    "1".into()
}

fn hat() -> String {
    "hat".into()
}

fn whole() -> String {
    "0/1".into()
}

fn default_plist() -> String {
    "1,2,4,8,16,32,64,128,256,512,1024,inf".into()
}

/// A convergence table request, as read from a `[tables]` file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesSection {
    pub which: u8,
    #[serde(rename = "B")]
    pub b: Vec<u64>,
    pub r: Vec<u64>,
    #[serde(default = "table_plist")]
    pub plist: String,
    #[serde(default = "hat")]
    pub variant: String,
}

fn table_plist() -> String {
    "2,4,8,16,32,64,128,256,512,1024".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TablesFile {
    tables: TablesSection,
}

impl TablesSection {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        let f: TablesFile = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        if f.tables.b.is_empty() || f.tables.r.is_empty() {
            return Err(Failure::Config("tables.B and tables.r must be non-empty".into()));
        }
        Ok(f.tables)
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub height_bound: u64,
    pub lhs_grid: WindowGrid,
    pub rhs_grid: WindowGrid,
    pub b: u64,
    pub plist: Vec<PFilter>,
    pub variant: Variant,
    pub window_exact: bool,
    pub prime_conductor: bool,
    pub shard: (u64, u64),
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

pub fn parse_shard(s: &str) -> Result<(u64, u64), Failure> {
    let bad = || Failure::Config(format!("shard {s:?} must look like i/k with i < k"));
    let (i, k) = s.split_once('/').ok_or_else(bad)?;
    let (i, k): (u64, u64) = (i.trim().parse().map_err(|_| bad())?, k.trim().parse().map_err(|_| bad())?);
    if k == 0 || i >= k {
        return Err(bad());
    }
    Ok((i, k))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self, Failure> {
        let (un, ud) = WindowGrid::parse_umax(&raw.lhs.umax)?;
        if un == 0 || un > ud {
            return Err(Failure::Config(format!("u_max = {} must lie in (0, 1]", raw.lhs.umax)));
        }
        if raw.lhs.r == 0 || raw.rhs.r % raw.lhs.r != 0 {
            return Err(Failure::Config(format!(
                "rhs.r = {} must be a positive multiple of lhs.r = {}",
                raw.rhs.r, raw.lhs.r
            )));
        }
        Ok(RunConfig {
            height_bound: raw.curves.height_bound,
            lhs_grid: WindowGrid::new(un, ud, raw.lhs.r)?,
            rhs_grid: WindowGrid::new(un, ud, raw.rhs.r)?,
            b: raw.rhs.b,
            plist: parse_plist(&raw.lhs.plist)?,
            variant: Variant::parse(&raw.rhs.variant)?,
            window_exact: raw.rhs.window_exact,
            prime_conductor: raw.lhs.prime_conductor,
            shard: parse_shard(&raw.run.shard)?,
            out_dir: raw.run.out_dir,
            threads: raw.run.threads,
        })
    }
}
