//! Memoised local factors with an optional on-disk cache.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{local_factor, Flavor};
use crate::error::{Error, Result};

/// (p, nu, flavor) -> exact local factor.
#[derive(Debug, Default, Clone)]
pub struct LocalFactorTable {
    memo: HashMap<(u64, u32, Flavor), BigRational>,
}

impl LocalFactorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, p: u64, nu: u32, flavor: Flavor) -> BigRational {
        self.memo.entry((p, nu, flavor)).or_insert_with(|| local_factor(p, nu, flavor)).clone()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    /// Read `p,nu,flavor,num/den` lines.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut memo = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let bad = || Error::Format(format!("cache line {line:?}"));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            let (n, d) = f[3].split_once('/').ok_or_else(bad)?;
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            let key = (f[0].parse().map_err(|_| bad())?, f[1].parse().map_err(|_| bad())?, Flavor::parse(f[2])?);
            memo.insert(key, BigRational::new(n, d));
        }
        Ok(LocalFactorTable { memo })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut keys: Vec<_> = self.memo.keys().copied().collect();
        keys.sort();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for k in keys {
            let v = &self.memo[&k];
            writeln!(f, "{},{},{},{}/{}", k.0, k.1, k.2.name(), v.numer(), v.denom())?;
        }
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_roundtrip() {
        let mut t = LocalFactorTable::new();
        for p in [2u64, 3, 5] {
            for nu in 0..8 {
                for fl in [Flavor::Plain, Flavor::Hat, Flavor::Tilde] {
                    t.get(p, nu, fl);
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lf.csv");
        t.save(&path).unwrap();
        let mut u = LocalFactorTable::load(&path).unwrap();
        assert_eq!(u.len(), t.len());
        assert_eq!(u.get(2, 2, Flavor::Hat), t.get(2, 2, Flavor::Hat));
    }
}
