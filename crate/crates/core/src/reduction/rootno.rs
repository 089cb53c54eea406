//! Local root numbers at bad primes.

use std::collections::HashMap;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::arith::{legendre, valuation};
use crate::error::{Error, Result};

const TABLE_2: &str = include_str!("../../data/rootno_2.csv");
const TABLE_3: &str = include_str!("../../data/rootno_3.csv");
pub const TABLE_2_SHA256: &str = "ab6bf7d0c3e0d6b853946e6522417f02fe84826506b8743dd652e6c729e10659";
pub const TABLE_3_SHA256: &str = "5f89a7338988f14b0d86f778447ee36e5f055cff3330035d077e4c5511f8e266";

/// Valuations at or above `vd / 3 + CAP` (c4) or `vd / 2 + CAP` (c6) behave
/// like infinity for the local root number.
const CAP: u32 = 6;

/// Table key: class, v4, v6, vd, unit residues of c4 and c6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    pot_mult: bool,
    v4: Option<u32>,
    v6: Option<u32>,
    vd: Option<u32>,
    c4u: u32,
    c6u: u32,
}

type Table = HashMap<Key, i8>;

fn modulus(p: u64) -> i128 {
    if p == 2 {
        64
    } else {
        27
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn parse(text: &str, p: u64, sha: &str) -> Result<Table> {
    if sha256_hex(text.as_bytes()) != sha {
        return Err(Error::TableChecksum { p });
    }
    let opt = |s: &str| -> Result<Option<u32>> {
        match s {
            "inf" | "-" => Ok(None),
            _ => s.parse().map(Some).map_err(|_| Error::Format(format!("bad valuation {s}"))),
        }
    };
    let mut t = HashMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Format(format!("root number table line: {line}")));
        }
        let num = |s: &str| s.parse::<i64>().map_err(|_| Error::Format(line.to_string()));
        let key = Key {
            pot_mult: f[0] == "pm",
            v4: opt(f[1])?,
            v6: opt(f[2])?,
            vd: opt(f[3])?,
            c4u: num(f[4])? as u32,
            c6u: num(f[5])? as u32,
        };
        t.insert(key, num(f[6])? as i8);
    }
    Ok(t)
}

fn table(p: u64) -> Result<&'static Table> {
    static T2: OnceLock<std::result::Result<Table, String>> = OnceLock::new();
    static T3: OnceLock<std::result::Result<Table, String>> = OnceLock::new();
    let cell = if p == 2 { &T2 } else { &T3 };
    let r = cell.get_or_init(|| {
        let (text, sha) = if p == 2 { (TABLE_2, TABLE_2_SHA256) } else { (TABLE_3, TABLE_3_SHA256) };
        parse(text, p, sha).map_err(|e| e.to_string())
    });
    r.as_ref().map_err(|_| Error::TableChecksum { p })
}

fn unit_part(mut x: i128, p: u64) -> i128 {
    let q = p as i128;
    while x % q == 0 {
        x /= q;
    }
    x
}

/// Lexicographic minimum of (a u^4, b u^6) mod m over units u.
fn canonical(p: u64, a: i128, b: i128) -> (u32, u32) {
    let m = modulus(p);
    (1..m)
        .filter(|u| u % p as i128 != 0)
        .map(|u| {
            let u2 = u * u % m;
            let u4 = u2 * u2 % m;
            let u6 = u4 * u2 % m;
            ((a * u4 % m) as u32, (b * u6 % m) as u32)
        })
        .min()
        .unwrap()
}

fn key(p: u64, c4: i128, c6: i128, disc: i128) -> Key {
    let m = modulus(p);
    let vd = valuation(disc, p);
    let v4 = (c4 != 0).then(|| valuation(c4, p));
    let v6 = (c6 != 0).then(|| valuation(c6, p));
    let res = |x: i128| if x == 0 { 0 } else { unit_part(x, p).rem_euclid(m) };
    let (a, b) = (res(c4), res(c6));
    if let Some(v4) = v4 {
        if 3 * v4 < vd {
            let (c4u, c6u) = canonical(p, a, b);
            return Key { pot_mult: true, v4: Some(v4), v6, vd: None, c4u, c6u };
        }
    }
    let (v4, a) = match v4 {
        Some(v) if v < vd / 3 + CAP => (Some(v), a),
        _ => (None, 0),
    };
    let (v6, b) = match v6 {
        Some(v) if v < vd / 2 + CAP => (Some(v), b),
        _ => (None, 0),
    };
    let (c4u, c6u) = canonical(p, a, b);
    Key { pot_mult: false, v4, v6, vd: Some(vd), c4u, c6u }
}

/// Local root number at p in {2, 3} for additive reduction, from the
/// invariants of a model minimal at p.
pub fn additive_small(p: u64, c4: i128, c6: i128, disc: i128) -> Result<i8> {
    let k = key(p, c4, c6, disc);
    table(p)?.get(&k).copied().ok_or_else(|| Error::MissingRootNumber { p, key: format!("{k:?}") })
}

/// Local root number at p >= 5 for additive reduction (Rohrlich).
pub fn additive_large(p: u64, c4: i128, disc: i128) -> i8 {
    let vd = valuation(disc, p);
    let pot_mult = c4 != 0 && 3 * valuation(c4, p) < vd;
    let e = 12 / num_integer::gcd(12, vd);
    let sym = if pot_mult || e == 2 || e == 6 {
        -1
    } else if e == 3 {
        -3
    } else {
        -2
    };
    legendre(sym, p) as i8
}
