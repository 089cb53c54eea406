//! Binary per-curve record files.
//!
//! Layout (little endian): magic `MURMREC\0`, version u32, u_max numerator
//! u64, denominator u64, r u64, count u32 and that many P codes u64
//! (u64::MAX is the prime row). Then one row per curve until end of file:
//! A, B as zigzag varints, H, N as varints, eps as one signed byte, and
//! |P list| * r sums as zigzag varints.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use integer_encoding::{VarIntReader, VarIntWriter};

use super::PFilter;
use crate::curves::CurveSeed;
use crate::error::{Error, Result};
use crate::grid::WindowGrid;

const MAGIC: &[u8; 8] = b"MURMREC\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordHeader {
    pub version: u32,
    pub umax_num: u64,
    pub umax_den: u64,
    pub r: u64,
    pub plist: Vec<PFilter>,
}

impl RecordHeader {
    pub fn new(grid: &WindowGrid, plist: &[PFilter]) -> Self {
        RecordHeader {
            version: FORMAT_VERSION,
            umax_num: grid.umax_num,
            umax_den: grid.umax_den,
            r: grid.r,
            plist: plist.to_vec(),
        }
    }

    pub fn grid(&self) -> Result<WindowGrid> {
        WindowGrid::new(self.umax_num, self.umax_den, self.r)
    }

    fn width(&self) -> usize {
        self.plist.len() * self.r as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRecord {
    pub a: i64,
    pub b: i64,
    pub h: u64,
    pub n: u64,
    pub eps: i8,
    pub sums: Vec<i64>,
}

impl CurveRecord {
    pub fn key(&self) -> (u64, bool, u64, bool) {
        CurveSeed { a: self.a, b: self.b }.order_key()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveRecordFile {
    pub header: RecordHeader,
    pub rows: Vec<CurveRecord>,
}

/// Streams rows into a record file.
pub struct RecordWriter {
    out: BufWriter<std::fs::File>,
    width: usize,
}

impl RecordWriter {
    pub fn create(path: &Path, header: &RecordHeader) -> Result<Self> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        out.write_all(MAGIC)?;
        out.write_u32::<LittleEndian>(header.version)?;
        out.write_u64::<LittleEndian>(header.umax_num)?;
        out.write_u64::<LittleEndian>(header.umax_den)?;
        out.write_u64::<LittleEndian>(header.r)?;
        out.write_u32::<LittleEndian>(header.plist.len() as u32)?;
        for p in &header.plist {
            out.write_u64::<LittleEndian>(p.code())?;
        }
        Ok(RecordWriter { out, width: header.width() })
    }

    pub fn push(&mut self, row: &CurveRecord) -> Result<()> {
        if row.sums.len() != self.width {
            return Err(Error::Format(format!("row has {} sums, header needs {}", row.sums.len(), self.width)));
        }
        self.out.write_varint(row.a)?;
        self.out.write_varint(row.b)?;
        self.out.write_varint(row.h)?;
        self.out.write_varint(row.n)?;
        self.out.write_i8(row.eps)?;
        for &s in &row.sums {
            self.out.write_varint(s)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_records(path: &Path, file: &CurveRecordFile) -> Result<()> {
    let mut w = RecordWriter::create(path, &file.header)?;
    for row in &file.rows {
        w.push(row)?;
    }
    w.finish()
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated record file".into())
    } else {
        Error::Io(e)
    }
}

fn read_header(inp: &mut impl Read) -> Result<RecordHeader> {
    let mut magic = [0u8; 8];
    inp.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a record file".into()));
    }
    let version = inp.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != FORMAT_VERSION {
        return Err(Error::HeaderMismatch(format!("record format version {version}, expected {FORMAT_VERSION}")));
    }
    let umax_num = inp.read_u64::<LittleEndian>().map_err(truncated)?;
    let umax_den = inp.read_u64::<LittleEndian>().map_err(truncated)?;
    let r = inp.read_u64::<LittleEndian>().map_err(truncated)?;
    let np = inp.read_u32::<LittleEndian>().map_err(truncated)?;
    let mut plist = Vec::with_capacity(np as usize);
    for _ in 0..np {
        plist.push(PFilter::from_code(inp.read_u64::<LittleEndian>().map_err(truncated)?));
    }
    Ok(RecordHeader { version, umax_num, umax_den, r, plist })
}

/// Read a record file; with `expected`, any header difference is an error.
pub fn read_records(path: &Path, expected: Option<&RecordHeader>) -> Result<CurveRecordFile> {
    let mut inp = BufReader::new(std::fs::File::open(path)?);
    let header = read_header(&mut inp)?;
    if let Some(e) = expected {
        if e != &header {
            return Err(Error::HeaderMismatch(format!(
                "{} has u_max = {}/{}, r = {}, {} P values; expected u_max = {}/{}, r = {}, {} P values",
                path.display(),
                header.umax_num,
                header.umax_den,
                header.r,
                header.plist.len(),
                e.umax_num,
                e.umax_den,
                e.r,
                e.plist.len()
            )));
        }
    }
    let width = header.width();
    let mut rows = Vec::new();
    while !inp.fill_buf()?.is_empty() {
        let a = inp.read_varint::<i64>().map_err(truncated)?;
        let b = inp.read_varint::<i64>().map_err(truncated)?;
        let h = inp.read_varint::<u64>().map_err(truncated)?;
        let n = inp.read_varint::<u64>().map_err(truncated)?;
        let eps = inp.read_i8().map_err(truncated)?;
        let mut sums = Vec::with_capacity(width);
        for _ in 0..width {
            sums.push(inp.read_varint::<i64>().map_err(truncated)?);
        }
        rows.push(CurveRecord { a, b, h, n, eps, sums });
    }
    Ok(CurveRecordFile { header, rows })
}

/// Union of record files with identical headers, in enumeration order.
pub fn merge_records(files: Vec<CurveRecordFile>) -> Result<CurveRecordFile> {
    let mut it = files.into_iter();
    let mut out = it.next().ok_or_else(|| Error::InvalidArgument("nothing to merge".into()))?;
    for f in it {
        if f.header != out.header {
            return Err(Error::HeaderMismatch("record files have different headers".into()));
        }
        out.rows.extend(f.rows);
    }
    let mut seen = HashSet::new();
    for r in &out.rows {
        if !seen.insert((r.a, r.b)) {
            return Err(Error::Format(format!("curve ({}, {}) appears twice", r.a, r.b)));
        }
    }
    out.rows.sort_by_key(|r| r.key());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::HeightBound;
    use crate::lhs::{compute_records, default_plist, shard_seeds};

    fn sample() -> CurveRecordFile {
        let g = WindowGrid::unit(5).unwrap();
        let plist = default_plist();
        let seeds: Vec<_> = crate::curves::enumerate_curves(HeightBound(300)).unwrap().collect();
        CurveRecordFile { header: RecordHeader::new(&g, &plist), rows: compute_records(&seeds, &g, &plist).unwrap() }
    }

    #[test]
    fn round_trip_and_guards() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.bin");
        let f = sample();
        write_records(&path, &f).unwrap();
        assert_eq!(read_records(&path, Some(&f.header)).unwrap(), f);
        let mut other = f.header.clone();
        other.r = 6;
        assert!(matches!(read_records(&path, Some(&other)), Err(Error::HeaderMismatch(_))));
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(read_records(&path, None), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[8] = 9;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_records(&path, None), Err(Error::HeaderMismatch(_))));
    }

    #[test]
    fn shards_merge_to_whole() {
        let f = sample();
        let g = f.header.grid().unwrap();
        let parts: Vec<CurveRecordFile> = (0..3)
            .map(|i| {
                let seeds = shard_seeds(HeightBound(300), (i, 3)).unwrap();
                CurveRecordFile { header: f.header.clone(), rows: compute_records(&seeds, &g, &f.header.plist).unwrap() }
            })
            .collect();
        let merged = merge_records(parts.clone()).unwrap();
        assert_eq!(merged, f);
        let dup = merge_records(vec![parts[0].clone(), parts[0].clone()]);
        assert!(dup.is_err());
    }
}
