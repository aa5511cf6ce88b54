//! Trajectory sample streams.
//!
//! CSV: header `t,re_alpha_0,im_alpha_0,...,re_alpha_{n-1},im_alpha_{n-1}`,
//! one row per sample.
//!
//! Binary: the 8-byte magic [`BINARY_MAGIC`], a little-endian `u32` version,
//! a little-endian `u32` mode count `n`, then one record per sample of
//! `1 + 2n` little-endian `f64` values in the same order as the CSV columns.

use std::io::{self, Read, Write};

use super::C64;
use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 8] = *b"ISTRAJ\0\0";
pub const BINARY_VERSION: u32 = 1;

pub struct CsvTrajectoryWriter<W: Write> {
    inner: W,
    n: usize,
}

impl<W: Write> CsvTrajectoryWriter<W> {
    pub fn new(mut inner: W, n: usize) -> io::Result<Self> {
        write!(inner, "t")?;
        for i in 0..n {
            write!(inner, ",re_alpha_{i},im_alpha_{i}")?;
        }
        writeln!(inner)?;
        Ok(Self { inner, n })
    }

    pub fn write_sample(&mut self, t: f64, alpha: &[C64]) -> io::Result<()> {
        debug_assert_eq!(alpha.len(), self.n);
        write!(self.inner, "{t}")?;
        for a in alpha {
            write!(self.inner, ",{},{}", a.re, a.im)?;
        }
        writeln!(self.inner)
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub struct BinaryTrajectoryWriter<W: Write> {
    inner: W,
    n: usize,
}

impl<W: Write> BinaryTrajectoryWriter<W> {
    pub fn new(mut inner: W, n: usize) -> io::Result<Self> {
        inner.write_all(&BINARY_MAGIC)?;
        inner.write_all(&BINARY_VERSION.to_le_bytes())?;
        inner.write_all(&(n as u32).to_le_bytes())?;
        Ok(Self { inner, n })
    }

    pub fn write_sample(&mut self, t: f64, alpha: &[C64]) -> io::Result<()> {
        debug_assert_eq!(alpha.len(), self.n);
        self.inner.write_all(&t.to_le_bytes())?;
        for a in alpha {
            self.inner.write_all(&a.re.to_le_bytes())?;
            self.inner.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Reads a whole binary stream back as `(t, alpha)` records.
pub fn read_binary_trajectory<R: Read>(mut r: R) -> Result<Vec<(f64, Vec<C64>)>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != BINARY_MAGIC {
        return Err(Error::param("not a binary trajectory stream (bad magic)"));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != BINARY_VERSION {
        return Err(Error::param(format!("unsupported binary trajectory version {version}")));
    }
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let record = 8 * (1 + 2 * n);
    if bytes.len() % record != 0 {
        return Err(Error::param("truncated binary trajectory record"));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    Ok(bytes
        .chunks_exact(record)
        .map(|rec| {
            let vals: Vec<f64> = rec.chunks_exact(8).map(f).collect();
            let alpha = vals[1..].chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
            (vals[0], alpha)
        })
        .collect())
}
