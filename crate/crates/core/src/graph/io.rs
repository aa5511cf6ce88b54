//! Text format:
//!
//! ```text
//! ising-graph v1 n=<N> kind=<SK|K|custom> seed=<int|none>
//! <i> <j> <J_ij>
//! ...
//! ```
//!
//! Indices are 0-based with `i < j`; values are written in shortest
//! round-trip form. Missing pairs are zero. Blank lines and lines starting
//! with `#` are ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{CouplingGraph, GraphKind};
use crate::error::{Error, Result};

const MAGIC: &str = "ising-graph";
const VERSION: &str = "v1";

pub fn write_graph<W: Write>(g: &CouplingGraph, mut w: W) -> Result<()> {
    let seed = g.seed().map_or_else(|| "none".to_string(), |s| s.to_string());
    writeln!(w, "{MAGIC} {VERSION} n={} kind={} seed={seed}", g.n(), g.kind())?;
    for a in 0..g.n() {
        for b in (a + 1)..g.n() {
            writeln!(w, "{a} {b} {}", g.get(a, b))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_graph(g: &CouplingGraph, path: impl AsRef<Path>) -> Result<()> {
    write_graph(g, BufWriter::new(File::create(path)?))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<CouplingGraph> {
    let path = path.as_ref();
    read_graph(BufReader::new(File::open(path)?), path)
}

/// Parses a graph; `origin` only labels error messages.
pub fn read_graph<R: BufRead>(reader: R, origin: &Path) -> Result<CouplingGraph> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, header) = loop {
        match lines.next() {
            Some((no, line)) => {
                let line = line?;
                let t = line.trim();
                if !t.is_empty() && !t.starts_with('#') {
                    break (no, t.to_string());
                }
            }
            None => return Err(err(0, "empty file, missing header".into())),
        }
    };

    let mut fields = header.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(err(header_no, format!("expected header starting with {MAGIC:?}")));
    }
    if fields.next() != Some(VERSION) {
        return Err(err(header_no, format!("unsupported version, expected {VERSION}")));
    }
    let (mut n, mut kind, mut seed) = (None, None, None);
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(header_no, format!("malformed header field {field:?}")))?;
        match key {
            "n" => {
                n = Some(value.parse::<usize>().map_err(|e| err(header_no, format!("field n: {e}")))?)
            }
            "kind" => {
                kind = Some(
                    value
                        .parse::<GraphKind>()
                        .map_err(|e| err(header_no, format!("field kind: {e}")))?,
                )
            }
            "seed" => {
                seed = Some(if value == "none" {
                    None
                } else {
                    Some(value.parse::<u64>().map_err(|e| err(header_no, format!("field seed: {e}")))?)
                })
            }
            other => return Err(err(header_no, format!("unknown header field {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| err(header_no, "header is missing n".into()))?;
    if n == 0 {
        return Err(err(header_no, "n must be at least 1".into()));
    }
    let kind = kind.unwrap_or(GraphKind::Custom);
    let seed = seed.flatten();

    let mut entries: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(no, format!("expected `<i> <j> <J_ij>`, found {} fields", parts.len())));
        }
        let a: usize = parts[0].parse().map_err(|e| err(no, format!("field i: {e}")))?;
        let b: usize = parts[1].parse().map_err(|e| err(no, format!("field j: {e}")))?;
        let x: f64 = parts[2].parse().map_err(|e| err(no, format!("field J_ij: {e}")))?;
        if a >= n || b >= n {
            return Err(err(no, format!("index out of range for n={n}")));
        }
        if !x.is_finite() {
            return Err(err(no, "field J_ij: non-finite value".into()));
        }
        if a == b && x != 0.0 {
            return Err(Error::Validation(format!(
                "line {no}: nonzero diagonal entry J[{a}][{a}] = {x}"
            )));
        }
        if entries.insert((a, b), (x, no)).is_some() {
            return Err(err(no, format!("duplicate entry for pair ({a}, {b})")));
        }
    }

    let mut j = vec![0.0; n * n];
    for (&(a, b), &(x, no)) in &entries {
        if a == b {
            continue;
        }
        if let Some(&(y, _)) = entries.get(&(b, a)) {
            if x != y {
                return Err(Error::Validation(format!(
                    "line {no}: asymmetric entries J[{a}][{b}] = {x} and J[{b}][{a}] = {y}"
                )));
            }
        }
        j[a * n + b] = x;
        j[b * n + a] = x;
    }
    CouplingGraph::from_matrix(n, j, kind, seed)
}
