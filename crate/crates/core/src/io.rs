//! Text formats for matrices, factors and update streams, plus a
//! little-endian binary container for matrices.
//!
//! * matrix: `n d`, then `n` lines of `d` decimals
//! * factor: `k s n d`, then per component a `tau` line, an `idx:val` line for `x`, one for `y`
//! * stream: `i j delta` lines, `#` comments
//! * binary: `SLRA`, u32 version, u64 rows, u64 cols, row-major f64 payload

use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Result, SlraError};
use crate::matrix::{Component, DenseMatrix, SparseRankKFactor, SparseVec};
use crate::sketch::StreamUpdate;

pub const MAGIC: &[u8; 4] = b"SLRA";
pub const BINARY_VERSION: u32 = 1;

fn fmt_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(SlraError::Format(msg.into()))
}

fn io_err(e: std::io::Error) -> SlraError {
    SlraError::Format(format!("io: {e}"))
}

fn parse<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| SlraError::Format(format!("bad {what}: {tok:?}")))
}

/// Non-empty, non-comment lines.
fn content_lines(r: impl BufRead) -> impl Iterator<Item = Result<String>> {
    r.lines().filter_map(|l| match l {
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok(t.to_string()))
        }
        Err(e) => Some(Err(io_err(e))),
    })
}

pub fn read_matrix(r: impl BufRead) -> Result<DenseMatrix> {
    let mut lines = content_lines(r);
    let Some(header) = lines.next().transpose()? else {
        return fmt_err("empty matrix file");
    };
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return fmt_err("matrix header must be `n d`");
    }
    let (n, d): (usize, usize) = (parse(dims[0], "rows")?, parse(dims[1], "cols")?);
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        let Some(line) = lines.next().transpose()? else {
            return fmt_err(format!("expected {n} rows, found {i}"));
        };
        let row: Vec<f64> = line.split_whitespace().map(|t| parse(t, "entry")).collect::<Result<_>>()?;
        if row.len() != d {
            return fmt_err(format!("row {i} has {} entries, expected {d}", row.len()));
        }
        data.extend(row);
    }
    if lines.next().is_some() {
        return fmt_err("trailing data after matrix rows");
    }
    DenseMatrix::new(n, d, data).map_err(|e| SlraError::Format(e.to_string()))
}

pub fn write_matrix(mut w: impl Write, a: &DenseMatrix) -> Result<()> {
    writeln!(w, "{} {}", a.rows(), a.cols()).map_err(io_err)?;
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io_err)?;
    }
    Ok(())
}

fn sparse_line(v: &SparseVec) -> String {
    v.idx.iter().zip(&v.val).map(|(i, x)| format!("{i}:{x}")).collect::<Vec<_>>().join(" ")
}

fn parse_sparse(line: &str, len: usize) -> Result<SparseVec> {
    let mut pairs = Vec::new();
    for tok in line.split_whitespace() {
        let Some((i, x)) = tok.split_once(':') else {
            return fmt_err(format!("expected idx:val, got {tok:?}"));
        };
        let i: usize = parse(i, "index")?;
        if i >= len {
            return fmt_err(format!("index {i} out of range {len}"));
        }
        pairs.push((i, parse::<f64>(x, "value")?));
    }
    Ok(SparseVec::new(pairs))
}

/// Returns the factor together with the `n d` recorded in its header.
pub fn read_factor(r: impl BufRead) -> Result<(SparseRankKFactor, usize, usize)> {
    // Empty sparse vectors are written as blank lines, so blank lines count here.
    let mut lines = r.lines().map(|l| l.map_err(io_err)).filter(|l| !matches!(l, Ok(s) if s.trim_start().starts_with('#')));
    let Some(header) = lines.next().transpose()? else {
        return fmt_err("empty factor file");
    };
    let h: Vec<usize> = header.split_whitespace().map(|t| parse(t, "header field")).collect::<Result<_>>()?;
    if h.len() != 4 {
        return fmt_err("factor header must be `k s n d`");
    }
    let (k, s, n, d) = (h[0], h[1], h[2], h[3]);
    let mut components = Vec::new();
    loop {
        let Some(tau_line) = lines.next().transpose()? else { break };
        if tau_line.trim().is_empty() {
            continue;
        }
        let tau: f64 = parse(tau_line.trim(), "tau")?;
        let (Some(x), Some(y)) = (lines.next().transpose()?, lines.next().transpose()?) else {
            return fmt_err("component truncated");
        };
        components.push(Component { tau, x: parse_sparse(&x, n)?, y: parse_sparse(&y, d)? });
    }
    if components.len() > k {
        return fmt_err(format!("{} components exceed k = {k}", components.len()));
    }
    Ok((SparseRankKFactor { components, s, k }, n, d))
}

pub fn write_factor(mut w: impl Write, f: &SparseRankKFactor, n: usize, d: usize) -> Result<()> {
    writeln!(w, "{} {} {n} {d}", f.k, f.s).map_err(io_err)?;
    for c in &f.components {
        writeln!(w, "{}\n{}\n{}", c.tau, sparse_line(&c.x), sparse_line(&c.y)).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_stream(r: impl BufRead) -> Result<Vec<StreamUpdate>> {
    content_lines(r)
        .map(|line| {
            let line = line?;
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return fmt_err(format!("stream line must be `i j delta`: {line:?}"));
            }
            Ok(StreamUpdate::new(parse(t[0], "row")?, parse(t[1], "col")?, parse(t[2], "delta")?))
        })
        .collect()
}

pub fn write_stream(mut w: impl Write, updates: &[StreamUpdate]) -> Result<()> {
    for u in updates {
        writeln!(w, "{} {} {}", u.row, u.col, u.delta).map_err(io_err)?;
    }
    Ok(())
}

pub fn write_binary(mut w: impl Write, a: &DenseMatrix) -> Result<()> {
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&BINARY_VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(a.rows() as u64).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(a.cols() as u64).to_le_bytes()).map_err(io_err)?;
    for x in a.data() {
        w.write_all(&x.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<DenseMatrix> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head).map_err(io_err)?;
    if &head[..4] != MAGIC {
        return fmt_err("missing SLRA magic");
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return fmt_err(format!("unsupported binary version {version}"));
    }
    let rows = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(head[16..24].try_into().expect("8 bytes")) as usize;
    let len = rows.checked_mul(cols).ok_or_else(|| SlraError::Format("dimension overflow".into()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(io_err)?;
    if payload.len() != len * 8 {
        return fmt_err(format!("payload has {} bytes, expected {}", payload.len(), len * 8));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    DenseMatrix::new(rows, cols, data).map_err(|e| SlraError::Format(e.to_string()))
}

/// Reads either format, choosing by the leading magic bytes.
pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    let bytes = std::fs::read(path).map_err(io_err)?;
    if bytes.starts_with(MAGIC) {
        read_binary(&bytes[..])
    } else {
        read_matrix(&bytes[..])
    }
}

pub fn save_matrix(path: &Path, a: &DenseMatrix, binary: bool) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    if binary {
        write_binary(f, a)
    } else {
        write_matrix(f, a)
    }
}
