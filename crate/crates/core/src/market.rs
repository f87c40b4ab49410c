//! Matrix Market I/O.
//!
//! Sparse matrices use the coordinate format with banner
//! `%%MatrixMarket matrix coordinate real general` and 1-based indices;
//! dense blocks (worker results, vectors) use the array format with banner
//! `%%MatrixMarket matrix array real general`, column-major as the format
//! prescribes. Values are written with Rust's shortest round-trip formatting
//! so a write/read cycle is bit-exact.

use crate::error::{Error, Result};
use crate::sparse::{DenseMatrix, SparseMatrix};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const COORD_BANNER: &str = "%%MatrixMarket matrix coordinate real general";
const ARRAY_BANNER: &str = "%%MatrixMarket matrix array real general";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError { line, message: message.into() }
}

/// Banner check shared by both formats. Returns the layout token
/// ("coordinate" or "array").
fn parse_banner(line: &str, lineno: usize) -> Result<String> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(lineno, format!("malformed banner: {line:?}")));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(lineno, format!("unsupported object {:?}", tokens[1])));
    }
    if tokens[2] != "coordinate" && tokens[2] != "array" {
        return Err(parse_err(lineno, format!("unsupported layout {:?}", tokens[2])));
    }
    if tokens[3] != "real" {
        return Err(Error::UnsupportedField(tokens[3].clone()));
    }
    if tokens[4] != "general" {
        return Err(Error::UnsupportedField(format!("symmetry {:?}", tokens[4])));
    }
    Ok(tokens[2].clone())
}

/// Read a sparse matrix in coordinate format.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_matrix_market_from(BufReader::new(File::open(path)?))
}

pub fn read_matrix_market_from(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines();
    let banner = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_err(1, "empty file")),
    };
    if parse_banner(&banner, 1)? != "coordinate" {
        return Err(parse_err(1, "expected coordinate layout for a sparse matrix"));
    }

    let mut lineno = 1usize;
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        lineno += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match dims {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "size line must be `rows cols nnz`"));
                }
                let rows = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad row count: {e}")))?;
                let cols = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad column count: {e}")))?;
                let nnz = fields[2]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad nnz count: {e}")))?;
                dims = Some((rows, cols, nnz));
                triplets.reserve(nnz);
            }
            Some((rows, cols, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "entry must be `i j value`"));
                }
                let i = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad row index: {e}")))?;
                let j = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad column index: {e}")))?;
                let v = fields[2]
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(
                        lineno,
                        format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
                    ));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = dims.ok_or_else(|| parse_err(lineno, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            lineno,
            format!("size line promised {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
}

/// Write a sparse matrix in coordinate format with 1-based indices.
pub fn write_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{COORD_BANNER}")?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz())?;
    for (r, c, v) in m.iter_entries() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a dense matrix in array format.
pub fn read_dense_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_dense_market_from(BufReader::new(File::open(path)?))
}

pub fn read_dense_market_from(reader: impl BufRead) -> Result<DenseMatrix> {
    let mut lines = reader.lines();
    let banner = match lines.next() {
        Some(l) => l?,
        None => return Err(parse_err(1, "empty file")),
    };
    if parse_banner(&banner, 1)? != "array" {
        return Err(parse_err(1, "expected array layout for a dense matrix"));
    }

    let mut lineno = 1usize;
    let mut dims: Option<(usize, usize)> = None;
    let mut values: Vec<f64> = Vec::new();
    for line in lines {
        let line = line?;
        lineno += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        match dims {
            None => {
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() != 2 {
                    return Err(parse_err(lineno, "size line must be `rows cols`"));
                }
                let rows = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad row count: {e}")))?;
                let cols = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(lineno, format!("bad column count: {e}")))?;
                dims = Some((rows, cols));
                values.reserve(rows * cols);
            }
            Some(_) => {
                let v = trimmed
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
                values.push(v);
            }
        }
    }
    let (rows, cols) = dims.ok_or_else(|| parse_err(lineno, "missing size line"))?;
    if values.len() != rows * cols {
        return Err(parse_err(
            lineno,
            format!("expected {} values, found {}", rows * cols, values.len()),
        ));
    }
    // array format lists entries column-major
    let mut out = DenseMatrix::zeros(rows, cols);
    for (idx, v) in values.into_iter().enumerate() {
        out.set(idx % rows, idx / rows, v);
    }
    Ok(out)
}

/// Write a dense matrix in array format (column-major entries).
pub fn write_dense_market(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{ARRAY_BANNER}")?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for c in 0..m.cols() {
        for r in 0..m.rows() {
            writeln!(w, "{}", m.get(r, c))?;
        }
    }
    w.flush()?;
    Ok(())
}
