//! Plain-text matrix format.
//!
//! ```text
//! dense R C               sparse R C NNZ
//! a00 a01 ... a0(C-1)     r c value
//! ...                     ...
//! ```
//!
//! Sparse indices are 0-based and sorted by `(row, col)`. Writers emit 17
//! significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::dense::DenseMatrix;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// A matrix read from text, in whichever layout the file used.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl MatrixFile {
    pub fn into_dense(self) -> DenseMatrix {
        match self {
            MatrixFile::Dense(d) => d,
            MatrixFile::Sparse(s) => s.to_dense(),
        }
    }

    pub fn into_sparse(self) -> SparseMatrix {
        match self {
            MatrixFile::Dense(d) => SparseMatrix::from_dense(&d),
            MatrixFile::Sparse(s) => s,
        }
    }
}

fn fmt_value(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

pub fn write_dense(m: &DenseMatrix) -> String {
    let mut out = format!("dense {} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            fmt_value(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

pub fn write_sparse(m: &SparseMatrix) -> String {
    let mut out = format!("sparse {} {} {}\n", m.rows(), m.cols(), m.nnz());
    for &(r, c, v) in m.triplets() {
        write!(out, "{r} {c} ").expect("writing to a String");
        fmt_value(&mut out, v);
        out.push('\n');
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| perr(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(line, format!("invalid {what}")))
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| perr(line, format!("invalid number {tok:?}")))?;
    if !v.is_finite() {
        return Err(perr(line, "non-finite value"));
    }
    Ok(v)
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut toks = header.split_whitespace();
    let kind = toks.next().unwrap_or_default();
    match kind {
        "dense" => {
            let rows = parse_count(toks.next(), hline, "row count")?;
            let cols = parse_count(toks.next(), hline, "column count")?;
            if toks.next().is_some() {
                return Err(perr(hline, "trailing tokens in header"));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (ln, l) = lines
                    .next()
                    .ok_or_else(|| perr(hline, "truncated dense body"))?;
                let before = data.len();
                for tok in l.split_whitespace() {
                    data.push(parse_value(tok, ln)?);
                }
                if data.len() - before != cols {
                    return Err(perr(ln, format!("expected {cols} values")));
                }
            }
            if let Some((ln, _)) = lines.next() {
                return Err(perr(ln, "unexpected trailing line"));
            }
            Ok(MatrixFile::Dense(DenseMatrix::new(rows, cols, data)?))
        }
        "sparse" => {
            let rows = parse_count(toks.next(), hline, "row count")?;
            let cols = parse_count(toks.next(), hline, "column count")?;
            let nnz = parse_count(toks.next(), hline, "entry count")?;
            if toks.next().is_some() {
                return Err(perr(hline, "trailing tokens in header"));
            }
            let mut triplets = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let (ln, l) = lines
                    .next()
                    .ok_or_else(|| perr(hline, "truncated sparse body"))?;
                let mut t = l.split_whitespace();
                let r = parse_count(t.next(), ln, "row index")?;
                let c = parse_count(t.next(), ln, "column index")?;
                let v = parse_value(t.next().ok_or_else(|| perr(ln, "missing value"))?, ln)?;
                if t.next().is_some() {
                    return Err(perr(ln, "trailing tokens"));
                }
                if let Some(&(pr, pc, _)) = triplets.last() {
                    if (pr, pc) >= (r, c) {
                        return Err(perr(ln, "entries not strictly sorted by (row, col)"));
                    }
                }
                triplets.push((r, c, v));
            }
            if let Some((ln, _)) = lines.next() {
                return Err(perr(ln, "unexpected trailing line"));
            }
            Ok(MatrixFile::Sparse(SparseMatrix::from_triplets(
                rows, cols, triplets,
            )?))
        }
        other => Err(perr(hline, format!("unknown matrix kind {other:?}"))),
    }
}

pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}
