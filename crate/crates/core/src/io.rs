//! Portable field files.
//!
//! Layout: one ASCII header line `MAFLD 1 <m> <nx> <ny> <nt>\n` followed by
//! `nx * ny * nt` little-endian float64 values, row-major with x fastest,
//! then y, then xi.

use crate::field::ScalarField;
use crate::grid::{GridError, GridSpec};
use crate::scalar::Real;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(String),
    #[error("header dimensions invalid: {0}")]
    DimensionMismatch(#[from] GridError),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("trailing data after payload: {0} extra bytes")]
    TrailingData(usize),
    #[error("payload value {index} is not finite")]
    NonFinitePayload { index: usize },
}

const MAGIC: &str = "MAFLD";
const VERSION: &str = "1";

/// Writes a field; values are stored as float64 regardless of the working
/// scalar type.
pub fn write_field<F: Real>(
    field: &ScalarField<F>,
    path: impl AsRef<Path>,
) -> Result<(), FieldFileError> {
    let g = field.grid();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "{} {} {} {} {} {}",
        MAGIC, VERSION, g.m, g.nx, g.ny, g.nt
    )?;
    for v in field.values() {
        let x = v.to_f64().expect("scalar convertible to f64");
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field`].
pub fn read_field<F: Real>(path: impl AsRef<Path>) -> Result<ScalarField<F>, FieldFileError> {
    let bytes = std::fs::read(path)?;
    let line_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| FieldFileError::MalformedHeader("missing newline".into()))?;
    let header = std::str::from_utf8(&bytes[..line_end])
        .map_err(|_| FieldFileError::MalformedHeader("header is not UTF-8".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 {
        return Err(FieldFileError::MalformedHeader(format!(
            "expected 6 tokens, found {}",
            tokens.len()
        )));
    }
    if tokens[0] != MAGIC {
        return Err(FieldFileError::MalformedHeader(format!(
            "bad magic {:?}",
            tokens[0]
        )));
    }
    if tokens[1] != VERSION {
        return Err(FieldFileError::UnsupportedVersion(tokens[1].to_string()));
    }
    let dims: Vec<usize> = tokens[2..]
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| FieldFileError::MalformedHeader(format!("bad dimension {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let grid: GridSpec<F> = GridSpec::new(dims[0], dims[1], dims[2], dims[3])?;

    let payload = &bytes[line_end + 1..];
    let expected = grid.len() * 8;
    if payload.len() < expected {
        return Err(FieldFileError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(FieldFileError::TrailingData(payload.len() - expected));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().unwrap());
        if !x.is_finite() {
            return Err(FieldFileError::NonFinitePayload { index: i });
        }
        values.push(F::from_f64(x).expect("f64 convertible to scalar"));
    }
    Ok(ScalarField::from_values(grid, values).expect("validated payload"))
}
