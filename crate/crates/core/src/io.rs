//! Signal file formats.
//!
//! CSV: header `index,value` (real) or `index,re,im` (complex), one row per
//! cell, values printed with 17 significant digits.
//!
//! Binary: magic `MMFS`, format version (u32 LE), cell count N (u64 LE),
//! then N little-endian f64 values, or 2N interleaved `re, im` pairs for a
//! complex signal.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Samples, TorusGrid};

pub const MAGIC: &[u8; 4] = b"MMFS";
pub const VERSION: u32 = 1;

pub fn to_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    match f.samples() {
        Samples::Real(v) => {
            out.push_str("index,value\n");
            for (i, x) in v.iter().enumerate() {
                let _ = writeln!(out, "{i},{x:.16e}");
            }
        }
        Samples::Complex(v) => {
            out.push_str("index,re,im\n");
            for (i, z) in v.iter().enumerate() {
                let _ = writeln!(out, "{i},{:.16e},{:.16e}", z.re, z.im);
            }
        }
    }
    out
}

pub fn from_csv(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let complex = match header.trim() {
        "index,value" => false,
        "index,re,im" => true,
        other => return Err(parse_err(1, format!("unrecognised header {other:?}"))),
    };
    let mut real = Vec::new();
    let mut cplx = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if complex { 3 } else { 2 };
        if fields.len() != expected {
            return Err(parse_err(
                lineno,
                format!("expected {expected} fields, found {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad index {:?}", fields[0])))?;
        let row = if complex { cplx.len() } else { real.len() };
        if index != row {
            return Err(parse_err(lineno, format!("index {index} out of sequence (expected {row})")));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad number {s:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite value {s:?}")));
            }
            Ok(v)
        };
        if complex {
            cplx.push(Complex64::new(num(fields[1])?, num(fields[2])?));
        } else {
            real.push(num(fields[1])?);
        }
    }
    let n = if complex { cplx.len() } else { real.len() };
    let grid = TorusGrid::with_cells(n)
        .map_err(|_| parse_err(0, format!("{n} rows is not a supported power-of-two grid")))?;
    if complex {
        GridFunction::complex(grid, cplx)
    } else {
        GridFunction::real(grid, real)
    }
}

pub fn to_binary(f: &GridFunction) -> Vec<u8> {
    let n = f.len();
    let mut out = Vec::with_capacity(16 + 16 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    match f.samples() {
        Samples::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Samples::Complex(v) => v.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<GridFunction> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(parse_err(0, "missing MMFS header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(parse_err(0, format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let payload = &bytes[16..];
    let grid = TorusGrid::with_cells(n)
        .map_err(|_| parse_err(0, format!("cell count {n} is not a supported grid")))?;
    let floats: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if payload.len() % 8 != 0 {
        return Err(parse_err(0, "payload is not a whole number of f64 values"));
    }
    if floats.len() == n {
        GridFunction::real(grid, floats)
    } else if floats.len() == 2 * n {
        let z = floats
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        GridFunction::complex(grid, z)
    } else {
        Err(parse_err(
            0,
            format!("payload holds {} values for N = {n}", floats.len()),
        ))
    }
}

/// Reads a signal, choosing the format from the magic bytes.
pub fn read_signal(path: &Path) -> Result<GridFunction> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| parse_err(0, "file is not UTF-8 CSV"))?;
        from_csv(&text)
    }
}

/// Writes a signal; `.bin` selects the binary format, anything else CSV.
pub fn write_signal(path: &Path, f: &GridFunction) -> Result<()> {
    let is_bin = path.extension().is_some_and(|e| e == "bin");
    if is_bin {
        std::fs::write(path, to_binary(f))?;
    } else {
        std::fs::write(path, to_csv(f))?;
    }
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}
