//! Matrix Market (coordinate / array, real) reading and writing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// Writes the lower triangle of a symmetric matrix in `coordinate real symmetric` format.
pub fn write_symmetric(path: &Path, a: &CsrMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let lower: Vec<_> = a.iter().filter(|&(i, j, _)| j <= i).collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a dense column-major matrix in `array real general` format.
pub fn write_dense(path: &Path, nrows: usize, ncols: usize, col_major: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{nrows} {ncols}")?;
    for v in col_major {
        writeln!(w, "{v:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_dense(path, v.len(), 1, v)
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        msg.into(),
    ))
}

/// Reads a `coordinate real {general|symmetric}` file; symmetric input is expanded.
pub fn read_coordinate(path: &Path) -> Result<CsrMatrix> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let banner = lines.next().ok_or_else(|| parse_err("empty file"))??;
    let lower = banner.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(parse_err(format!("unsupported banner: {banner}")));
    }
    let symmetric = lower.contains("symmetric");
    let mut header = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(format!("bad index {s:?}: {e}")))
        };
        match header {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(format!("bad size line: {t}")));
                }
                header = Some((num(fields[0])?, num(fields[1])?, num(fields[2])?));
            }
            Some((nr, nc, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(format!("bad entry line: {t}")));
                }
                let (i, j) = (num(fields[0])?, num(fields[1])?);
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(parse_err(format!("entry ({i}, {j}) out of range")));
                }
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|e| parse_err(format!("bad value {:?}: {e}", fields[2])))?;
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = header.ok_or_else(|| parse_err("missing size line"))?;
    let stored = if symmetric {
        triplets.iter().filter(|t| t.0 >= t.1).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(parse_err(format!("expected {nnz} entries, found {stored}")));
    }
    Ok(CsrMatrix::from_triplets(nr, nc, &triplets))
}
