//! CSV emission: `\n` line endings, 17 significant digits, `inf` at poles.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::run::RunRecord;
use crate::amplification::{BoundaryResult, ContourRow, Critical};
use crate::error::{Error, Result};

pub fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_contour(mut w: impl Write, rows: &[ContourRow]) -> io::Result<()> {
    writeln!(w, "Y,mu,h")?;
    for r in rows {
        writeln!(w, "{},{},{}", number(r.y), number(r.mu), number(r.h))?;
    }
    Ok(())
}

pub fn write_boundary<'a>(mut w: impl Write, rows: impl IntoIterator<Item = (&'a str, &'a BoundaryResult)>) -> io::Result<()> {
    writeln!(w, "scheme,critical_mu,worst_Y,lo,hi")?;
    for (name, r) in rows {
        let critical = match r.critical {
            Critical::Finite(mu) => number(mu),
            Critical::Unconditional => "unconditional".into(),
        };
        writeln!(w, "{name},{critical},{},{},{}", number(r.worst_y), number(r.lo), number(r.hi))?;
    }
    Ok(())
}

pub fn write_history(mut w: impl Write, records: &[RunRecord]) -> io::Result<()> {
    writeln!(w, "step,frobenius,ortho_residual")?;
    for r in records {
        writeln!(w, "{},{},{}", r.step, number(r.frobenius), number(r.ortho_residual))?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`, attaching the path to
/// any I/O error.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}
