//! Series input, matrix output and atomic file writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::periodogram::PeriodogramMatrix;

/// Parse a series from CSV text.
///
/// Accepts one numeric column, or two columns `index,value`; a first row
/// that does not parse as numbers is taken as a header. Blank lines are
/// skipped. Errors carry the 1-based line number.
pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if std::mem::take(&mut first) && parsed.iter().any(Option::is_none) {
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse {
                line,
                msg: format!("expected {w} column(s), found {}", rec.len()),
            });
        }
        if !(1..=2).contains(&w) {
            return Err(Error::Parse {
                line,
                msg: format!("expected one column (value) or two (index, value), found {w}"),
            });
        }
        let field = rec.len() - 1;
        match parsed[field] {
            Some(v) if v.is_finite() => values.push(v),
            Some(_) => {
                return Err(Error::Parse {
                    line,
                    msg: "non-finite value".into(),
                })
            }
            None => {
                return Err(Error::Parse {
                    line,
                    msg: format!("cannot parse {:?} as a number", &rec[field]),
                })
            }
        }
        if w == 2 && parsed[0].is_none() {
            return Err(Error::Parse {
                line,
                msg: format!("cannot parse index {:?}", &rec[0]),
            });
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no numeric rows".into(),
        });
    }
    Ok(values)
}

pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    parse_series(&std::fs::read_to_string(path)?)
}

/// Single-column CSV with a `value` header.
pub fn series_csv(y: &[f64]) -> String {
    let mut out = String::from("value\n");
    for v in y {
        out.push_str(&format!("{v}\n"));
    }
    out
}

/// `freq,<column labels>` with `freq = k / n`.
pub fn matrix_csv(m: &PeriodogramMatrix) -> String {
    let mut out = String::from("freq");
    for l in &m.labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, f) in m.normalized_freqs().iter().enumerate() {
        out.push_str(&format!("{f}"));
        for j in 0..m.ncols() {
            out.push_str(&format!(",{}", m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Write `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
