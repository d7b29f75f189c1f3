//! Path CSV files and atomic output.
//!
//! Path files have a header `t,x` (or `t,x1,…,xd`) with an optional
//! trailing `jumps` column holding the number of jumps in each interval
//! (empty on the first row). Numbers are written with `%.17g` so a
//! round-trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::format_g17;
use crate::simulate::Path;

/// Writes `bytes` to a sibling temporary file, then renames it over `target`.
pub fn write_atomic(target: &FsPath, bytes: &[u8]) -> Result<()> {
    let dir = match target.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = target
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("not a file path: {}", target.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, target).map_err(|e| Error::io(target, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_json_atomic<T: Serialize>(target: &FsPath, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(target, text.as_bytes())
}

/// Renders a path as CSV text.
pub fn path_to_csv(path: &Path) -> String {
    let d = path.dim();
    let mut out = String::with_capacity((path.n() + 1) * 24 * (d + 1));
    out.push('t');
    if d == 1 {
        out.push_str(",x");
    } else {
        for k in 1..=d {
            let _ = write!(out, ",x{k}");
        }
    }
    let marks = path.jump_marks();
    if marks.is_some() {
        out.push_str(",jumps");
    }
    out.push('\n');
    for i in 0..=path.n() {
        out.push_str(&format_g17(path.time(i)));
        for v in path.state(i) {
            out.push(',');
            out.push_str(&format_g17(*v));
        }
        if let Some(m) = marks {
            out.push(',');
            if i > 0 {
                let _ = write!(out, "{}", m[i - 1]);
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_path_csv(target: &FsPath, path: &Path) -> Result<()> {
    write_atomic(target, path_to_csv(path).as_bytes())
}

pub fn read_path_csv(source: &FsPath) -> Result<Path> {
    let text = fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
    parse_path_csv(&text, &source.display().to_string())
}

/// Parses path CSV text; `origin` names the source in error messages.
pub fn parse_path_csv(text: &str, origin: &str) -> Result<Path> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"t") {
        return Err(err(1, format!("header must start with 't', got '{header}'")));
    }
    let has_jumps = columns.last() == Some(&"jumps");
    let state_cols = &columns[1..columns.len() - usize::from(has_jumps)];
    let dim = state_cols.len();
    let valid_names = if dim == 1 {
        state_cols[0] == "x"
    } else {
        state_cols.iter().enumerate().all(|(k, c)| *c == format!("x{}", k + 1))
    };
    if dim == 0 || !valid_names {
        return Err(err(1, format!("expected state columns 'x' or 'x1..xd', got '{header}'")));
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut marks = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(err(line_no, format!("expected {} fields, got {}", columns.len(), fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(line_no, format!("cannot parse {what} '{s}' as a number")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("{what} is not finite")));
            }
            Ok(v)
        };
        times.push(num(fields[0], "t")?);
        for (k, f) in fields[1..=dim].iter().enumerate() {
            values.push(num(f, state_cols[k])?);
        }
        if has_jumps {
            let f = fields[dim + 1];
            if times.len() == 1 {
                if !f.is_empty() {
                    return Err(err(line_no, "first row must have an empty jumps field".into()));
                }
            } else {
                marks.push(f.parse::<u32>().map_err(|_| err(line_no, format!("cannot parse jumps '{f}'")))?);
            }
        }
    }
    if times.len() < 2 {
        return Err(err(text.lines().count().max(1), "path needs at least two observations".into()));
    }
    let n = times.len() - 1;
    let h = (times[n] - times[0]) / n as f64;
    if !(h > 0.0) {
        return Err(err(2, "time column must be increasing".into()));
    }
    for (i, &t) in times.iter().enumerate() {
        let expected = times[0] + i as f64 * h;
        if (t - expected).abs() > 1e-9 * expected.abs().max(h) {
            return Err(err(i + 2, format!("time {t} is off the uniform grid (step {h})")));
        }
    }
    Path::new(h, dim, values, has_jumps.then_some(marks))
}
