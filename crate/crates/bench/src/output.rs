//! CSV writers. Floats use the shortest round-trip `{:e}` form, so re-reading
//! reproduces every value bit for bit.

use singctrl_core::signals::{Signal, TimeGrid};
use std::fs;
use std::io;
use std::path::Path;

/// Two-column `t,value` file.
pub fn write_signal(path: &Path, s: &Signal) -> io::Result<()> {
    let mut text = String::from("t,value\n");
    for (t, v) in s.grid().nodes().zip(s.values()) {
        text.push_str(&format!("{t:e},{v:e}\n"));
    }
    fs::write(path, text)
}

/// Reads a file written by [`write_signal`]; the grid is rebuilt from the
/// last time and the row count.
pub fn read_signal(path: &Path) -> io::Result<Signal> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("t,value") {
        return Err(bad(format!("{}: missing header", path.display())));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for line in lines {
        let (t, v) = line.split_once(',').ok_or_else(|| bad(format!("malformed row {line:?}")))?;
        ts.push(t.parse::<f64>().map_err(|e| bad(e.to_string()))?);
        vs.push(v.parse::<f64>().map_err(|e| bad(e.to_string()))?);
    }
    if ts.len() < 2 {
        return Err(bad("need at least two rows".into()));
    }
    let grid = TimeGrid::new(*ts.last().unwrap(), ts.len() - 1).map_err(|e| bad(e.to_string()))?;
    Signal::new(grid, vs).map_err(|e| bad(e.to_string()))
}

/// Writes a header and rows of preformatted cells.
pub fn write_table(path: &Path, header: &str, rows: &[Vec<String>]) -> io::Result<()> {
    let mut text = format!("{header}\n");
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)
}

pub fn cell(v: f64) -> String {
    format!("{v:e}")
}

/// Directory-safe tag for an ε value, e.g. `1e-3`.
pub fn eps_tag(eps: f64) -> String {
    format!("{eps:e}")
}
