//! CSV artifacts: time series, grid snapshots and study tables.
//!
//! Floats are written with 17 significant digits and LF line endings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use efk_core::{Field, PeriodicGrid, RunRecord};
use nalgebra::DMatrix;

use crate::error::{HarnessError, Result};

pub const SERIES_FILE: &str = "series.csv";
pub const FINAL_FILE: &str = "final.csv";
pub const SERIES_HEADER: [&str; 5] = ["step", "time", "max_norm", "energy", "rank"];

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshot_file_name(time: f64) -> String {
    format!("snapshot_t{time:.6}.csv")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
    }
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e))
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_series(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SERIES_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            fmt_float(r.time),
            fmt_float(r.max_norm),
            fmt_float(r.energy),
            r.rank.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

pub fn read_series(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(SERIES_HEADER) {
        return Err(HarnessError::Output(format!("{}: unexpected header", path.display())));
    }
    let bad = |line: usize| HarnessError::Output(format!("{}: malformed row {line}", path.display()));
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let f = |i: usize| row.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad(line + 2));
        let u = |i: usize| row.get(i).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| bad(line + 2));
        out.push(RunRecord {
            step: u(0)?,
            time: f(1)?,
            max_norm: f(2)?,
            energy: f(3)?,
            rank: u(4)?,
        });
    }
    Ok(out)
}

/// Writes `n_x` rows by `n_y` columns, row index = x index, no header.
pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut w = writer(path)?;
    let m = field.values();
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| fmt_float(m[(i, j)])))
            .map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Reads a field written by [`write_field`] onto `grid`.
pub fn read_field(path: &Path, grid: PeriodicGrid) -> Result<Field> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let parsed = row
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| HarnessError::Output(format!("{}: non-numeric entry", path.display())))?;
        rows.push(parsed);
    }
    let (n_x, n_y) = grid.shape();
    if rows.len() != n_x || rows.iter().any(|r| r.len() != n_y) {
        return Err(HarnessError::config(format!(
            "{}: expected {n_x} rows of {n_y} values",
            path.display()
        )));
    }
    Ok(Field::new(DMatrix::from_fn(n_x, n_y, |i, j| rows[i][j]), grid)?)
}

/// One row of a refinement-study table. `None` marks an undefined order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub level: usize,
    pub steps: usize,
    pub nodes: usize,
    pub cells: Vec<(f64, Option<f64>)>,
}

pub fn write_table(path: &Path, header: &[String], rows: &[TableRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let mut rec = vec![row.level.to_string(), row.steps.to_string(), row.nodes.to_string()];
        for (err, order) in &row.cells {
            rec.push(fmt_float(*err));
            rec.push(order.map(fmt_float).unwrap_or_default());
        }
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    finish(path, w)
}

/// Writes a free-form text file, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| HarnessError::io(path, e))
}

/// Snapshot files in `dir`, sorted by time.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))? {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(t) = name
            .strip_prefix("snapshot_t")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<f64>().ok())
        {
            out.push((t, path));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
        assert_eq!(snapshot_file_name(0.0016), "snapshot_t0.001600.csv");
    }

    #[test]
    fn series_and_field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![
            RunRecord { step: 0, time: 0.0, max_norm: 0.5, energy: -1.25, rank: 3 },
            RunRecord { step: 1, time: 0.1, max_norm: 0.4, energy: -1.5, rank: 2 },
        ];
        let p = dir.path().join("s.csv");
        write_series(&p, &recs).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("step,time,max_norm,energy,rank\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_series(&p).unwrap(), recs);

        let g = PeriodicGrid::new(0.0, 1.0, 0.0, 2.0, 3, 4).unwrap();
        let f = Field::from_fn(g, |x, y| x - 0.37 * y);
        let p = dir.path().join("sub/f.csv");
        write_field(&p, &f).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 4);
        assert_eq!(read_field(&p, g).unwrap(), f);
        assert!(read_field(&p, PeriodicGrid::square(0.0, 1.0, 3).unwrap()).is_err());
    }

    #[test]
    fn table_marks_undefined_orders_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let header: Vec<String> = ["level", "M", "N", "relerr", "rate"].map(String::from).to_vec();
        let rows = vec![
            TableRow { level: 1, steps: 16, nodes: 32, cells: vec![(0.25, None)] },
            TableRow { level: 2, steps: 32, nodes: 32, cells: vec![(0.125, Some(1.0))] },
        ];
        write_table(&p, &header, &rows).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "level,M,N,relerr,rate");
        assert_eq!(lines[1], "1,16,32,2.5000000000000000e-1,");
        assert_eq!(lines[2], "2,32,32,1.2500000000000000e-1,1.0000000000000000e0");
    }

    #[test]
    fn lists_snapshots_in_time_order() {
        let dir = tempfile::tempdir().unwrap();
        let g = PeriodicGrid::square(0.0, 1.0, 2).unwrap();
        for t in [0.01, 0.0, 0.005] {
            write_field(&dir.path().join(snapshot_file_name(t)), &Field::zeros(g)).unwrap();
        }
        write_text(&dir.path().join("notes.txt"), "x").unwrap();
        let times: Vec<f64> = list_snapshots(dir.path()).unwrap().into_iter().map(|(t, _)| t).collect();
        assert_eq!(times, vec![0.0, 0.005, 0.01]);
    }
}
