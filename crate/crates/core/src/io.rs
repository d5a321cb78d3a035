//! CSV and JSON readers and writers.
//!
//! Every float is written with 17 significant digits in scientific notation,
//! so files round-trip bit for bit and are byte-identical across runs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::analysis::BranchSample;
use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::grid::{PeriodicProfile, TorusGrid};

/// `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: '{field}' is not a number")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric CSV; returns the header and the rows.
fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(Error::Parse(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                rec.len()
            )));
        }
        rows.push(rec.iter().map(|f| parse_f64(f, line)).collect::<Result<_>>()?);
    }
    Ok((header, rows))
}

fn expect_header(found: &[String], expected: &[&str], path: &Path) -> Result<()> {
    if found.len() < expected.len() || found.iter().zip(expected).any(|(a, b)| a.trim() != *b) {
        return Err(Error::Parse(format!(
            "{}: expected header starting with '{}', found '{}'",
            path.display(),
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

/// Writes a profile as `x,r`, one row per node.
pub fn write_profile_csv(path: &Path, r: &PeriodicProfile) -> Result<()> {
    let grid = r.grid();
    write_rows(
        path,
        &["x".into(), "r".into()],
        grid.nodes().zip(r.values()).map(|(x, &v)| vec![x, v]),
    )
}

/// Reads an `x,r` profile. The `x` column must hold the nodes of an even grid.
pub fn read_profile_csv(path: &Path) -> Result<PeriodicProfile> {
    let (header, rows) = read_rows(path)?;
    expect_header(&header, &["x", "r"], path)?;
    if header.len() != 2 {
        return Err(Error::Parse(format!("{}: expected exactly two columns", path.display())));
    }
    let grid = TorusGrid::new(rows.len())?;
    for (j, row) in rows.iter().enumerate() {
        let x = grid.node(j);
        if (row[0] - x).abs() > 1e-9 * (1.0 + x.abs()) {
            return Err(Error::Parse(format!(
                "{}: row {j} has x = {}, expected grid node {x}",
                path.display(),
                row[0]
            )));
        }
    }
    PeriodicProfile::new(grid, rows.into_iter().map(|row| row[1]).collect())
}

/// Scalar diagnostics of a trajectory, as stored in the trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub volume: Vec<f64>,
    pub area: Vec<f64>,
    pub min_r: Vec<f64>,
    pub max_r: Vec<f64>,
    /// `mode_amps[k - 1]` is the column `amp_k{k}`.
    pub mode_amps: Vec<Vec<f64>>,
}

impl From<&TrajectoryRecord> for TrajectoryTable {
    fn from(t: &TrajectoryRecord) -> Self {
        Self {
            times: t.times.clone(),
            volume: t.volume.clone(),
            area: t.area.clone(),
            min_r: t.min_r.clone(),
            max_r: t.max_r.clone(),
            mode_amps: t.mode_amps.clone(),
        }
    }
}

const TRAJECTORY_COLUMNS: [&str; 5] = ["t", "volume", "area", "min_r", "max_r"];

/// Writes `t,volume,area,min_r,max_r,amp_k1..amp_kK`.
pub fn write_trajectory_csv(path: &Path, t: &TrajectoryTable) -> Result<()> {
    let mut header: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=t.mode_amps.len()).map(|k| format!("amp_k{k}")));
    let rows = (0..t.times.len()).map(|i| {
        let mut row = vec![t.times[i], t.volume[i], t.area[i], t.min_r[i], t.max_r[i]];
        row.extend(t.mode_amps.iter().map(|a| a[i]));
        row
    });
    write_rows(path, &header, rows)
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable> {
    let (header, rows) = read_rows(path)?;
    expect_header(&header, &TRAJECTORY_COLUMNS, path)?;
    for (k, name) in header[5..].iter().enumerate() {
        if name.trim() != format!("amp_k{}", k + 1) {
            return Err(Error::Parse(format!("{}: unexpected column '{name}'", path.display())));
        }
    }
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<f64>>();
    Ok(TrajectoryTable {
        times: col(0),
        volume: col(1),
        area: col(2),
        min_r: col(3),
        max_r: col(4),
        mode_amps: (5..header.len()).map(col).collect(),
    })
}

/// Writes `B,lambda,amplitude,residual,leading_mu`.
pub fn write_branch_csv(path: &Path, samples: &[BranchSample]) -> Result<()> {
    let header: Vec<String> = ["B", "lambda", "amplitude", "residual", "leading_mu"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_rows(
        path,
        &header,
        samples
            .iter()
            .map(|s| vec![s.b, s.lambda, s.amplitude, s.residual, s.leading_mu]),
    )
}

/// JSON formatter that prints floats with 17 significant digits and
/// non-finite values as `null`. Layout is delegated to `F`.
#[derive(Debug, Clone, Default)]
pub struct PreciseFormatter<F = serde_json::ser::PrettyFormatter<'static>> {
    inner: F,
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for PreciseFormatter<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt_f64(value).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

fn serialize_with<T: Serialize + ?Sized, F: Formatter>(value: &T, formatter: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numeric(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Serializes `value` as pretty JSON with precise floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serialize_with(value, PreciseFormatter::<serde_json::ser::PrettyFormatter>::default())
}

/// Single-line variant of [`to_json_string`].
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serialize_with(value, PreciseFormatter { inner: serde_json::ser::CompactFormatter })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-0.75), "-7.5000000000000000e-1");
        for v in [std::f64::consts::PI, 1e-300, -123456.789, 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_floats_are_precise() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            n: u32,
            s: &'static str,
        }
        let text = to_json_string(&S {
            a: 2.0,
            b: vec![0.5, f64::NAN],
            n: 3,
            s: "x",
        })
        .unwrap();
        assert!(text.contains("\"a\": 2.0000000000000000e0"));
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.contains("null"));
        assert!(text.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"], 2.0);
        let line = to_json_line(&[1.5, -0.25]).unwrap();
        assert_eq!(line, "[1.5000000000000000e0,-2.5000000000000000e-1]\n");
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let g = TorusGrid::new(16).unwrap();
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.3 * x.sin());
        write_profile_csv(&path, &r).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,r\n-3.1415926535897931e0,"));
        assert_eq!(read_profile_csv(&path).unwrap(), r);
    }

    #[test]
    fn profile_rejects_off_grid_nodes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "x,r\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n").unwrap();
        assert!(matches!(read_profile_csv(&path), Err(Error::Parse(_))));
        std::fs::write(&path, "x,y\n0,1\n").unwrap();
        assert!(matches!(read_profile_csv(&path), Err(Error::Parse(_))));
        assert!(matches!(
            read_profile_csv(&dir.path().join("missing.csv")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = TrajectoryTable {
            times: vec![0.0, 0.1],
            volume: vec![1.0, 1.0],
            area: vec![2.0, 1.9],
            min_r: vec![0.5, 0.4],
            max_r: vec![0.6, 0.7],
            mode_amps: vec![vec![1e-3, 2e-3], vec![0.0, 1e-9]],
        };
        write_trajectory_csv(&path, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,volume,area,min_r,max_r,amp_k1,amp_k2\n"));
        assert_eq!(read_trajectory_csv(&path).unwrap(), t);
    }
}
