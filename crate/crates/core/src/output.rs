//! Artifact writing: number formatting, atomic file output and plot data.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::global::{CurveValues, ExplanationCurve};

/// Shortest text that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// `v` with 17 significant digits in scientific notation.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so that `path` either keeps its old content or receives the new content
/// in full.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Plot-ready CSV for a curve: `grid,value` for aggregate curves and the
/// long format `instance,grid,value` for per-instance curves. Categorical
/// grids are written as level labels.
pub fn curve_csv(curve: &ExplanationCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let grid: Vec<String> = (0..curve.grid.len())
        .map(|t| match curve.grid.labels() {
            Some(_) => curve.grid.label(t),
            None => format_sig17(curve.grid.points()[t]),
        })
        .collect();
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    match &curve.values {
        CurveValues::Aggregate(values) => {
            w.write_record(["grid", "value"]).map_err(csv_err)?;
            for (g, v) in grid.iter().zip(values) {
                w.write_record([g.as_str(), &format_sig17(*v)])
                    .map_err(csv_err)?;
            }
        }
        CurveValues::PerInstance { instances, matrix } => {
            w.write_record(["instance", "grid", "value"])
                .map_err(csv_err)?;
            for (i, row) in instances.iter().zip(matrix) {
                for (g, v) in grid.iter().zip(row) {
                    w.write_record([i.to_string().as_str(), g, &format_sig17(*v)])
                        .map_err(csv_err)?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// Writes [`curve_csv`] to `path` atomically.
pub fn emit_plot_data(curve: &ExplanationCurve, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, curve_csv(curve)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global::{CurveKind, Grid};

    fn pdp(points: Vec<f64>, values: Vec<f64>) -> ExplanationCurve {
        ExplanationCurve {
            kind: CurveKind::Pdp,
            feature_name: "x".into(),
            grid: Grid::from_points(0, points).unwrap(),
            values: CurveValues::Aggregate(values),
        }
    }

    #[test]
    fn formats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e22, std::f64::consts::PI] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
            assert_eq!(format_sig17(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_sig17(13.0), "1.3000000000000000e1");
    }

    #[test]
    fn aggregate_curve_csv() {
        let c = pdp(vec![0.0, 1.0, 2.0], vec![0.1, 1.0 / 3.0, -7.0]);
        let text = curve_csv(&c).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "grid,value");
        let parsed: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(parsed, c.aggregate().unwrap());
    }

    #[test]
    fn per_instance_curve_is_long_format() {
        let c = ExplanationCurve {
            kind: CurveKind::Ice,
            feature_name: "x".into(),
            grid: Grid::from_points(0, vec![0.0, 1.0]).unwrap(),
            values: CurveValues::PerInstance {
                instances: vec![3, 7],
                matrix: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            },
        };
        let text = curve_csv(&c).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "instance,grid,value");
        assert!(lines[4].starts_with("7,"));
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_plot_data(&pdp(vec![1.0], vec![2.0]), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "grid,value\n1.0000000000000000e0,2.0000000000000000e0\n"
        );
        assert!(write_atomic(dir.path().join("missing/out.csv"), b"x").is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
