//! CSV emission. One file per metric channel for sweeps, a single trajectory
//! table for evolution runs, and a summary + full state dump for steady
//! states. Values are written in full-precision decimal; row order is fixed
//! (y-major for grids), so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use parqed::dynamics::{SteadyStateResult, Trajectory};
use parqed::metrics::MetricKind;
use parqed::sweep::SweepGrid;

use crate::config::format_value;

const UNITS_COMMENT: &str = "# units: omega = 1; time in 1/omega; rates in omega";

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating directory {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `trajectory.csv`: time plus one column per recorded metric.
pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{UNITS_COMMENT}");
    let mut header = vec!["time".to_string()];
    header.extend(traj.observables.iter().map(|(k, _)| k.name()));
    header.push("fock-top-population".to_string());
    let _ = writeln!(out, "{}", header.join(","));
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row = vec![format_value(t)];
        for (_, channel) in &traj.observables {
            row.push(format_value(channel[k]));
        }
        row.push(format_value(traj.truncation[k].top));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// `steady_summary.csv`: one row with solver diagnostics and metric values.
pub fn steady_summary_csv(
    result: &SteadyStateResult<f64>,
    metrics: &[MetricKind],
    values: &[f64],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{UNITS_COMMENT}");
    let mut header = vec![
        "method".to_string(),
        "converged".to_string(),
        "residual".to_string(),
        "time-integrated".to_string(),
    ];
    header.extend(metrics.iter().map(|k| k.name()));
    let _ = writeln!(out, "{}", header.join(","));
    let mut row = vec![
        result.method.to_string(),
        result.converged.to_string(),
        format_value(result.residual),
        result
            .time_integrated
            .map(format_value)
            .unwrap_or_else(|| "".to_string()),
    ];
    row.extend(values.iter().map(|&v| format_value(v)));
    let _ = writeln!(out, "{}", row.join(","));
    out
}

/// `steady_state.csv`: the full density matrix as (row, col, re, im).
pub fn state_csv(state: &parqed::hilbert::DensityMatrix<f64>) -> String {
    let m = state.matrix();
    let mut out = String::new();
    let _ = writeln!(out, "{UNITS_COMMENT}");
    let _ = writeln!(out, "row,col,re,im");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(
                out,
                "{i},{j},{},{}",
                format_value(m[(i, j)].re),
                format_value(m[(i, j)].im)
            );
        }
    }
    out
}

/// One sweep channel as `<x>,<y>,<value>` in y-major order.
pub fn sweep_channel_csv(grid: &SweepGrid<f64>, kind: MetricKind) -> Option<String> {
    let values = grid.channel(kind)?;
    let mut out = String::new();
    let _ = writeln!(out, "{UNITS_COMMENT}");
    let _ = writeln!(out, "{},{},{}", grid.x.name, grid.y.name, kind.name());
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_value(grid.x.values[ix]),
                format_value(grid.y.values[iy]),
                format_value(values[iy * grid.nx() + ix])
            );
        }
    }
    Some(out)
}

/// Per-cell flags as `<x>,<y>,<status>`, same ordering as the channels.
pub fn sweep_status_csv(grid: &SweepGrid<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{UNITS_COMMENT}");
    let _ = writeln!(out, "{},{},status", grid.x.name, grid.y.name);
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_value(grid.x.values[ix]),
                format_value(grid.y.values[iy]),
                grid.status[iy * grid.nx() + ix]
            );
        }
    }
    out
}

/// File name for one sweep channel.
pub fn channel_file_name(kind: MetricKind) -> String {
    format!("sweep_{}.csv", kind.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use parqed::metrics::MetricKind;
    use parqed::sweep::{AxisSpec, CellStatus};

    #[test]
    fn sweep_csv_is_y_major_with_axis_header() {
        let grid = SweepGrid {
            x: AxisSpec::new("kappa", vec![0.1, 0.2]),
            y: AxisSpec::new("theta", vec![0.5, 0.6]),
            channels: vec![(MetricKind::Concurrence, vec![1.0, 2.0, 3.0, 4.0])],
            status: vec![CellStatus::Ok; 4],
        };
        let csv = sweep_channel_csv(&grid, MetricKind::Concurrence).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "kappa,theta,concurrence");
        // y-major: (0.1,0.5), (0.2,0.5), (0.1,0.6), (0.2,0.6)
        assert!(lines[2].starts_with(&format_value(0.1)));
        assert!(lines[2].contains(&format_value(0.5)));
        assert!(lines[4].contains(&format_value(0.6)));
        assert!(lines[5].ends_with(&format_value(4.0)));
    }
}
