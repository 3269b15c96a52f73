//! Plain CSV output with full double precision.

use crate::error::CliError;
use gaitforge::simulate::HybridTrajectory;
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// One row per recorded sample: `t`, the states, then the inputs if any.
pub fn trajectory_table(traj: &HybridTrajectory, state_names: &[String], control_names: &[String]) -> Table {
    let with_controls = traj
        .segments
        .iter()
        .any(|s| s.controls.iter().any(|u| u.iter().any(|&v| v != 0.0)));
    let mut header = vec!["t".to_string()];
    header.extend(state_names.iter().cloned());
    if with_controls {
        header.extend(control_names.iter().cloned());
    }
    let mut table = Table::new(header);
    for seg in &traj.segments {
        for (k, (t, x)) in seg.times.iter().zip(&seg.states).enumerate() {
            let mut row = vec![*t];
            row.extend_from_slice(x);
            if with_controls {
                row.extend(seg.control_at(k, control_names.len()));
            }
            table.rows.push(row);
        }
    }
    // A closed stride ends with the post-impact state of its last event.
    if let (Some(last), true) = (traj.events.last(), traj.events.len() == traj.segments.len()) {
        let mut row = vec![last.time];
        row.extend_from_slice(&last.post);
        if with_controls {
            row.extend(std::iter::repeat_n(0.0, control_names.len()));
        }
        table.rows.push(row);
    }
    table
}
