use std::io::Write;
use std::path::Path;

use super::config::Experiment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub value: f64,
    pub reference: f64,
    /// `value / reference`, or NaN when the reference is zero.
    pub ratio: f64,
    pub wall_ms: u64,
}

impl SweepRow {
    pub fn new(eps: f64, value: f64, reference: f64, wall_ms: u64) -> Self {
        let ratio = if reference != 0.0 { value / reference } else { f64::NAN };
        SweepRow {
            eps,
            value,
            reference,
            ratio,
            wall_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub experiment: Experiment,
    /// Ordered by decreasing `eps`.
    pub rows: Vec<SweepRow>,
    pub metadata: Metadata,
    /// Violated acceptance thresholds, empty on success.
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `eps,value,reference,ratio,wall_ms`, one line per row.
pub fn emit_table(report: &SweepReport, path: &Path) -> Result<()> {
    let err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["eps", "value", "reference", "ratio", "wall_ms"])
        .map_err(err)?;
    for r in &report.rows {
        w.serialize((r.eps, r.value, r.reference, r.ratio, r.wall_ms))
            .map_err(err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Gnuplot script plotting the ratio column of `csv_name` against `eps`.
pub fn emit_plot(report: &SweepReport, csv_name: &str, path: &Path) -> Result<()> {
    let io = io_err(path);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(&io)?);
    let m = &report.metadata;
    writeln!(w, "# experiment {}", report.experiment).map_err(&io)?;
    writeln!(w, "# config sha256 {}", m.config_hash).map_err(&io)?;
    writeln!(w, "# seed {}", m.seed).map_err(&io)?;
    writeln!(w, "# vortexlab {}", m.version).map_err(&io)?;
    writeln!(w, "set datafile separator ','").map_err(&io)?;
    writeln!(w, "set key autotitle columnhead").map_err(&io)?;
    writeln!(w, "set logscale x").map_err(&io)?;
    writeln!(w, "set xlabel 'eps'").map_err(&io)?;
    writeln!(w, "set ylabel 'value / reference'").map_err(&io)?;
    writeln!(w, "set title '{}'", report.experiment).map_err(&io)?;
    writeln!(
        w,
        "plot '{csv_name}' using 1:4 with linespoints, 1 with lines dashtype 2 title 'reference'"
    )
    .map_err(&io)?;
    w.flush().map_err(&io)
}
