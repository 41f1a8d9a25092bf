//! CSV time series and tracking-error summary tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! re-read CSV reproduces the in-memory values exactly.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{MeanMetrics, MetricsReport};
use crate::scenario::ControllerKind;
use crate::sim::{Sample, TimeSeries};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed row {row}: {message}")]
    Malformed {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

pub const TIMESERIES_HEADER: [&str; 11] = [
    "t", "y1", "y2", "y1_meas", "y2_meas", "u1", "u2", "u1_del", "u2_del", "load1", "load2",
];

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn emit_timeseries(ts: &TimeSeries, path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(TIMESERIES_HEADER).map_err(csv_err(path))?;
    for s in &ts.samples {
        let row = [
            s.t, s.y[0], s.y[1], s.y_meas[0], s.y_meas[1], s.u[0], s.u[1], s.u_del[0], s.u_del[1],
            s.load[0], s.load[1],
        ];
        w.write_record(row.map(fmt)).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_timeseries(path: &Path) -> Result<TimeSeries, ReportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut samples = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let v: Vec<f64> = rec
            .iter()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseFloatError| ReportError::Malformed {
                path: path.to_path_buf(),
                row,
                message: e.to_string(),
            })?;
        if v.len() != TIMESERIES_HEADER.len() {
            return Err(ReportError::Malformed {
                path: path.to_path_buf(),
                row,
                message: format!("expected {} fields, got {}", TIMESERIES_HEADER.len(), v.len()),
            });
        }
        samples.push(Sample {
            t: v[0],
            y: [v[1], v[2]],
            y_meas: [v[3], v[4]],
            u: [v[5], v[6]],
            u_del: [v[7], v[8]],
            load: [v[9], v[10]],
        });
    }
    Ok(TimeSeries { samples })
}

/// Per-run metrics of a batch, one CSV row per seed.
pub fn emit_per_run(runs: &[MetricsReport], path: &Path) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "seed", "diverged", "samples", "sum_abs_e1", "sum_sq_e1", "max_abs_e1", "sum_abs_e2",
        "sum_sq_e2", "max_abs_e2",
    ])
    .map_err(csv_err(path))?;
    for r in runs {
        let mut row = vec![r.seed.to_string(), r.diverged.to_string(), r.samples.to_string()];
        for i in 0..2 {
            row.extend([fmt(r.sum_abs_e[i]), fmt(r.sum_sq_e[i]), fmt(r.max_abs_e[i])]);
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// One line of a Table-I/II style summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub controller: ControllerKind,
    pub scenario: String,
    pub runs: usize,
    pub diverged_runs: usize,
    pub sum_abs_e1: f64,
    pub sum_sq_e1: f64,
    pub sum_abs_e2: f64,
    pub sum_sq_e2: f64,
}

impl SummaryRow {
    pub fn new(controller: ControllerKind, scenario: impl Into<String>, m: &MeanMetrics) -> Self {
        Self {
            controller,
            scenario: scenario.into(),
            runs: m.runs,
            diverged_runs: m.diverged_runs,
            sum_abs_e1: m.sum_abs_e[0],
            sum_sq_e1: m.sum_sq_e[0],
            sum_abs_e2: m.sum_abs_e[1],
            sum_sq_e2: m.sum_sq_e[1],
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.controller.as_str(), self.scenario)
    }
}

fn cell(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

/// Aligned text table. Rows with at least one diverged run are marked `!`.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let header = ["controller/scenario", "sum|e1|", "sum e1^2", "sum|e2|", "sum e2^2", "diverged"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            let mark = if r.diverged_runs > 0 { " !" } else { "" };
            [
                r.label(),
                cell(r.sum_abs_e1),
                cell(r.sum_sq_e1),
                cell(r.sum_abs_e2),
                cell(r.sum_sq_e2),
                format!("{}/{}{mark}", r.diverged_runs, r.runs),
            ]
        })
        .collect();
    let widths: [usize; 6] = std::array::from_fn(|c| {
        body.iter()
            .map(|row| row[c].len())
            .chain([header[c].len()])
            .max()
            .unwrap_or(0)
    });
    let mut out = String::new();
    let line = |cols: [&str; 6], out: &mut String| {
        out.push_str(&format!("{:<w$}", cols[0], w = widths[0]));
        for c in 1..6 {
            out.push_str(&format!("  {:>w$}", cols[c], w = widths[c]));
        }
        out.push('\n');
    };
    line(header, &mut out);
    for row in &body {
        line(std::array::from_fn(|c| row[c].as_str()), &mut out);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub sample_period: f64,
    pub rows: Vec<SummaryRow>,
}

/// Write `summary.txt` and `summary.json` into `dir`; returns the table.
pub fn emit_summary(rows: &[SummaryRow], sample_period: f64, dir: &Path) -> Result<String, ReportError> {
    let table = render_table(rows);
    let txt = dir.join("summary.txt");
    std::fs::write(&txt, &table).map_err(io_err(&txt))?;

    let json = dir.join("summary.json");
    let doc = SummaryDocument {
        sample_period,
        rows: rows.to_vec(),
    };
    let mut f = File::create(&json).map_err(io_err(&json))?;
    let text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(io_err(&json))?;
    Ok(table)
}
