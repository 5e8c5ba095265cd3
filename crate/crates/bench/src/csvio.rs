//! Per-run trajectory CSV.
//!
//! Header `iter,wall_s,obj_err,viol_avg,viol_max,gap,flags`, one row per
//! checkpoint. Reals are written with 17 significant digits; `gap` is empty
//! for constrained runs; `flags` is a `;`-separated subset of
//! `csa1_absent` and `box_active`. A run that stopped early ends with one
//! row whose `iter` field is `error` and whose `flags` field carries the
//! message.

use std::path::Path;

use aprid_core::RunRecord;

use crate::error::{BenchError, Result};

pub const HEADER: [&str; 7] = ["iter", "wall_s", "obj_err", "viol_avg", "viol_max", "gap", "flags"];

/// Records plus the failure message of an early stop.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<RunRecord>,
    pub error: Option<String>,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn flags(r: &RunRecord) -> String {
    let mut f = Vec::new();
    if r.csa1_absent {
        f.push("csa1_absent");
    }
    if r.box_active {
        f.push("box_active");
    }
    f.join(";")
}

/// Renders a trajectory. `wall_time = false` writes zeros in `wall_s`.
pub fn render(records: &[RunRecord], error: Option<&str>, wall_time: bool) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        let wall = if wall_time { r.wall_seconds } else { 0.0 };
        w.write_record([
            r.iter.to_string(),
            real(wall),
            real(r.obj_err),
            real(r.viol_avg),
            real(r.viol_max),
            r.gap.map(real).unwrap_or_default(),
            flags(r),
        ])
        .expect("in-memory write");
    }
    if let Some(msg) = error {
        w.write_record(["error", "", "", "", "", "", msg]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

pub fn write_trajectory(path: &Path, records: &[RunRecord], error: Option<&str>, wall_time: bool) -> Result<()> {
    std::fs::write(path, render(records, error, wall_time)).map_err(|e| BenchError::io(path, e))
}

/// Parses a trajectory. The objective itself is not part of the schema and
/// reads back as NaN.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| BenchError::Parse {
        path: path.into(),
        line,
        message,
    };
    let header = rd.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(parse_err(1, format!("unexpected header, expected {}", HEADER.join(","))));
    }
    let mut records = Vec::new();
    let mut error = None;
    for (i, row) in rd.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| parse_err(line, e.to_string()))?;
        if error.is_some() {
            return Err(parse_err(line, "rows after the error row".into()));
        }
        if row.len() != HEADER.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", HEADER.len(), row.len())));
        }
        if &row[0] == "error" {
            error = Some(row[6].to_string());
            continue;
        }
        let num = |j: usize| -> Result<f64> {
            row[j]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad {} value '{}'", HEADER[j], &row[j])))
        };
        let iter: usize = row[0].parse().map_err(|_| parse_err(line, format!("bad iter '{}'", &row[0])))?;
        let gap = if row[5].is_empty() { None } else { Some(num(5)?) };
        let mut rec = RunRecord {
            iter,
            wall_seconds: num(1)?,
            objective: f64::NAN,
            obj_err: num(2)?,
            viol_avg: num(3)?,
            viol_max: num(4)?,
            gap,
            csa1_absent: false,
            box_active: false,
        };
        for f in row[6].split(';').filter(|f| !f.is_empty()) {
            match f {
                "csa1_absent" => rec.csa1_absent = true,
                "box_active" => rec.box_active = true,
                other => return Err(parse_err(line, format!("unknown flag '{other}'"))),
            }
        }
        records.push(rec);
    }
    Ok(Trajectory { records, error })
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_trajectory(&text, path)
}
