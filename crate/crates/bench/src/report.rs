//! Summary tables over finished run directories, and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{override_value, ExperimentConfig};
use crate::csvio::read_trajectory;
use crate::error::{BenchError, Result};
use crate::manifest::Manifest;
use crate::runner::{manifest_path, run_experiment_with, ExperimentSummary};

/// Final metrics of one algorithm (per sweep value), as medians over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub sweep_value: Option<String>,
    pub algorithm: String,
    pub runs: usize,
    pub failed: usize,
    pub final_iter: usize,
    pub obj_err: f64,
    pub viol_avg: f64,
    pub viol_max: f64,
    pub gap: Option<f64>,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub problem_kind: String,
    pub sweep_param: Option<String>,
    pub rows: Vec<ReportRow>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Default)]
struct Acc {
    runs: usize,
    failed: usize,
    iter: usize,
    obj_err: Vec<f64>,
    viol_avg: Vec<f64>,
    viol_max: Vec<f64>,
    gap: Vec<f64>,
    wall: Vec<f64>,
}

/// Builds the summary table for the run directories in `dirs`. All runs
/// must be on the same problem instance.
pub fn compare_report(dirs: &[PathBuf]) -> Result<Report> {
    if dirs.is_empty() {
        return Err(BenchError::Report("no run directories given".into()));
    }
    let mut problem: Option<(String, String)> = None;
    let mut sweep_param: Option<String> = None;
    // keyed by (sweep value, algorithm label), in first-seen order
    let mut groups: Vec<((Option<String>, String), Acc)> = Vec::new();
    for dir in dirs {
        let manifest = Manifest::read(&manifest_path(dir))?;
        let field = |k: &str| {
            manifest
                .get(k)
                .map(str::to_string)
                .ok_or_else(|| BenchError::Report(format!("{}: manifest lacks '{k}'", dir.display())))
        };
        let digest = field("problem_digest")?;
        let kind = field("problem_kind")?;
        match &problem {
            None => problem = Some((digest, kind)),
            Some((d, _)) if *d != digest => {
                return Err(BenchError::Report(format!(
                    "{} is a different problem instance; reports never aggregate across problems",
                    dir.display()
                )))
            }
            _ => {}
        }
        let value = manifest.get("sweep.value").map(str::to_string);
        if let Some(p) = manifest.get("sweep.param") {
            sweep_param.get_or_insert_with(|| p.to_string());
        }
        let cells = field("cells")?;
        for file in cells.split(',').filter(|f| !f.is_empty()) {
            let key = file.trim_end_matches(".csv");
            let label = field(&format!("cell.{key}.algorithm"))?;
            let traj = read_trajectory(&dir.join(file))?;
            let slot = match groups.iter().position(|(k, _)| k.0 == value && k.1 == label) {
                Some(i) => i,
                None => {
                    groups.push(((value.clone(), label.clone()), Acc::default()));
                    groups.len() - 1
                }
            };
            let acc = &mut groups[slot].1;
            acc.runs += 1;
            if traj.error.is_some() {
                acc.failed += 1;
                continue;
            }
            let Some(last) = traj.records.last() else { continue };
            acc.iter = acc.iter.max(last.iter);
            acc.obj_err.push(last.obj_err);
            acc.viol_avg.push(last.viol_avg);
            acc.viol_max.push(last.viol_max);
            if let Some(g) = last.gap {
                acc.gap.push(g);
            }
            let wall = if last.wall_seconds > 0.0 {
                last.wall_seconds
            } else {
                manifest
                    .get(&format!("cell.{key}.wall_s"))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(f64::NAN)
            };
            acc.wall.push(wall);
        }
    }
    let (_, kind) = problem.expect("at least one directory");
    let rows = groups
        .into_iter()
        .map(|((value, label), a)| ReportRow {
            sweep_value: value,
            algorithm: label,
            runs: a.runs,
            failed: a.failed,
            final_iter: a.iter,
            obj_err: median(a.obj_err),
            viol_avg: median(a.viol_avg),
            viol_max: median(a.viol_max),
            gap: (!a.gap.is_empty()).then(|| median(a.gap)),
            wall_s: median(a.wall),
        })
        .collect();
    Ok(Report {
        problem_kind: kind,
        sweep_param,
        rows,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = format!("problem: {}\n", self.problem_kind);
        let sweep = self.sweep_param.clone();
        let mut header = String::new();
        if let Some(p) = &sweep {
            let _ = write!(header, "{p:>12} ");
        }
        let _ = writeln!(
            header,
            "{:<10} {:>5} {:>7} {:>12} {:>12} {:>12} {:>12} {:>10}",
            "algorithm", "runs", "iter", "obj_err", "viol_avg", "viol_max", "gap", "time_s"
        );
        out.push_str(&header);
        for r in &self.rows {
            if sweep.is_some() {
                let _ = write!(out, "{:>12} ", r.sweep_value.as_deref().unwrap_or("-"));
            }
            let runs = if r.failed > 0 {
                format!("{}!{}", r.runs, r.failed)
            } else {
                r.runs.to_string()
            };
            let _ = writeln!(
                out,
                "{:<10} {:>5} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>12} {:>10.3}",
                r.algorithm,
                runs,
                r.final_iter,
                r.obj_err,
                r.viol_avg,
                r.viol_max,
                r.gap.map_or("-".to_string(), |g| format!("{g:.4e}")),
                r.wall_s
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sweep_value,algorithm,runs,failed,iter,obj_err,viol_avg,viol_max,gap,time_s\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{},{:.6}",
                r.sweep_value.as_deref().unwrap_or(""),
                r.algorithm,
                r.runs,
                r.failed,
                r.final_iter,
                r.obj_err,
                r.viol_avg,
                r.viol_max,
                r.gap.map_or(String::new(), |g| format!("{g:.16e}")),
                r.wall_s
            );
        }
        out
    }
}

/// Runs the config once per value of `param` (a dotted key such as
/// `solver.theta`), each in `out/<param>=<value>`, then writes
/// `report.txt` and `report.csv` into `out`.
pub fn sweep(
    base: &toml::Table,
    base_dir: Option<&Path>,
    param: &str,
    values: &[String],
    seeds: Option<&[u64]>,
    out: &Path,
) -> Result<(Vec<ExperimentSummary>, Report)> {
    if values.is_empty() {
        return Err(BenchError::config("sweep needs at least one value"));
    }
    let mut configs = Vec::new();
    let mut errors = Vec::new();
    for v in values {
        let mut table = base.clone();
        override_value(&mut table, param, v)?;
        match ExperimentConfig::from_table(table, base_dir) {
            Ok(mut cfg) => {
                if let Some(s) = seeds {
                    cfg.run.seeds = s.to_vec();
                }
                cfg.run.output = out.join(format!("{param}={v}"));
                configs.push((v.clone(), cfg));
            }
            Err(BenchError::Config(items)) => errors.extend(items.into_iter().map(|e| format!("{param}={v}: {e}"))),
            Err(e) => return Err(e),
        }
    }
    if !errors.is_empty() {
        return Err(BenchError::Config(errors));
    }
    let mut summaries = Vec::new();
    for (v, cfg) in &configs {
        let extra = [
            ("sweep.param".to_string(), param.to_string()),
            ("sweep.value".to_string(), v.clone()),
        ];
        summaries.push(run_experiment_with(cfg, &extra)?);
    }
    let dirs: Vec<PathBuf> = configs.iter().map(|(_, c)| c.run.output.clone()).collect();
    let report = compare_report(&dirs)?;
    let write = |name: &str, text: String| {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| BenchError::io(&p, e))
    };
    write("report.txt", report.to_text())?;
    write("report.csv", report.to_csv())?;
    Ok((summaries, report))
}

/// Groups report rows by algorithm: `algorithm -> [(sweep value, row)]`.
pub fn sweep_matrix(report: &Report) -> BTreeMap<String, Vec<(String, ReportRow)>> {
    let mut m: BTreeMap<String, Vec<(String, ReportRow)>> = BTreeMap::new();
    for r in &report.rows {
        m.entry(r.algorithm.clone())
            .or_default()
            .push((r.sweep_value.clone().unwrap_or_default(), r.clone()));
    }
    m
}
