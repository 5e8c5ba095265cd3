//! Runs an experiment: one trajectory CSV per (algorithm, seed) cell plus a
//! `manifest.txt` describing the whole run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use aprid_core::baselines::{csa_run, msa_run, pdsg_adp_run, CsaParams, MsaParams, PdsgAdpParams};
use aprid_core::problems::{
    preprocess, synthetic_classification, BilinearSaddle, NpcProblem, QcqpExpectation, QcqpFiniteSum, QuadraticProgram,
};
use aprid_core::reference::{solve_reference, ReferenceOptions};
use aprid_core::{
    apriad_run, aprid_run, BatchSizes, Clock, DeterministicProgram, RunOutcome, RunRecord, RunResult, RunSettings,
    SolverParams, StochasticProgram,
};
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig, ProblemSpec, ReferenceMode};
use crate::csvio::write_trajectory;
use crate::data::load_dataset;
use crate::error::{BenchError, Result};
use crate::manifest::Manifest;
use crate::snapshot::{load_snapshot, write_bilinear, write_qcqp, Snapshot};

/// Seconds since construction.
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// A built problem instance, shared read-only by every cell.
pub enum Instance {
    QcqpFiniteSum(QcqpFiniteSum),
    QcqpExpectation {
        problem: QcqpExpectation,
        frozen: QuadraticProgram,
    },
    Npc(NpcProblem),
    Bilinear(BilinearSaddle),
}

impl Instance {
    pub fn build(spec: &ProblemSpec, eval_seed: u64) -> Result<Self> {
        Ok(match spec {
            ProblemSpec::QcqpFiniteSum {
                n,
                p,
                terms,
                constraints,
                seed,
                normalization,
                memory_budget,
            } => Self::QcqpFiniteSum(QcqpFiniteSum::with_options(
                *n,
                *p,
                *terms,
                *constraints,
                *seed,
                (*normalization).into(),
                *memory_budget,
            )?),
            ProblemSpec::QcqpExpectation {
                n,
                p,
                normalization,
                eval_samples,
            } => {
                let problem = QcqpExpectation::with_options(*n, *p, (*normalization).into(), *eval_samples)?;
                let frozen = problem.frozen(eval_seed, *eval_samples);
                Self::QcqpExpectation { problem, frozen }
            }
            ProblemSpec::Npc {
                dataset,
                format,
                n_features,
                synthetic,
                c_hat,
                c_target,
                kappa,
                box_halfwidth,
            } => {
                let raw = match (dataset, synthetic) {
                    (Some(path), _) => {
                        let format = format.ok_or_else(|| BenchError::config("problem.format is required"))?;
                        let data = load_dataset(path, format)?;
                        match n_features {
                            Some(d) if *d != data.n_features() => {
                                return Err(BenchError::config(format!(
                                    "dataset has {} features, config says {d}",
                                    data.n_features()
                                )))
                            }
                            _ => data,
                        }
                    }
                    (None, Some(s)) => synthetic_classification(s.d, s.n_pos, s.n_neg, s.separation, s.seed)?,
                    (None, None) => return Err(BenchError::config("npc needs a dataset or a synthetic table")),
                };
                let data = preprocess(&raw)?;
                let npc = match (c_hat, c_target, kappa) {
                    (Some(c), _, _) => NpcProblem::with_offset(&data, *c, *box_halfwidth)?,
                    (None, Some(c), Some(k)) => NpcProblem::new(&data, *c, *k, *box_halfwidth)?,
                    _ => return Err(BenchError::config("npc needs c_hat, or c_target and kappa")),
                };
                Self::Npc(npc)
            }
            ProblemSpec::Bilinear { n, m, seed, sigma } => Self::Bilinear(BilinearSaddle::random(*n, *m, *seed, *sigma)?),
            ProblemSpec::Snapshot { path } => match load_snapshot(path)? {
                Snapshot::Qcqp(q) => Self::QcqpFiniteSum(q),
                Snapshot::Bilinear(b) => Self::Bilinear(b),
            },
        })
    }

    pub fn stochastic(&self) -> Option<&(dyn StochasticProgram + Sync)> {
        match self {
            Self::QcqpFiniteSum(p) => Some(p),
            Self::QcqpExpectation { problem, .. } => Some(problem),
            Self::Npc(p) => Some(p),
            Self::Bilinear(_) => None,
        }
    }

    /// The deterministic program all metrics are computed on.
    pub fn evaluator(&self) -> Option<&(dyn DeterministicProgram + Sync)> {
        match self {
            Self::QcqpFiniteSum(p) => Some(p),
            Self::QcqpExpectation { frozen, .. } => Some(frozen),
            Self::Npc(p) => Some(p),
            Self::Bilinear(_) => None,
        }
    }

    pub fn snapshot_text(&self) -> Option<String> {
        match self {
            Self::QcqpFiniteSum(p) => Some(write_qcqp(p)),
            Self::Bilinear(b) => Some(write_bilinear(b)),
            _ => None,
        }
    }
}

/// One output trajectory.
#[derive(Debug, Clone)]
pub struct CellOutput {
    /// Output label: the algorithm name, or `csa1` / `csa2`.
    pub label: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub result: RunResult,
    pub error: Option<aprid_core::Error>,
    pub wall_seconds: f64,
}

impl CellOutput {
    pub fn file_name(&self) -> String {
        format!("{}_seed{}.csv", self.label, self.seed)
    }

    pub fn diverged(&self) -> bool {
        matches!(self.error, Some(aprid_core::Error::Divergence { .. }))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub output: PathBuf,
    pub config_digest: String,
    pub reference_objective: Option<f64>,
    pub cells: Vec<CellOutput>,
    pub total_wall_seconds: f64,
}

impl ExperimentSummary {
    pub fn diverged(&self) -> usize {
        self.cells.iter().filter(|c| c.diverged()).count()
    }

    pub fn failed(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }
}

fn preflight(cfg: &ExperimentConfig) -> Result<()> {
    let mut errors = Vec::new();
    for &a in &cfg.run.algorithms {
        match cfg.schedule(a) {
            Ok(schedule) => {
                if matches!(a, Algorithm::Aprid | Algorithm::Apriad) {
                    if let Err(e) = solver_params(cfg, schedule).validate() {
                        errors.push(format!("{a}: {e}"));
                    }
                }
            }
            Err(e) => errors.push(format!("{a} steps: {e}")),
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(BenchError::Config(errors))
    }
}

fn solver_params(cfg: &ExperimentConfig, schedule: aprid_core::StepSchedule) -> SolverParams {
    let mut p = SolverParams::new(schedule);
    p.beta1 = cfg.solver.beta1;
    p.beta2 = cfg.solver.beta2;
    p.theta = cfg.solver.theta;
    p
}

fn batches(cfg: &ExperimentConfig) -> Result<BatchSizes> {
    Ok(BatchSizes::new(cfg.batches.j0, cfg.batches.j1, cfg.batches.jg)?)
}

fn split(outcome: RunOutcome) -> (RunResult, Option<aprid_core::Error>) {
    match outcome {
        Ok(r) => (r, None),
        Err(f) => (f.partial, Some(f.error)),
    }
}

fn run_cell(
    cfg: &ExperimentConfig,
    instance: &Instance,
    reference: Option<f64>,
    algorithm: Algorithm,
    seed: u64,
) -> Result<Vec<CellOutput>> {
    let clock = StdClock::new();
    let mut settings = RunSettings::new(cfg.checkpoints());
    settings.reference_objective = reference;
    settings.eval_seed = cfg.run.eval_seed;
    settings.include_eval_time = cfg.run.include_eval_time;
    settings.clock = &clock;
    settings.dual_cap = cfg.run.dual_cap;
    if let Some(e) = instance.evaluator() {
        settings.evaluator = Some(e);
    }
    let schedule = cfg.schedule(algorithm)?;
    let b = batches(cfg)?;
    let outputs: Vec<(String, RunOutcome)> = match (algorithm, instance) {
        (Algorithm::Apriad, Instance::Bilinear(p)) => {
            vec![(algorithm.to_string(), apriad_run(p, &solver_params(cfg, schedule), seed, &settings))]
        }
        (Algorithm::Apriad, _) => return Err(BenchError::config("apriad needs a minimax problem")),
        (_, inst) => {
            let problem = inst
                .stochastic()
                .ok_or_else(|| BenchError::config(format!("{algorithm} needs a constrained problem")))?;
            match algorithm {
                Algorithm::Aprid => {
                    vec![("aprid".into(), aprid_run(problem, &solver_params(cfg, schedule), b, seed, &settings))]
                }
                Algorithm::Msa => {
                    let mut p = MsaParams::new(schedule);
                    p.z_cap = cfg.msa.z_cap;
                    vec![("msa".into(), msa_run(problem, &p, b, seed, &settings))]
                }
                Algorithm::Csa => {
                    let mut p = CsaParams::new(schedule);
                    p.eta_tol = cfg.csa.eta;
                    p.s = cfg.csa.s;
                    let runs = csa_run(problem, &p, b, seed, &settings);
                    vec![("csa1".into(), runs.csa1), ("csa2".into(), runs.csa2)]
                }
                Algorithm::PdsgAdp => {
                    let mut p = PdsgAdpParams::new(schedule);
                    p.eta_scale = cfg.pdsg.eta;
                    p.penalty = cfg.pdsg.penalty;
                    vec![("pdsg_adp".into(), pdsg_adp_run(problem, &p, b, seed, &settings))]
                }
                Algorithm::Apriad => unreachable!(),
            }
        }
    };
    let wall_seconds = clock.now();
    let digest = cfg.digest();
    Ok(outputs
        .into_iter()
        .map(|(label, outcome)| {
            let (mut result, error) = split(outcome);
            result.config_digest = digest.clone();
            CellOutput {
                label,
                algorithm,
                seed,
                result,
                error,
                wall_seconds,
            }
        })
        .collect())
}

/// Smallest objective among feasible, recorded averages of every run.
fn best_feasible(cells: &[CellOutput], tol: f64) -> Option<f64> {
    cells
        .iter()
        .flat_map(|c| &c.result.records)
        .filter(|r: &&RunRecord| r.gap.is_none() && !r.csa1_absent && r.viol_max <= tol && r.objective.is_finite())
        .map(|r| r.objective)
        .min_by(f64::total_cmp)
}

/// Runs every (algorithm, seed) cell of `cfg`, concurrently, and writes the
/// CSVs and manifest into `cfg.run.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_with(cfg, &[])
}

/// [`run_experiment`] with extra manifest entries (used by sweeps).
pub fn run_experiment_with(cfg: &ExperimentConfig, extra: &[(String, String)]) -> Result<ExperimentSummary> {
    cfg.validate()?;
    preflight(cfg)?;
    let started = Instant::now();
    let out = &cfg.run.output;
    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let instance = Instance::build(&cfg.problem, cfg.run.eval_seed)?;
    if cfg.run.snapshot {
        match instance.snapshot_text() {
            Some(text) => {
                let p = out.join("instance.snap");
                std::fs::write(&p, text).map_err(|e| BenchError::io(&p, e))?;
            }
            None => log::warn!("{} instances are rebuilt from their config; no snapshot written", cfg.problem.kind()),
        }
    }

    let reference = match (cfg.reference.mode, instance.evaluator()) {
        (ReferenceMode::Solve, Some(program)) => {
            let sol = solve_reference(program, &ReferenceOptions::with_tol(cfg.reference.tol))?;
            log::info!(
                "reference objective {:.10e} after {} outer iterations",
                sol.objective,
                sol.outer_iterations
            );
            Some(sol.objective)
        }
        _ => None,
    };

    let cells: Vec<(Algorithm, u64)> = cfg
        .run
        .algorithms
        .iter()
        .flat_map(|&a| cfg.run.seeds.iter().map(move |&s| (a, s)))
        .collect();
    let results: Vec<Result<Vec<CellOutput>>> = cells
        .par_iter()
        .map(|&(a, s)| run_cell(cfg, &instance, reference, a, s))
        .collect();
    let mut outputs = Vec::new();
    for r in results {
        outputs.extend(r?);
    }

    let reference = match cfg.reference.mode {
        ReferenceMode::BestFeasible => {
            let best = best_feasible(&outputs, cfg.reference.feasibility_tol);
            match best {
                Some(v) => outputs.iter_mut().for_each(|c| c.result.rebase_objective(v)),
                None => log::warn!("no recorded average is feasible to {}", cfg.reference.feasibility_tol),
            }
            best
        }
        _ => reference,
    };

    for c in &outputs {
        let msg = c.error.as_ref().map(|e| e.to_string());
        write_trajectory(&out.join(c.file_name()), &c.result.records, msg.as_deref(), cfg.run.record_wall_time)?;
        if let Some(m) = &msg {
            log::error!("{} seed {}: {m}", c.label, c.seed);
        }
    }

    let total = started.elapsed().as_secs_f64();
    let summary = ExperimentSummary {
        output: out.clone(),
        config_digest: cfg.digest(),
        reference_objective: reference,
        cells: outputs,
        total_wall_seconds: total,
    };
    write_manifest(cfg, &summary, extra)?;
    Ok(summary)
}

fn write_manifest(cfg: &ExperimentConfig, s: &ExperimentSummary, extra: &[(String, String)]) -> Result<()> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("format", "aprid-manifest 1".into());
    put("aprid_bench_version", env!("CARGO_PKG_VERSION").into());
    put("config_digest", s.config_digest.clone());
    put("problem_digest", cfg.problem_digest());
    put("problem_kind", cfg.problem.kind().into());
    put("seeds", cfg.run.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    put(
        "finished_unix_s",
        SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()).to_string(),
    );
    put("total_wall_s", format!("{:.6}", s.total_wall_seconds));
    put(
        "reference.objective",
        s.reference_objective.map_or("none".into(), |v| format!("{v:.16e}")),
    );
    put(
        "cells",
        s.cells.iter().map(CellOutput::file_name).collect::<Vec<_>>().join(","),
    );
    for c in &s.cells {
        let key = c.file_name().trim_end_matches(".csv").to_string();
        put(&format!("cell.{key}.algorithm"), c.label.clone());
        put(&format!("cell.{key}.wall_s"), format!("{:.6}", c.wall_seconds));
        let status = match &c.error {
            None => "ok".to_string(),
            Some(e) if c.diverged() => format!("diverged: {e}"),
            Some(e) => format!("failed: {e}"),
        };
        put(&format!("cell.{key}.status"), status);
    }
    for (k, v) in cfg.flattened() {
        put(&format!("config.{k}"), v);
    }
    for (k, v) in extra {
        put(k, v.clone());
    }
    let path = s.output.join("manifest.txt");
    Manifest(m).write(&path)
}

/// Path of the manifest inside a run directory.
pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.txt")
}
