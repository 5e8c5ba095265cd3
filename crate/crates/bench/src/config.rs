//! Experiment configuration.
//!
//! Configs are TOML files: flat `key = value` lines grouped into sections.
//! Every omitted value takes its default, and the fully resolved config is
//! what gets hashed and written to the run manifest.
//!
//! ```toml
//! [problem]
//! kind = "qcqp_finite_sum"
//! n = 10
//! p = 5
//! terms = 1000
//! constraints = 1000
//!
//! [run]
//! algorithms = ["aprid", "msa", "csa", "pdsg_adp"]
//! iterations = 20000
//! seeds = [1, 2, 3]
//!
//! [steps]
//! alpha = 10.0
//! rho = 3.1622776601683795
//! gamma = 10.0
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aprid_core::problems::{Normalization, DEFAULT_EVAL_SAMPLES, DEFAULT_MEMORY_BUDGET, NPC_DEFAULT_BOX};
use aprid_core::{log_spaced_checkpoints, DualRule, ScheduleKind, StepSchedule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::DatasetFormat;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Aprid,
    Apriad,
    Msa,
    Csa,
    PdsgAdp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Aprid => "aprid",
            Self::Apriad => "apriad",
            Self::Msa => "msa",
            Self::Csa => "csa",
            Self::PdsgAdp => "pdsg_adp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "aprid" => Ok(Self::Aprid),
            "apriad" => Ok(Self::Apriad),
            "msa" => Ok(Self::Msa),
            "csa" => Ok(Self::Csa),
            "pdsg_adp" | "pdsg" => Ok(Self::PdsgAdp),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationSpec {
    #[default]
    UnitNorm,
    Raw,
}

impl From<NormalizationSpec> for Normalization {
    fn from(n: NormalizationSpec) -> Self {
        match n {
            NormalizationSpec::UnitNorm => Normalization::UnitNorm,
            NormalizationSpec::Raw => Normalization::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub d: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    #[serde(default = "defaults::separation")]
    pub separation: f64,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    QcqpFiniteSum {
        n: usize,
        p: usize,
        terms: usize,
        constraints: usize,
        #[serde(default = "defaults::seed")]
        seed: u64,
        #[serde(default)]
        normalization: NormalizationSpec,
        #[serde(default = "defaults::memory_budget")]
        memory_budget: usize,
    },
    QcqpExpectation {
        n: usize,
        p: usize,
        #[serde(default)]
        normalization: NormalizationSpec,
        #[serde(default = "defaults::eval_samples")]
        eval_samples: usize,
    },
    Npc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        format: Option<DatasetFormat>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_features: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        synthetic: Option<SyntheticSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_hat: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_target: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default = "defaults::npc_box")]
        box_halfwidth: f64,
    },
    Bilinear {
        n: usize,
        m: usize,
        #[serde(default = "defaults::seed")]
        seed: u64,
        #[serde(default)]
        sigma: f64,
    },
    /// A stored instance written by a previous run.
    Snapshot { path: PathBuf },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::QcqpFiniteSum { .. } => "qcqp_finite_sum",
            Self::QcqpExpectation { .. } => "qcqp_expectation",
            Self::Npc { .. } => "npc",
            Self::Bilinear { .. } => "bilinear",
            Self::Snapshot { .. } => "snapshot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKindSpec {
    #[default]
    Constant,
    VaryingSqrtLog,
    VaryingSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualRuleSpec {
    Recursion,
    Proportional,
}

impl From<DualRuleSpec> for DualRule {
    fn from(r: DualRuleSpec) -> Self {
        match r {
            DualRuleSpec::Recursion => DualRule::Recursion,
            DualRuleSpec::Proportional => DualRule::Proportional,
        }
    }
}

/// Step parameters; constant steps are `(alpha, rho, gamma) / sqrt(K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsSpec {
    #[serde(default)]
    pub kind: StepKindSpec,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    /// CSA step.
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    /// Dual step rule for APriD (default `recursion`) and APriAD (default
    /// `proportional`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<DualRuleSpec>,
}

impl Default for StepsSpec {
    fn default() -> Self {
        Self {
            kind: StepKindSpec::Constant,
            alpha: defaults::alpha(),
            rho: defaults::rho(),
            gamma: defaults::gamma(),
            rule: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "defaults::beta1")]
    pub beta1: f64,
    #[serde(default = "defaults::beta2")]
    pub beta2: f64,
    #[serde(default = "defaults::theta")]
    pub theta: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            beta1: defaults::beta1(),
            beta2: defaults::beta2(),
            theta: defaults::theta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    #[serde(default = "defaults::j0")]
    pub j0: usize,
    #[serde(default = "defaults::j1")]
    pub j1: usize,
    #[serde(default = "defaults::jg")]
    pub jg: usize,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            j0: defaults::j0(),
            j1: defaults::j1(),
            jg: defaults::jg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsaSpec {
    #[serde(default = "defaults::csa_eta")]
    pub eta: f64,
    /// First iteration (1-based) included in the averages.
    #[serde(default = "defaults::csa_s")]
    pub s: usize,
}

impl Default for CsaSpec {
    fn default() -> Self {
        Self {
            eta: defaults::csa_eta(),
            s: defaults::csa_s(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsaSpec {
    #[serde(default = "defaults::z_cap")]
    pub z_cap: f64,
}

impl Default for MsaSpec {
    fn default() -> Self {
        Self { z_cap: defaults::z_cap() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdsgSpec {
    /// Step overrides; default to `[steps]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default = "defaults::pdsg_eta")]
    pub eta: f64,
    #[serde(default = "defaults::penalty")]
    pub penalty: f64,
}

impl Default for PdsgSpec {
    fn default() -> Self {
        Self {
            alpha: None,
            rho: None,
            eta: defaults::pdsg_eta(),
            penalty: defaults::penalty(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Deterministic solve of the (frozen) evaluation program.
    #[default]
    Solve,
    /// Smallest objective among all recorded feasible averages.
    BestFeasible,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default)]
    pub mode: ReferenceMode,
    #[serde(default = "defaults::reference_tol")]
    pub tol: f64,
    /// `viol_max` bound for a record to count as feasible in
    /// `best_feasible` mode.
    #[serde(default = "defaults::feasibility_tol")]
    pub feasibility_tol: f64,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        Self {
            mode: ReferenceMode::Solve,
            tol: defaults::reference_tol(),
            feasibility_tol: defaults::feasibility_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    /// That many log-spaced iterations in `[1, K]`.
    Count(usize),
    List(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "defaults::algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    #[serde(default = "defaults::checkpoints")]
    pub checkpoints: CheckpointSpec,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "defaults::output")]
    pub output: PathBuf,
    /// Seed of the frozen evaluation sample for expectation problems; all
    /// runs of an experiment are measured on the same sample.
    #[serde(default)]
    pub eval_seed: u64,
    /// Write measured wall time into the CSV `wall_s` column. When off the
    /// column is zero and CSV bodies are byte-identical across re-runs.
    #[serde(default = "defaults::yes")]
    pub record_wall_time: bool,
    /// Count checkpoint evaluation in the reported wall time.
    #[serde(default)]
    pub include_eval_time: bool,
    #[serde(default = "defaults::dual_cap")]
    pub dual_cap: f64,
    /// Write `instance.snap` next to the results.
    #[serde(default)]
    pub snapshot: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            algorithms: defaults::algorithms(),
            iterations: defaults::iterations(),
            checkpoints: defaults::checkpoints(),
            seeds: defaults::seeds(),
            output: defaults::output(),
            eval_seed: 0,
            record_wall_time: true,
            include_eval_time: false,
            dual_cap: defaults::dual_cap(),
            snapshot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub steps: StepsSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub batches: BatchSpec,
    #[serde(default)]
    pub csa: CsaSpec,
    #[serde(default)]
    pub msa: MsaSpec,
    #[serde(default)]
    pub pdsg: PdsgSpec,
    #[serde(default)]
    pub reference: ReferenceSpec,
}

mod defaults {
    use super::*;

    pub fn seed() -> u64 {
        1
    }
    pub fn separation() -> f64 {
        2.0
    }
    pub fn memory_budget() -> usize {
        DEFAULT_MEMORY_BUDGET
    }
    pub fn eval_samples() -> usize {
        DEFAULT_EVAL_SAMPLES
    }
    pub fn npc_box() -> f64 {
        NPC_DEFAULT_BOX
    }
    pub fn alpha() -> f64 {
        10.0
    }
    pub fn rho() -> f64 {
        1.0
    }
    pub fn gamma() -> f64 {
        10.0
    }
    pub fn beta1() -> f64 {
        aprid_core::solver::DEFAULT_BETA1
    }
    pub fn beta2() -> f64 {
        aprid_core::solver::DEFAULT_BETA2
    }
    pub fn theta() -> f64 {
        aprid_core::solver::DEFAULT_THETA
    }
    pub fn j0() -> usize {
        10
    }
    pub fn j1() -> usize {
        10
    }
    pub fn jg() -> usize {
        100
    }
    pub fn csa_eta() -> f64 {
        aprid_core::baselines::DEFAULT_CSA_TOLERANCE
    }
    pub fn csa_s() -> usize {
        1
    }
    pub fn z_cap() -> f64 {
        aprid_core::baselines::DEFAULT_Z_CAP
    }
    pub fn pdsg_eta() -> f64 {
        aprid_core::baselines::DEFAULT_PDSG_ETA
    }
    pub fn penalty() -> f64 {
        1.0
    }
    pub fn reference_tol() -> f64 {
        1e-6
    }
    pub fn feasibility_tol() -> f64 {
        1e-4
    }
    pub fn algorithms() -> Vec<Algorithm> {
        vec![Algorithm::Aprid]
    }
    pub fn iterations() -> usize {
        10_000
    }
    pub fn checkpoints() -> CheckpointSpec {
        CheckpointSpec::Count(aprid_core::run::DEFAULT_CHECKPOINTS)
    }
    pub fn seeds() -> Vec<u64> {
        vec![1]
    }
    pub fn output() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn yes() -> bool {
        true
    }
    pub fn dual_cap() -> f64 {
        aprid_core::run::DEFAULT_DUAL_CAP
    }
}

fn positive(errors: &mut Vec<String>, name: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{name} must be positive and finite, got {v}"));
    }
}

fn at_least_one(errors: &mut Vec<String>, name: &str, v: usize) {
    if v == 0 {
        errors.push(format!("{name} must be >= 1"));
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| BenchError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative dataset and snapshot paths are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| BenchError::config(e.to_string()))?;
        Self::from_table(table, path.parent())
    }

    pub fn from_table(table: toml::Table, base: Option<&Path>) -> Result<Self> {
        let mut cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| BenchError::config(e.to_string()))?;
        if let Some(base) = base {
            cfg.rebase_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.problem {
            ProblemSpec::Npc { dataset: Some(p), .. } | ProblemSpec::Snapshot { path: p } => fix(p),
            _ => {}
        }
    }

    /// Checks every value and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut e = Vec::new();
        self.validate_problem(&mut e);
        let run = &self.run;
        at_least_one(&mut e, "run.iterations", run.iterations);
        if run.algorithms.is_empty() {
            e.push("run.algorithms is empty".into());
        }
        let unique: BTreeSet<_> = run.algorithms.iter().collect();
        if unique.len() != run.algorithms.len() {
            e.push("run.algorithms lists an algorithm twice".into());
        }
        if run.seeds.is_empty() {
            e.push("run.seeds is empty".into());
        }
        if run.seeds.iter().collect::<BTreeSet<_>>().len() != run.seeds.len() {
            e.push("run.seeds has duplicates".into());
        }
        match &run.checkpoints {
            CheckpointSpec::Count(0) => e.push("run.checkpoints must be >= 1".into()),
            CheckpointSpec::List(list) => {
                if list.is_empty() {
                    e.push("run.checkpoints list is empty".into());
                }
                if list.iter().any(|&c| c == 0 || c > run.iterations) {
                    e.push(format!("run.checkpoints must lie in [1, {}]", run.iterations));
                }
                if list.windows(2).any(|w| w[1] <= w[0]) {
                    e.push("run.checkpoints must be strictly increasing".into());
                }
            }
            CheckpointSpec::Count(_) => {}
        }
        positive(&mut e, "run.dual_cap", run.dual_cap);

        let minimax = matches!(self.problem, ProblemSpec::Bilinear { .. });
        for a in &run.algorithms {
            match (a, minimax) {
                (Algorithm::Apriad, false) => e.push("apriad needs a minimax problem (kind = \"bilinear\")".into()),
                (Algorithm::Apriad, true) => {}
                (other, true) => e.push(format!("{other} needs a constrained problem, not a minimax one")),
                (Algorithm::PdsgAdp, false) if matches!(self.problem, ProblemSpec::QcqpExpectation { .. }) => {
                    e.push("pdsg_adp needs exactly evaluable constraints; qcqp_expectation samples them".into())
                }
                _ => {}
            }
        }
        if minimax && self.reference.mode == ReferenceMode::BestFeasible {
            e.push("reference.mode = best_feasible does not apply to minimax problems".into());
        }

        let s = &self.steps;
        positive(&mut e, "steps.alpha", s.alpha);
        positive(&mut e, "steps.rho", s.rho);
        positive(&mut e, "steps.gamma", s.gamma);
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.solver.beta1) {
            e.push(format!("solver.beta1 must lie in (0,1), got {}", self.solver.beta1));
        }
        if !unit(self.solver.beta2) {
            e.push(format!("solver.beta2 must lie in (0,1), got {}", self.solver.beta2));
        }
        positive(&mut e, "solver.theta", self.solver.theta);
        at_least_one(&mut e, "batches.j0", self.batches.j0);
        at_least_one(&mut e, "batches.j1", self.batches.j1);
        at_least_one(&mut e, "batches.jg", self.batches.jg);
        if !(self.csa.eta >= 0.0 && self.csa.eta.is_finite()) {
            e.push(format!("csa.eta must be >= 0, got {}", self.csa.eta));
        }
        at_least_one(&mut e, "csa.s", self.csa.s);
        if self.csa.s > run.iterations {
            e.push("csa.s exceeds run.iterations".into());
        }
        positive(&mut e, "msa.z_cap", self.msa.z_cap);
        if let Some(a) = self.pdsg.alpha {
            positive(&mut e, "pdsg.alpha", a);
        }
        if let Some(r) = self.pdsg.rho {
            positive(&mut e, "pdsg.rho", r);
        }
        if !(self.pdsg.eta >= 0.0 && self.pdsg.eta.is_finite()) {
            e.push(format!("pdsg.eta must be >= 0, got {}", self.pdsg.eta));
        }
        positive(&mut e, "pdsg.penalty", self.pdsg.penalty);
        positive(&mut e, "reference.tol", self.reference.tol);
        if self.reference.feasibility_tol.is_nan() || self.reference.feasibility_tol < 0.0 {
            e.push("reference.feasibility_tol must be >= 0".into());
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Config(e))
        }
    }

    fn validate_problem(&self, e: &mut Vec<String>) {
        match &self.problem {
            ProblemSpec::QcqpFiniteSum {
                n,
                p,
                terms,
                constraints,
                ..
            } => {
                at_least_one(e, "problem.n", *n);
                at_least_one(e, "problem.p", *p);
                at_least_one(e, "problem.terms", *terms);
                at_least_one(e, "problem.constraints", *constraints);
            }
            ProblemSpec::QcqpExpectation { n, p, eval_samples, .. } => {
                at_least_one(e, "problem.n", *n);
                at_least_one(e, "problem.p", *p);
                at_least_one(e, "problem.eval_samples", *eval_samples);
            }
            ProblemSpec::Npc {
                dataset,
                format,
                synthetic,
                c_hat,
                c_target,
                kappa,
                box_halfwidth,
                ..
            } => {
                match (dataset, synthetic) {
                    (Some(_), Some(_)) => e.push("problem: give either dataset or synthetic, not both".into()),
                    (None, None) => e.push("problem: npc needs a dataset path or a [problem.synthetic] table".into()),
                    (Some(_), None) if format.is_none() => {
                        e.push("problem.format is required with a dataset (dense_csv or sparse_index_value)".into())
                    }
                    _ => {}
                }
                if let Some(s) = synthetic {
                    at_least_one(e, "problem.synthetic.d", s.d);
                    at_least_one(e, "problem.synthetic.n_pos", s.n_pos);
                    at_least_one(e, "problem.synthetic.n_neg", s.n_neg);
                }
                match (c_hat, c_target, kappa) {
                    (Some(c), None, None) => {
                        if !c.is_finite() {
                            e.push("problem.c_hat must be finite".into());
                        }
                    }
                    (None, Some(_), Some(k)) => positive(e, "problem.kappa", *k),
                    _ => e.push("problem: give c_hat, or both c_target and kappa".into()),
                }
                positive(e, "problem.box_halfwidth", *box_halfwidth);
            }
            ProblemSpec::Bilinear { n, m, sigma, .. } => {
                at_least_one(e, "problem.n", *n);
                at_least_one(e, "problem.m", *m);
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    e.push(format!("problem.sigma must be >= 0, got {sigma}"));
                }
            }
            ProblemSpec::Snapshot { path } => {
                if !path.exists() {
                    e.push(format!("problem.path {} does not exist", path.display()));
                }
            }
        }
    }

    pub fn checkpoints(&self) -> Vec<usize> {
        match &self.run.checkpoints {
            CheckpointSpec::Count(c) => log_spaced_checkpoints(self.run.iterations, *c),
            CheckpointSpec::List(l) => l.clone(),
        }
    }

    fn kind(&self) -> ScheduleKind {
        match self.steps.kind {
            StepKindSpec::Constant => ScheduleKind::Constant,
            StepKindSpec::VaryingSqrtLog => ScheduleKind::VaryingSqrtLog,
            StepKindSpec::VaryingSqrt => ScheduleKind::VaryingSqrt,
        }
    }

    /// The step schedule each algorithm runs with.
    pub fn schedule(&self, algorithm: Algorithm) -> aprid_core::Result<StepSchedule> {
        let k = self.run.iterations;
        let b1 = self.solver.beta1;
        let s = &self.steps;
        let kind = self.kind();
        match algorithm {
            Algorithm::Aprid => {
                let rule = s.rule.map_or(DualRule::Recursion, Into::into);
                StepSchedule::new(kind, s.alpha, s.rho, k, b1, rule)
            }
            Algorithm::Apriad => {
                let rule = s.rule.map_or(DualRule::Proportional, Into::into);
                StepSchedule::new(kind, s.alpha, s.rho, k, b1, rule)
            }
            Algorithm::Msa => StepSchedule::new(kind, s.alpha, s.rho, k, b1, DualRule::Proportional),
            Algorithm::Csa => StepSchedule::new(kind, s.gamma, s.gamma, k, b1, DualRule::Proportional),
            Algorithm::PdsgAdp => StepSchedule::new(
                kind,
                self.pdsg.alpha.unwrap_or(s.alpha),
                self.pdsg.rho.unwrap_or(s.rho),
                k,
                b1,
                DualRule::Proportional,
            ),
        }
    }

    /// The resolved config minus the run-placement fields (`seeds`,
    /// `output`), as canonical TOML.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.run.seeds.clear();
        c.run.output = PathBuf::new();
        toml::to_string(&c).expect("config serializes")
    }

    /// SHA-256 of [`Self::canonical`], hex encoded.
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))
    }

    /// SHA-256 of the problem section alone; runs may only be compared
    /// when this matches.
    pub fn problem_digest(&self) -> String {
        let text = toml::to_string(&self.problem).expect("problem serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }

    /// Every resolved value as `section.key = value` lines.
    pub fn flattened(&self) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &value, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut Vec<(String, String)>) {
    match v {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sets `dotted.key` in a TOML table to `value`, parsed as a TOML literal
/// when possible and as a string otherwise.
pub fn override_value(table: &mut toml::Table, dotted: &str, value: &str) -> Result<()> {
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| BenchError::config(format!("bad parameter name '{dotted}'")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| BenchError::config(format!("'{p}' in '{dotted}' is not a section")))?;
    }
    cur.insert(last.to_string(), parsed);
    Ok(())
}

/// Parses `1,2,5` and ranges like `1-5`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || BenchError::config(format!("bad seed '{part}'"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(BenchError::config("empty seed list"));
    }
    Ok(out)
}
