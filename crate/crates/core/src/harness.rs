//! Config-driven experiment runner behind the `nhpp-sched` binary.
//!
//! A run evaluates every family × permutation × method combination of an
//! [`ExperimentConfig`] and produces a [`Report`]: flat estimate rows (the
//! CSV), per family/method summaries with best/worst order and the
//! mis-sequencing cost, and optional threshold reports.

use crate::batch::{Permutation, TaskBatch};
use crate::error::{Error, Result};
use crate::exact::{refine_until, Closure, RefineOptions};
use crate::optimizer::{lpt, spt};
use crate::rate_model::{RateKind, RateModel};
use crate::sampler::SamplingMethod;
use crate::sim::{estimate_makespan, SimOptions};
use crate::single_failure::{expected_makespan_single_failure, pairwise_difference};
use crate::theory::{prop2_cutoffs, theorem1_threshold, theorem2_threshold, ShortTaskSpec, ThresholdReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Largest batch for which `"all"` permutations may be requested.
pub const MAX_ALL_TASKS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Monte Carlo simulation.
    Mc,
    /// Integral-equation solver.
    Exact,
    /// At-most-one-failure model by quadrature.
    SingleFailure,
    /// Optimality threshold reports.
    Thresholds,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Exact => "exact",
            Method::SingleFailure => "single_failure",
            Method::Thresholds => "thresholds",
        }
    }
}

/// One rate family of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    /// Row label; the kind name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub model: RateKind,
}

impl FamilyConfig {
    pub fn new(model: RateKind) -> Self {
        FamilyConfig { label: None, model }
    }

    pub fn label(&self) -> Result<String> {
        match &self.label {
            Some(l) => Ok(l.clone()),
            None => Ok(RateModel::new(self.model.clone())?.kind_name().to_string()),
        }
    }
}

fn default_permutations() -> Vec<String> {
    vec!["spt".into(), "lpt".into()]
}
fn default_methods() -> Vec<Method> {
    vec![Method::Mc]
}
fn default_replications() -> u64 {
    200_000
}
fn default_seed() -> u64 {
    20_240_601
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Directory for report files; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// File stem of `<stem>.csv` / `<stem>.json` (default `report`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

/// A full experiment, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub families: Vec<FamilyConfig>,
    pub tasks: Vec<f64>,
    /// Entries are `spt`, `lpt`, `all` or a 1-based order such as `2,1,3`.
    #[serde(default = "default_permutations")]
    pub permutations: Vec<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingMethod,
    /// Worker threads; the global pool when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Convergence tolerance of the exact solver.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Tail closure of the exact solver; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<Closure>,
    /// Short-task scale for the slope-at-zero threshold (tasks are then the
    /// base lengths).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Record wall-clock runtimes; `false` writes zeros so reports are
    /// byte-for-byte reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// A config for one model and batch with defaults elsewhere.
    pub fn single(model: RateKind, tasks: Vec<f64>) -> Self {
        ExperimentConfig {
            name: String::new(),
            families: vec![FamilyConfig::new(model)],
            tasks,
            permutations: default_permutations(),
            methods: default_methods(),
            replications: default_replications(),
            seed: default_seed(),
            sampling: SamplingMethod::default(),
            threads: None,
            tolerance: default_tolerance(),
            closure: None,
            epsilon: None,
            timing: true,
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn batch(&self) -> Result<TaskBatch> {
        TaskBatch::new(self.tasks.clone())
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("no rate families".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods".into()));
        }
        let batch = self.batch()?;
        if batch.is_empty() {
            return Err(Error::Config("empty task list".into()));
        }
        for f in &self.families {
            RateModel::new(f.model.clone()).map_err(|e| match &f.label {
                Some(l) => e.context(format!("family {l}")),
                None => e,
            })?;
        }
        if self.methods.contains(&Method::Mc) && self.replications < 2 {
            return Err(Error::Config(format!("mc needs at least 2 replications, got {}", self.replications)));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        self.permutation_list(&batch)?;
        Ok(())
    }

    /// Requested orders, de-duplicated, in request order.
    pub fn permutation_list(&self, batch: &TaskBatch) -> Result<Vec<Permutation>> {
        let mut out: Vec<Permutation> = Vec::new();
        for sel in &self.permutations {
            for p in parse_permutation_selector(sel, batch)? {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no permutations requested".into()));
        }
        Ok(out)
    }
}

/// `spt`, `lpt`, `all` (at most [`MAX_ALL_TASKS`] tasks) or an explicit
/// 1-based order.
pub fn parse_permutation_selector(sel: &str, batch: &TaskBatch) -> Result<Vec<Permutation>> {
    match sel.trim().to_ascii_lowercase().as_str() {
        "spt" => Ok(vec![spt(batch)]),
        "lpt" => Ok(vec![lpt(batch)]),
        "all" => {
            if batch.len() > MAX_ALL_TASKS {
                return Err(Error::Config(format!(
                    "'all' permutations needs at most {MAX_ALL_TASKS} tasks, got {}",
                    batch.len()
                )));
            }
            Ok(Permutation::all(batch.len()))
        }
        other => {
            let p = Permutation::parse_one_based(other)?;
            if p.len() != batch.len() {
                return Err(Error::Config(format!("order {other} has {} entries for {} tasks", p.len(), batch.len())));
            }
            Ok(vec![p])
        }
    }
}

fn camel_case(name: &str) -> String {
    name.split(['_', '-'])
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
                None => String::new(),
            }
        })
        .collect()
}

/// Kind names accepted in descriptors.
pub const KIND_NAMES: [&str; 14] = [
    "Constant",
    "LinearIncreasing",
    "ConcaveIncreasing",
    "StepIncreasing",
    "LinearDecreasing",
    "ConvexDecreasing",
    "StepDecreasing",
    "Sinusoidal",
    "Bathtub",
    "ZeroThenConstant",
    "TwoPhaseConstant",
    "PiecewiseConstant",
    "Exponential",
    "Ramp",
];

/// Parses a model argument: a JSON descriptor, `zero`, `constant:0.4`,
/// `convex_decreasing:0.4`, or `kind:key=value,...` with the kind in snake
/// or camel case (`step_decreasing:lambda=0.4,t0=3`).
pub fn parse_model(arg: &str) -> Result<RateKind> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return serde_json::from_str(arg).map_err(|e| Error::InvalidModel(e.to_string()));
    }
    let (name, rest) = match arg.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (arg, ""),
    };
    let kind = camel_case(name);
    if kind == "Zero" {
        if !rest.is_empty() {
            return Err(Error::InvalidModel("'zero' takes no parameters".into()));
        }
        return Ok(RateKind::Constant { lambda: 0.0 });
    }
    let mut params = serde_json::Map::new();
    if !rest.is_empty() {
        for item in rest.split(',') {
            let (key, value) = match item.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim()),
                None if kind == "Constant" || kind == "ConvexDecreasing" => ("lambda".to_string(), item.trim()),
                None => {
                    return Err(Error::InvalidModel(format!(
                        "{arg}: expected key=value in {item:?} (kinds: {})",
                        KIND_NAMES.join(", ")
                    )))
                }
            };
            let v: f64 = value
                .parse()
                .map_err(|_| Error::InvalidModel(format!("not a number: {value:?}")))?;
            params.insert(key, serde_json::json!(v));
        }
    }
    let json = serde_json::json!({ "kind": kind, "params": params });
    serde_json::from_value(json).map_err(|e| Error::InvalidModel(format!("{arg}: {e}")))
}

/// Parses `2,4,6,8`.
pub fn parse_tasks(arg: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a task length: {s:?}")))
        })
        .collect()
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub family: String,
    /// 1-based order, e.g. `(1,2,3)`.
    pub permutation: String,
    /// `mc`, `exact`, `single_failure`, or `single_failure_diff` (the
    /// difference `R(spt) − R(order)`).
    pub evaluator: String,
    pub mean: f64,
    /// Zero for deterministic evaluators.
    pub std_error: f64,
    /// Zero for deterministic evaluators.
    pub replications: u64,
    pub runtime_seconds: f64,
}

/// Per family and evaluator: every order's value with the extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub family: String,
    pub evaluator: String,
    pub entries: Vec<ReportEntry>,
    pub best_permutation: String,
    pub best_mean: f64,
    pub worst_permutation: String,
    pub worst_mean: f64,
    /// `100·(worst − best)/best`.
    pub mis_sequencing_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub permutation: String,
    pub mean: f64,
    pub std_error: f64,
}

impl ReportRow {
    fn from_rows(family: &str, evaluator: &str, rows: &[EstimateRow]) -> Option<ReportRow> {
        let mine: Vec<&EstimateRow> = rows.iter().filter(|r| r.family == family && r.evaluator == evaluator).collect();
        let first = *mine.first()?;
        let (mut best, mut worst) = (first, first);
        for &r in &mine {
            if r.mean < best.mean {
                best = r;
            }
            if r.mean > worst.mean {
                worst = r;
            }
        }
        Some(ReportRow {
            family: family.to_string(),
            evaluator: evaluator.to_string(),
            entries: mine
                .iter()
                .map(|r| ReportEntry {
                    permutation: r.permutation.clone(),
                    mean: r.mean,
                    std_error: r.std_error,
                })
                .collect(),
            best_permutation: best.permutation.clone(),
            best_mean: best.mean,
            worst_permutation: worst.permutation.clone(),
            worst_mean: worst.mean,
            mis_sequencing_pct: mis_sequencing(best.mean, worst.mean),
        })
    }
}

pub fn mis_sequencing(best: f64, worst: f64) -> f64 {
    100.0 * (worst - best) / best
}

/// Threshold reports of one family; `None` entries do not apply to the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyThresholds {
    pub family: String,
    pub theorem1: Option<ThresholdReport>,
    /// Two-task small-`a` cutoffs (only for two tasks).
    pub prop2: Option<ThresholdReport>,
    /// Slope-at-zero condition (only when `epsilon` is configured).
    pub theorem2: Option<ThresholdReport>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub seed: u64,
    pub tasks: Vec<f64>,
    pub rows: Vec<EstimateRow>,
    pub summaries: Vec<ReportRow>,
    pub thresholds: Vec<FamilyThresholds>,
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, if timing { start.elapsed().as_secs_f64() } else { 0.0 }))
}

fn family_rows(
    config: &ExperimentConfig,
    label: &str,
    model: &RateModel,
    batch: &TaskBatch,
    perms: &[Permutation],
) -> Result<Vec<EstimateRow>> {
    let mut rows = Vec::new();
    let row = |p: &Permutation, evaluator: &str, mean, se, reps, secs| EstimateRow {
        family: label.to_string(),
        permutation: p.to_string(),
        evaluator: evaluator.to_string(),
        mean,
        std_error: se,
        replications: reps,
        runtime_seconds: secs,
    };
    let ctx = |p: &Permutation, m: Method| format!("family {label}, permutation {p}, {}", m.name());
    for &method in &config.methods {
        match method {
            Method::Mc => {
                let opts = SimOptions {
                    method: config.sampling,
                    ..SimOptions::default()
                };
                for p in perms {
                    let (e, secs) = timed(config.timing, || {
                        estimate_makespan(model, batch, p, config.replications, config.seed, &opts)
                    })
                    .map_err(|e| e.context(ctx(p, method)))?;
                    rows.push(row(p, "mc", e.mean, e.std_error, e.replications, secs));
                }
            }
            Method::Exact => {
                let opts = RefineOptions {
                    closure: config
                        .closure
                        .unwrap_or_else(|| Closure::auto_or_default_clamp(model, batch)),
                    ..RefineOptions::default()
                };
                for p in perms {
                    let (r, secs) = timed(config.timing, || refine_until(model, batch, p, config.tolerance, &opts))
                        .map_err(|e| e.context(ctx(p, method)))?;
                    rows.push(row(p, "exact", r.value, 0.0, 0, secs));
                }
            }
            Method::SingleFailure => {
                let reference = spt(batch);
                let ref_batch = TaskBatch::new(batch.ordered(&reference)?)?;
                // Position of each task within the shortest-first order.
                let mut slot = vec![0; batch.len()];
                for (k, &i) in reference.order().iter().enumerate() {
                    slot[i] = k;
                }
                let mut diffs = Vec::new();
                for p in perms {
                    let (r, secs) = timed(config.timing, || expected_makespan_single_failure(model, batch, p))
                        .map_err(|e| e.context(ctx(p, method)))?;
                    rows.push(row(p, "single_failure", r.expected_makespan, 0.0, 0, secs));
                    let relative = Permutation::new(p.order().iter().map(|&i| slot[i]).collect())?;
                    let d = pairwise_difference(model, &ref_batch, &relative).map_err(|e| e.context(ctx(p, method)))?;
                    diffs.push(row(p, "single_failure_diff", d, 0.0, 0, 0.0));
                }
                rows.extend(diffs);
            }
            Method::Thresholds => {}
        }
    }
    Ok(rows)
}

fn family_thresholds(config: &ExperimentConfig, label: &str, model: &RateModel, batch: &TaskBatch) -> FamilyThresholds {
    let mut out = FamilyThresholds {
        family: label.to_string(),
        theorem1: None,
        prop2: None,
        theorem2: None,
        errors: Vec::new(),
    };
    match theorem1_threshold(model, batch) {
        Ok(r) => out.theorem1 = Some(r),
        Err(e) => out.errors.push(format!("theorem1: {e}")),
    }
    if batch.len() == 2 {
        let (a, b) = (batch.min_length(), batch.max_length());
        if a < b {
            match prop2_cutoffs(model, a, b) {
                Ok((r, _)) => out.prop2 = Some(r),
                Err(e) => out.errors.push(format!("prop2: {e}")),
            }
        }
    }
    if let Some(eps) = config.epsilon {
        match ShortTaskSpec::new(eps, batch.lengths().to_vec()).and_then(|s| theorem2_threshold(model, &s)) {
            Ok(r) => out.theorem2 = Some(r),
            Err(e) => out.errors.push(format!("theorem2: {e}")),
        }
    }
    out
}

fn evaluator_order(rows: &[EstimateRow]) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for r in rows {
        if r.evaluator != "single_failure_diff" && !seen.contains(&r.evaluator) {
            seen.push(r.evaluator.clone());
        }
    }
    seen
}

/// Evaluates the whole experiment. Families run in parallel; the report
/// keeps config order, so it does not depend on the thread count.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let batch = config.batch()?;
    let perms = config.permutation_list(&batch)?;
    let work = || -> Result<Vec<(Vec<EstimateRow>, Option<FamilyThresholds>)>> {
        config
            .families
            .par_iter()
            .map(|f| {
                let label = f.label()?;
                let model = RateModel::new(f.model.clone()).map_err(|e| e.context(format!("family {label}")))?;
                let rows = family_rows(config, &label, &model, &batch, &perms)?;
                let th = config
                    .methods
                    .contains(&Method::Thresholds)
                    .then(|| family_thresholds(config, &label, &model, &batch));
                Ok((rows, th))
            })
            .collect()
    };
    let parts = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    let mut summaries = Vec::new();
    for (r, t) in parts {
        if let Some(first) = r.first() {
            let family = first.family.clone();
            for ev in evaluator_order(&r) {
                summaries.extend(ReportRow::from_rows(&family, &ev, &r));
            }
        }
        rows.extend(r);
        thresholds.extend(t);
    }
    Ok(Report {
        name: config.name.clone(),
        seed: config.seed,
        tasks: config.tasks.clone(),
        rows,
        summaries,
        thresholds,
    })
}

impl Report {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&csv_path, self.csv_string()?)?;
        std::fs::write(&json_path, self.json_string()? + "\n")?;
        Ok((csv_path, json_path))
    }

    /// Threshold reports as CSV: one line per family and check.
    pub fn thresholds_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            family: &'a str,
            check: &'a str,
            certified_order: String,
            threshold: Option<f64>,
            tested: Option<f64>,
            rule: String,
            notes: String,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.thresholds {
            for (check, rep) in [("theorem1", &t.theorem1), ("prop2", &t.prop2), ("theorem2", &t.theorem2)] {
                if let Some(r) = rep {
                    w.serialize(Line {
                        family: &t.family,
                        check,
                        certified_order: variant_name(&r.certified_order),
                        threshold: r.threshold_value,
                        tested: r.tested_value,
                        rule: variant_name(&r.rule),
                        notes: r.hypothesis_failures.join("; "),
                    })
                    .map_err(|e| Error::Io(e.to_string()))?;
                }
            }
            for e in &t.errors {
                w.serialize(Line {
                    family: &t.family,
                    check: "error",
                    certified_order: "none".into(),
                    threshold: None,
                    tested: None,
                    rule: String::new(),
                    notes: e.clone(),
                })
                .map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        let buf = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }
}

/// The serde name of a unit enum variant.
fn variant_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// Outcome of one built-in oracle check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfCheck {
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    SelfCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Closed-form oracles against the solvers and the simulator; seconds.
pub fn selftest(seed: u64) -> Vec<SelfCheck> {
    use crate::exact::{constant_rate_batch, special_two_task, two_phase_delta};
    let b4 = TaskBatch::new(vec![2.0, 4.0, 6.0, 8.0]).expect("valid batch");
    vec![
        check("constant-rate exact solver", || {
            let m = RateModel::constant(0.4)?;
            let want = constant_rate_batch(0.4, &b4)?;
            let got = refine_until(&m, &b4, &spt(&b4), 1e-7, &RefineOptions::default())?.value;
            let rel = (got - want).abs() / want;
            Ok((rel < 1e-4, format!("solver {got:.6}, closed form {want:.6}, relative error {rel:.2e}")))
        }),
        check("constant-rate simulation", || {
            let m = RateModel::constant(0.4)?;
            let want = constant_rate_batch(0.4, &b4)?;
            let e = estimate_makespan(&m, &b4, &lpt(&b4), 20_000, seed, &SimOptions::default())?;
            let z = (e.mean - want).abs() / e.std_error;
            Ok((z < 3.0, format!("mean {:.4} ± {:.4}, closed form {want:.4}, |z| {z:.2}", e.mean, e.std_error)))
        }),
        check("zero-then-constant two tasks", || {
            let m = RateModel::new(RateKind::ZeroThenConstant { b: 2.0, lambda: 1.0 })?;
            let b = TaskBatch::new(vec![1.0, 2.0])?;
            let (ab, ba) = special_two_task(1.0, 2.0, 1.0)?;
            let opts = RefineOptions::default();
            let x = refine_until(&m, &b, &Permutation::identity(2), 1e-7, &opts)?.value;
            let y = refine_until(&m, &b, &Permutation::reversal(2), 1e-7, &opts)?.value;
            let ok = (x - ab).abs() < 1e-4 && (y - ba).abs() < 1e-4 && y < x;
            Ok((ok, format!("a first {x:.6} (closed form {ab:.6}), b first {y:.6} (closed form {ba:.6})")))
        }),
        check("two-phase difference", || {
            let d = two_phase_delta(1.0, 2.0, 0.5, 1.0)?;
            let want = (0.5f64.exp() - 1f64.exp()) / 0.5 - (1f64.exp() - 2f64.exp());
            Ok(((d - want).abs() < 1e-12, format!("{d:.9}")))
        }),
        check("zero-rate simulation", || {
            let e = estimate_makespan(&RateModel::zero(), &b4, &spt(&b4), 10, seed, &SimOptions::default())?;
            Ok((e.mean == 20.0 && e.std_error == 0.0, format!("mean {}, SE {}", e.mean, e.std_error)))
        }),
        check("single-failure difference", || {
            let m = RateModel::constant(1.0)?;
            let b = TaskBatch::new(vec![1.0, 2.0])?;
            let d = pairwise_difference(&m, &b, &Permutation::reversal(2))?;
            let e = |x: f64| (-x).exp();
            let want = -e(1.0) + 2.0 * e(2.0) - e(3.0);
            Ok(((d - want).abs() < 1e-12, format!("R(spt) − R(lpt) = {d:.6}")))
        }),
    ]
}
