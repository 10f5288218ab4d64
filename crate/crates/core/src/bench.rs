//! Evaluation metrics and a batch harness.
//!
//! TQP (time quality penalty) folds runtime and bound quality into one
//! score: `2T` without a bound, else `t + T·(1 + log(c_min + 1)) / (1 + log(C + 1))`
//! where `c_min` is the smallest bound any method returned on the instance.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::decompose::compute_cut;
use crate::error::{Error, Result};
use crate::formula::{parse_dimacs, CnfFormula};
use crate::hashcount::{hashcount_lower_bound, independent_support, HashCountConfig};
use crate::minlb::{minlb, MinLbConfig, DEFAULT_CUT_LIMIT, DEFAULT_DELTA};
use crate::minmodel::{brute_force_mm, BRUTE_FORCE_LIMIT, DEFAULT_CAP};
use crate::projenum::{proj_enum_count, ProjEnumConfig};
use crate::result::{LowerBoundResult, Method};

pub const DEFAULT_TIMEOUT_S: f64 = 5000.0;
pub const DEFAULT_LOG_BASE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    /// Finished with its full guarantee.
    Ok,
    /// Stopped early with a weaker but valid bound.
    Partial,
    Timeout,
    /// Method not applicable (brute force beyond its variable limit).
    Skipped,
    Error,
}

impl RunStatus {
    pub fn has_bound(self) -> bool {
        matches!(self, RunStatus::Ok | RunStatus::Partial)
    }
}

/// One method run on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub method: Method,
    pub status: RunStatus,
    pub time_s: f64,
    /// `null` when no bound was returned or the bound is 0.
    pub bound_log2: Option<f64>,
    /// Exact integer count when one is known.
    pub count: Option<String>,
    pub exact: bool,
    pub seed: u64,
    pub delta: f64,
}

impl RunRecord {
    fn without_bound(instance: &str, method: Method, status: RunStatus, time_s: f64, cfg: &BenchConfig) -> RunRecord {
        RunRecord {
            instance: instance.to_string(),
            method,
            status,
            time_s,
            bound_log2: None,
            count: None,
            exact: false,
            seed: cfg.seed,
            delta: cfg.delta,
        }
    }

    fn from_result(instance: &str, r: &LowerBoundResult, status: RunStatus, time_s: f64, cfg: &BenchConfig) -> RunRecord {
        RunRecord {
            instance: instance.to_string(),
            method: r.method,
            status,
            time_s,
            bound_log2: r.bound_log2.is_finite().then_some(r.bound_log2),
            count: r.count.as_ref().map(|c| c.to_string()),
            exact: r.exact,
            seed: cfg.seed,
            delta: cfg.delta,
        }
    }

    /// The bound `C` as a count, if one was returned.
    pub fn bound(&self) -> Option<f64> {
        if !self.status.has_bound() {
            return None;
        }
        if let Some(c) = &self.count {
            return Some(c.parse::<f64>().unwrap_or(f64::INFINITY));
        }
        Some(self.bound_log2.map_or(0.0, f64::exp2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TqpConfig {
    /// Timeout `T` in seconds.
    pub timeout: f64,
    pub log_base: f64,
}

impl Default for TqpConfig {
    fn default() -> Self {
        TqpConfig { timeout: DEFAULT_TIMEOUT_S, log_base: DEFAULT_LOG_BASE }
    }
}

impl TqpConfig {
    fn quality(&self, c: f64) -> f64 {
        1.0 + (c + 1.0).log(self.log_base)
    }
}

pub fn tqp_score(rec: &RunRecord, c_min: f64, cfg: &TqpConfig) -> f64 {
    tqp_value(rec.time_s, rec.bound(), c_min, cfg)
}

/// TQP from raw inputs; `c` is `None` when no bound was returned.
pub fn tqp_value(t: f64, c: Option<f64>, c_min: f64, cfg: &TqpConfig) -> f64 {
    match c {
        None => 2.0 * cfg.timeout,
        Some(c) => t + cfg.timeout * cfg.quality(c_min) / cfg.quality(c),
    }
}

/// `r_AB = (1 + log(C_A + 1)) / (1 + log(C_B + 1))`.
pub fn relative_quality(c_a: f64, c_b: f64, cfg: &TqpConfig) -> f64 {
    cfg.quality(c_a) / cfg.quality(c_b)
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub tqp: TqpConfig,
    pub delta: f64,
    pub seed: u64,
    pub cut_limit: usize,
    pub cap: u64,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec![Method::ProjEnum, Method::HashCount, Method::MinLB],
            tqp: TqpConfig::default(),
            delta: DEFAULT_DELTA,
            seed: 0,
            cut_limit: DEFAULT_CUT_LIMIT,
            cap: DEFAULT_CAP,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeSeries {
    pub a: Method,
    pub b: Method,
    /// `(instance, r_AB)` for instances where both returned a bound.
    pub values: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub tqp_totals: Vec<(Method, f64)>,
    pub relative: Vec<RelativeSeries>,
    pub log_base: f64,
    pub timeout: f64,
}

impl BenchReport {
    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
    }

    pub fn summary(&self) -> Value {
        let totals: serde_json::Map<String, Value> =
            self.tqp_totals.iter().map(|(m, t)| (m.name().to_string(), json!(t))).collect();
        json!({
            "instances": self.records.iter().map(|r| r.instance.as_str()).collect::<std::collections::BTreeSet<_>>().len(),
            "records": self.records.len(),
            "timeout_s": self.timeout,
            "log_base": self.log_base,
            "tqp_totals": totals,
            "relative_quality": self.relative,
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }
}

fn status_of(r: &LowerBoundResult, full_guarantee: bool) -> RunStatus {
    if full_guarantee {
        RunStatus::Ok
    } else if r.count.as_ref().is_some_and(|c| *c > num_bigint::BigUint::from(0u32)) || r.bound_log2.is_finite() {
        RunStatus::Partial
    } else {
        RunStatus::Timeout
    }
}

fn run_method(name: &str, f: &CnfFormula, method: Method, cfg: &BenchConfig) -> RunRecord {
    let start = Instant::now();
    let budget = Budget::from_secs_f64(cfg.tqp.timeout);
    let elapsed = || start.elapsed().as_secs_f64();
    match method {
        Method::ProjEnum => {
            let pe = ProjEnumConfig { cap: cfg.cap, budget };
            match proj_enum_count(f, &compute_cut(f), &pe) {
                Ok(r) => {
                    let status = status_of(&r, r.exact);
                    RunRecord::from_result(name, &r, status, elapsed(), cfg)
                }
                Err(_) => RunRecord::without_bound(name, method, RunStatus::Error, elapsed(), cfg),
            }
        }
        Method::HashCount => {
            let x = independent_support(f, &budget.slice(2, Duration::ZERO));
            let hc = HashCountConfig { delta: cfg.delta, seed: cfg.seed, budget };
            match hashcount_lower_bound(f, &x, &hc) {
                Ok(rep) if rep.timed_out && rep.m_hat.is_none() => {
                    RunRecord::without_bound(name, method, RunStatus::Timeout, elapsed(), cfg)
                }
                Ok(rep) => {
                    let status = if rep.timed_out { RunStatus::Partial } else { RunStatus::Ok };
                    RunRecord::from_result(name, &rep.result, status, elapsed(), cfg)
                }
                Err(_) => RunRecord::without_bound(name, method, RunStatus::Error, elapsed(), cfg),
            }
        }
        Method::MinLB => {
            let mc = MinLbConfig {
                delta: cfg.delta,
                cut_limit: cfg.cut_limit,
                cap: cfg.cap,
                seed: cfg.seed,
                budget,
                xor_over_all_vars: false,
            };
            match minlb(f, &mc) {
                Ok(rep) => match rep.result {
                    Some(r) => {
                        let full = r.exact || (r.method == Method::HashCount && !budget.expired());
                        let status = status_of(&r, full);
                        let mut rec = RunRecord::from_result(name, &r, status, elapsed(), cfg);
                        rec.method = Method::MinLB;
                        rec
                    }
                    None => RunRecord::without_bound(name, method, RunStatus::Timeout, elapsed(), cfg),
                },
                Err(_) => RunRecord::without_bound(name, method, RunStatus::Error, elapsed(), cfg),
            }
        }
        Method::BruteForce => {
            if f.vars().len() > BRUTE_FORCE_LIMIT {
                return RunRecord::without_bound(name, method, RunStatus::Skipped, elapsed(), cfg);
            }
            match brute_force_mm(f) {
                Ok(mms) => {
                    let r = LowerBoundResult::counted(mms.len().into(), true, Method::BruteForce, elapsed());
                    RunRecord::from_result(name, &r, RunStatus::Ok, elapsed(), cfg)
                }
                Err(_) => RunRecord::without_bound(name, method, RunStatus::Error, elapsed(), cfg),
            }
        }
    }
}

/// Runs every method on one formula.
pub fn run_instance(name: &str, f: &CnfFormula, cfg: &BenchConfig) -> Vec<RunRecord> {
    cfg.methods.iter().map(|&m| run_method(name, f, m, cfg)).collect()
}

fn instance_records(path: &Path, cfg: &BenchConfig) -> Vec<RunRecord> {
    let name = path.display().to_string();
    let parsed = std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_dimacs(&t).map_err(|e| e.to_string()));
    match parsed {
        Ok(f) => run_instance(&name, &f, cfg),
        Err(_) => cfg.methods.iter().map(|&m| RunRecord::without_bound(&name, m, RunStatus::Error, 0.0, cfg)).collect(),
    }
}

/// Aggregates records into TQP totals and pairwise relative-quality series.
pub fn summarize(mut records: Vec<RunRecord>, cfg: &BenchConfig) -> BenchReport {
    let order = |m: Method| cfg.methods.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    records.sort_by(|a, b| a.instance.cmp(&b.instance).then(order(a.method).cmp(&order(b.method))));

    let mut instances: Vec<&str> = records.iter().map(|r| r.instance.as_str()).collect();
    instances.dedup();
    let mut totals: Vec<(Method, f64)> = cfg.methods.iter().map(|&m| (m, 0.0)).collect();
    let mut relative: Vec<RelativeSeries> = Vec::new();
    for (i, &a) in cfg.methods.iter().enumerate() {
        for &b in &cfg.methods[i + 1..] {
            relative.push(RelativeSeries { a, b, values: Vec::new() });
        }
    }
    for inst in instances {
        let recs: Vec<&RunRecord> = records.iter().filter(|r| r.instance == inst).collect();
        let c_min = recs.iter().filter_map(|r| r.bound()).fold(f64::INFINITY, f64::min);
        for (m, total) in totals.iter_mut() {
            if let Some(r) = recs.iter().find(|r| r.method == *m) {
                *total += tqp_score(r, c_min, &cfg.tqp);
            }
        }
        for series in relative.iter_mut() {
            let find = |m: Method| recs.iter().find(|r| r.method == m).and_then(|r| r.bound());
            if let (Some(ca), Some(cb)) = (find(series.a), find(series.b)) {
                series.values.push((inst.to_string(), relative_quality(ca, cb, &cfg.tqp)));
            }
        }
    }
    BenchReport { records, tqp_totals: totals, relative, log_base: cfg.tqp.log_base, timeout: cfg.tqp.timeout }
}

/// Runs the configured methods on every instance file. Unreadable or
/// malformed files become `error` rows.
pub fn run_suite(instances: &[PathBuf], cfg: &BenchConfig) -> BenchReport {
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::new());
    let workers = cfg.workers.clamp(1, instances.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = instances.get(i) else { break };
                let recs = instance_records(path, cfg);
                out.lock().expect("no poisoned lock").extend(recs);
            });
        }
    });
    summarize(out.into_inner().expect("no poisoned lock"), cfg)
}

/// `.cnf` files directly inside `dir`, sorted by name.
pub fn collect_instances(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
    let mut out: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "cnf"))
        .collect();
    out.sort();
    Ok(out)
}
