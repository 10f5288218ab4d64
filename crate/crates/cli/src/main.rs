//! `minlb`: count minimal models of CNF formulas from the command line.
//!
//! Every subcommand prints one JSON object on stdout (except `dlp-export`,
//! which prints the program text). Exit codes: 0 success, 1 usage or guard
//! error, 2 input parse error, 3 budget exhausted without a result.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use minlb_core::bench::{collect_instances, run_suite, BenchConfig, TqpConfig};
use minlb_core::decompose::compute_cut;
use minlb_core::dlp::dlp_export;
use minlb_core::hashcount::{hashcount_lower_bound, independent_support, HashCountConfig};
use minlb_core::mingen::{cover, decode_generator, encode_mingen, parse_transactions};
use minlb_core::minlb::{minlb, MinLbConfig};
use minlb_core::minmodel::{brute_force_mm, enumerate_minimal_models};
use minlb_core::projenum::{proj_enum_trace, ProjEnumConfig};
use minlb_core::{parse_dimacs, Budget, CnfFormula, Error, LowerBoundResult, Method, Var, VarSet};

#[derive(Parser, Debug)]
#[command(name = "minlb", version, about = "Lower bounds on the number of minimal models of a CNF formula")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Wall-clock budget in seconds.
    #[arg(long, global = true, env = "MINLB_TIMEOUT_S", default_value_t = 5000.0)]
    timeout_s: f64,
    #[arg(long, global = true, env = "MINLB_SEED", default_value_t = 0)]
    seed: u64,
    /// Failure probability of hashing-based bounds.
    #[arg(long, global = true, env = "MINLB_DELTA", default_value_t = 0.2)]
    delta: f64,
    /// Largest cut counted exactly by `minlb`.
    #[arg(long, global = true, env = "MINLB_CUT_LIMIT", default_value_t = 50)]
    cut_limit: usize,
    /// Most projections per enumeration.
    #[arg(long, global = true, env = "MINLB_CAP", default_value_t = 1_000_000)]
    cap: u64,
    #[arg(long, global = true, env = "MINLB_LOG_BASE", default_value_t = 10.0)]
    log_base: f64,
    /// Hash over all variables instead of an independent support.
    #[arg(long, global = true, env = "MINLB_XOR_OVER_ALL_VARS")]
    xor_over_all_vars: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hybrid bound: exact for small cuts, hashing otherwise.
    Minlb { file: PathBuf },
    /// Exact count by cut conditioning.
    Projenum {
        file: PathBuf,
        /// Comma-separated cut variables; defaults to the computed cut.
        #[arg(long, value_delimiter = ',')]
        cut: Option<Vec<u32>>,
    },
    /// Probabilistic lower bound by XOR hashing.
    Hashcount { file: PathBuf },
    /// Exhaustive count for small formulas.
    Bruteforce {
        file: PathBuf,
        /// Also list the models' true variables.
        #[arg(long)]
        list: bool,
    },
    /// Count minimal generators of a transaction database.
    MingenCount {
        file: PathBuf,
        /// List generators with their covers.
        #[arg(long)]
        enumerate: bool,
    },
    /// Independent support by Padoa's method.
    IndepSupport { file: PathBuf },
    /// Print the formula as a disjunctive logic program.
    DlpExport { file: PathBuf },
    /// Run several methods over a directory of .cnf files.
    Bench {
        dir: PathBuf,
        #[arg(long, env = "MINLB_METHODS", value_delimiter = ',', default_value = "projenum,hashcount,minlb")]
        methods: Vec<Method>,
        /// JSONL report path; a CSV with the same stem is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "MINLB_WORKERS", default_value_t = 1)]
        workers: usize,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Parse(_) => "parse",
            Failure::Budget(_) => "budget",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Failure::Parse(p.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_cnf(path: &Path) -> Result<CnfFormula, Failure> {
    parse_dimacs(&read(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn var_list(vs: &VarSet) -> Value {
    json!(vs.iter().map(|v| v.index()).collect::<Vec<_>>())
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn budget(g: &Global) -> Budget {
    Budget::from_secs_f64(g.timeout_s)
}

fn check_delta(g: &Global) -> Result<(), Failure> {
    if g.delta > 0.0 && g.delta < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--delta must lie in (0, 1), got {}", g.delta)))
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Minlb { file } => {
            check_delta(g)?;
            let f = load_cnf(&file)?;
            let cfg = MinLbConfig {
                delta: g.delta,
                cut_limit: g.cut_limit,
                cap: g.cap,
                seed: g.seed,
                budget: budget(g),
                xor_over_all_vars: g.xor_over_all_vars,
            };
            let rep = minlb(&f, &cfg)?;
            let result = rep.result.ok_or_else(|| Failure::Budget("budget exhausted before any bound was found".into()))?;
            Ok(Output::Json(merge(
                result.to_json(),
                json!({
                    "branch": rep.branch.name(),
                    "cut_size": rep.cut_size,
                    "support_size": rep.support_size,
                    "m_star": rep.m_star,
                    "delta": g.delta,
                    "seed": g.seed,
                }),
            )))
        }
        Command::Projenum { file, cut } => {
            let f = load_cnf(&file)?;
            let cut: VarSet = match cut {
                Some(vs) => {
                    if vs.contains(&0) {
                        return Err(Failure::Usage("cut variables are 1-based".into()));
                    }
                    vs.into_iter().map(Var::new).collect()
                }
                None => compute_cut(&f),
            };
            let rep = proj_enum_trace(&f, &cut, &ProjEnumConfig { cap: g.cap, budget: budget(g) })?;
            if !rep.result.exact && rep.result.count.as_ref().is_none_or(|c| c.bits() == 0) {
                return Err(Failure::Budget("budget exhausted before any minimal model was counted".into()));
            }
            Ok(Output::Json(merge(rep.result.to_json(), json!({ "cut": var_list(&cut), "passes": rep.passes.len() }))))
        }
        Command::Hashcount { file } => {
            check_delta(g)?;
            let f = load_cnf(&file)?;
            let b = budget(g);
            let x = if g.xor_over_all_vars { VarSet::range(f.num_vars()) } else { independent_support(&f, &b.slice(2, std::time::Duration::ZERO)) };
            let rep = hashcount_lower_bound(&f, &x, &HashCountConfig { delta: g.delta, seed: g.seed, budget: b })?;
            if rep.timed_out && rep.m_hat.is_none() {
                return Err(Failure::Budget("budget exhausted before any XOR query was answered".into()));
            }
            Ok(Output::Json(merge(
                rep.result.to_json(),
                json!({
                    "m_star": rep.m_star,
                    "support_size": x.len(),
                    "queries": rep.trace.len(),
                    "timed_out": rep.timed_out,
                    "delta": g.delta,
                    "seed": g.seed,
                }),
            )))
        }
        Command::Bruteforce { file, list } => {
            let f = load_cnf(&file)?;
            let mms = brute_force_mm(&f)?;
            let mut out = LowerBoundResult::counted(mms.len().into(), true, Method::BruteForce, 0.0).to_json();
            if list {
                out["models"] = json!(mms.iter().map(|m| m.true_vars().iter().map(|v| v.index()).collect::<Vec<_>>()).collect::<Vec<_>>());
            }
            Ok(Output::Json(out))
        }
        Command::MingenCount { file, enumerate } => {
            let db = parse_transactions(&read(&file)?).map_err(|e| Failure::Parse(format!("{}: {e}", file.display())))?;
            let enc = encode_mingen(&db);
            let sizes = json!({
                "items": db.items.len(),
                "transactions": db.len(),
                "variables": enc.formula.num_vars(),
                "clauses": enc.formula.num_clauses(),
                "literals": enc.num_literals(),
            });
            if enumerate {
                let (mms, complete) = enumerate_minimal_models(&enc.formula, g.cap, &budget(g));
                if !complete && mms.is_empty() {
                    return Err(Failure::Budget("budget exhausted before any generator was found".into()));
                }
                let mut gens: Vec<(Vec<u32>, Vec<usize>)> = mms
                    .iter()
                    .map(|m| {
                        let (items, cov) = decode_generator(m, &enc);
                        debug_assert_eq!(cov, cover(&items, &db));
                        (items.into_iter().collect(), cov.into_iter().collect())
                    })
                    .collect();
                gens.sort();
                let list: Vec<Value> = gens.iter().map(|(i, c)| json!({ "itemset": i, "cover": c })).collect();
                return Ok(Output::Json(merge(
                    json!({ "count": gens.len().to_string(), "exact": complete, "generators": list }),
                    sizes,
                )));
            }
            let cfg = MinLbConfig {
                delta: g.delta,
                cut_limit: g.cut_limit,
                cap: g.cap,
                seed: g.seed,
                budget: budget(g),
                xor_over_all_vars: g.xor_over_all_vars,
            };
            check_delta(g)?;
            let rep = minlb(&enc.formula, &cfg)?;
            let result = rep.result.ok_or_else(|| Failure::Budget("budget exhausted before any bound was found".into()))?;
            Ok(Output::Json(merge(result.to_json(), sizes)))
        }
        Command::IndepSupport { file } => {
            let f = load_cnf(&file)?;
            let b = budget(g);
            let support = independent_support(&f, &b);
            Ok(Output::Json(json!({
                "support": var_list(&support),
                "size": support.len(),
                "num_vars": f.num_vars(),
                "complete": !b.expired(),
            })))
        }
        Command::DlpExport { file } => Ok(Output::Text(dlp_export(&load_cnf(&file)?))),
        Command::Bench { dir, methods, out, workers } => {
            check_delta(g)?;
            if !(g.timeout_s > 0.0) {
                return Err(Failure::Usage("--timeout-s must be positive".into()));
            }
            if !(g.log_base > 1.0) {
                return Err(Failure::Usage("--log-base must exceed 1".into()));
            }
            let instances = collect_instances(&dir)?;
            let cfg = BenchConfig {
                methods,
                tqp: TqpConfig { timeout: g.timeout_s, log_base: g.log_base },
                delta: g.delta,
                seed: g.seed,
                cut_limit: g.cut_limit,
                cap: g.cap,
                workers,
            };
            let report = run_suite(&instances, &cfg);
            let mut summary = report.summary();
            if let Some(out) = out {
                let write = |p: &Path, text: String| {
                    std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
                };
                write(&out, report.to_jsonl())?;
                let csv_path = out.with_extension("csv");
                write(&csv_path, report.to_csv()?)?;
                summary["jsonl"] = json!(out.display().to_string());
                summary["csv"] = json!(csv_path.display().to_string());
            }
            Ok(Output::Json(summary))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Output::Json(v)) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            print!("{t}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("minlb: {}", f.message());
            println!("{}", json!({ "error": f.kind(), "message": f.message() }));
            ExitCode::from(f.code())
        }
    }
}
