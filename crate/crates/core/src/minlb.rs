//! Hybrid lower bound: exact counting when the formula decomposes well,
//! XOR hashing otherwise.

use std::time::{Duration, Instant};

use crate::budget::Budget;
use crate::decompose::compute_cut;
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, VarSet};
use crate::hashcount::{hashcount_lower_bound, independent_support, HashCountConfig};
use crate::minmodel::DEFAULT_CAP;
use crate::projenum::{proj_enum_count, ProjEnumConfig};
use crate::result::{LowerBoundResult, Method};
use crate::sat::{SatStatus, Solver};

pub const DEFAULT_CUT_LIMIT: usize = 50;
pub const DEFAULT_DELTA: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct MinLbConfig {
    pub delta: f64,
    /// Largest cut handled by exact counting.
    pub cut_limit: usize,
    pub cap: u64,
    pub seed: u64,
    pub budget: Budget,
    /// Hash over every declared variable instead of an independent support.
    pub xor_over_all_vars: bool,
}

impl Default for MinLbConfig {
    fn default() -> Self {
        MinLbConfig {
            delta: DEFAULT_DELTA,
            cut_limit: DEFAULT_CUT_LIMIT,
            cap: DEFAULT_CAP,
            seed: 0,
            budget: Budget::unlimited(),
            xor_over_all_vars: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinLbReport {
    /// `None` when the budget ran out before anything could be reported.
    pub result: Option<LowerBoundResult>,
    /// Branch taken; `MinLB` when the formula has no minimal model.
    pub branch: Method,
    pub cut_size: Option<usize>,
    /// Size of the hashing support on the HashCount branch.
    pub support_size: Option<usize>,
    pub m_star: Option<usize>,
}

impl MinLbReport {
    fn empty(branch: Method) -> MinLbReport {
        MinLbReport { result: None, branch, cut_size: None, support_size: None, m_star: None }
    }
}

/// Lower bound on `|MM(f)|`: 0 when unsatisfiable, exact when the cut has at
/// most `cut_limit` variables, and `2^(m⋆ - α)` with confidence `1 - δ`
/// otherwise.
pub fn minlb(f: &CnfFormula, cfg: &MinLbConfig) -> Result<MinLbReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    let start = Instant::now();
    if f.is_falsum() {
        let mut rep = MinLbReport::empty(Method::MinLB);
        rep.result = Some(LowerBoundResult::zero(Method::MinLB, start.elapsed().as_secs_f64()));
        return Ok(rep);
    }
    match Solver::from_formula(f).solve(&[], &cfg.budget) {
        SatStatus::Unsat => {
            let mut rep = MinLbReport::empty(Method::MinLB);
            rep.result = Some(LowerBoundResult::zero(Method::MinLB, start.elapsed().as_secs_f64()));
            return Ok(rep);
        }
        SatStatus::BudgetExceeded => return Ok(MinLbReport::empty(Method::MinLB)),
        SatStatus::Sat => {}
    }

    let cut = compute_cut(f);
    if cut.len() <= cfg.cut_limit {
        let pe = ProjEnumConfig { cap: cfg.cap, budget: cfg.budget };
        let mut result = proj_enum_count(f, &cut, &pe)?;
        result.elapsed = start.elapsed().as_secs_f64();
        return Ok(MinLbReport {
            result: Some(result),
            branch: Method::ProjEnum,
            cut_size: Some(cut.len()),
            support_size: None,
            m_star: None,
        });
    }

    let x = if cfg.xor_over_all_vars {
        VarSet::range(f.num_vars())
    } else {
        // Any prefix of the greedy elimination is a valid support, so the
        // search may stop early.
        independent_support(f, &cfg.budget.slice(2, Duration::ZERO))
    };
    let hc = HashCountConfig { delta: cfg.delta, seed: cfg.seed, budget: cfg.budget };
    let rep = hashcount_lower_bound(f, &x, &hc)?;
    let mut result = rep.result;
    result.elapsed = start.elapsed().as_secs_f64();
    Ok(MinLbReport {
        result: Some(result),
        branch: Method::HashCount,
        cut_size: Some(cut.len()),
        support_size: Some(x.len()),
        m_star: Some(rep.m_star),
    })
}
