//! Minimal-model counting by cut conditioning and projected enumeration.
//!
//! Minimal models are visited one cut projection `τ` at a time. For each
//! `τ`, the formula is conditioned on its false part `τ*` only (false
//! bindings are always justified), split into primal components, and the
//! models agreeing with `τ` are counted as the product of their projected
//! counts on each component.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::budget::Budget;
use crate::decompose::components;
use crate::error::{Error, Result};
use crate::formula::{justified_restriction, Assignment, CnfFormula, VarSet};
use crate::minmodel::{proj_enum_visit, MinModelOracle, Outcome, DEFAULT_CAP};
use crate::result::{LowerBoundResult, Method};

#[derive(Clone, Copy, Debug)]
pub struct ProjEnumConfig {
    /// Most projections counted per component enumeration.
    pub cap: u64,
    pub budget: Budget,
}

impl Default for ProjEnumConfig {
    fn default() -> Self {
        ProjEnumConfig { cap: DEFAULT_CAP, budget: Budget::unlimited() }
    }
}

/// One iteration of the outer loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pass {
    /// Cut projection of the minimal model found.
    pub tau: Assignment,
    /// Projection sets enumerated, one per component of `F|τ*`.
    pub projection_sets: Vec<VarSet>,
    /// Projected count for each projection set.
    pub factors: Vec<u64>,
    /// Product of the factors.
    pub product: BigUint,
}

#[derive(Clone, Debug)]
pub struct ProjEnumReport {
    pub result: LowerBoundResult,
    pub passes: Vec<Pass>,
}

/// Counts minimal models of `f` using `cut`. See [`proj_enum_trace`].
pub fn proj_enum_count(f: &CnfFormula, cut: &VarSet, cfg: &ProjEnumConfig) -> Result<LowerBoundResult> {
    proj_enum_trace(f, cut, cfg).map(|r| r.result)
}

/// Counts minimal models of `f` and records every pass.
///
/// The result is exact unless some enumeration hit the cap or the budget ran
/// out, in which case the accumulated count is still a lower bound.
pub fn proj_enum_trace(f: &CnfFormula, cut: &VarSet, cfg: &ProjEnumConfig) -> Result<ProjEnumReport> {
    let start = Instant::now();
    if let Some(v) = cut.iter().find(|v| v.index() > f.num_vars()) {
        return Err(Error::VarOutOfRange { var: v.index(), num_vars: f.num_vars() });
    }
    if f.is_falsum() {
        return Ok(ProjEnumReport { result: LowerBoundResult::zero(Method::ProjEnum, 0.0), passes: Vec::new() });
    }

    let all_vars = f.vars();
    let mut oracle = MinModelOracle::new(f);
    let mut count = BigUint::zero();
    let mut exact = true;
    let mut passes = Vec::new();

    loop {
        let sigma = match oracle.next(&[], &cfg.budget) {
            Outcome::Found(s) => s,
            Outcome::Exhausted => break,
            Outcome::Indeterminate => {
                exact = false;
                break;
            }
        };
        let tau = sigma.project(cut);
        let conditioned = f.condition(&justified_restriction(&tau));
        let comps = components(&conditioned);
        let projection_sets = if comps.len() == 1 { vec![all_vars.clone()] } else { comps };

        let mut product = BigUint::one();
        let mut factors = Vec::with_capacity(projection_sets.len());
        for x in &projection_sets {
            let (n, truncated) = proj_enum_visit(f, &tau, x, cfg.cap, &cfg.budget, |_| {});
            exact &= !truncated;
            factors.push(n);
            product *= n;
        }
        count += &product;
        oracle.block(&tau);
        passes.push(Pass { tau, projection_sets, factors, product });
    }

    let result = LowerBoundResult::counted(count, exact, Method::ProjEnum, start.elapsed().as_secs_f64());
    Ok(ProjEnumReport { result, passes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::compute_cut;
    use crate::formula::Var;
    use crate::minmodel::brute_force_mm;

    fn cnf(n: u32, cls: &[&[i32]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    fn example1() -> CnfFormula {
        cnf(5, &[&[1, 2, 3], &[-1, -2, 4], &[-1, -2, 5]])
    }

    fn set(vs: &[u32]) -> VarSet {
        vs.iter().map(|&v| Var::new(v)).collect()
    }

    #[test]
    fn example1_counts_three() {
        let r = proj_enum_count(&example1(), &set(&[1, 2, 3]), &ProjEnumConfig::default()).unwrap();
        assert_eq!(r.count, Some(BigUint::from(3u32)));
        assert!(r.exact);
        assert_eq!(r.confidence, 1.0);
        let r = proj_enum_count(&example1(), &compute_cut(&example1()), &ProjEnumConfig::default()).unwrap();
        assert_eq!(r.count, Some(BigUint::from(3u32)));
    }

    #[test]
    fn disjoint_components_multiply() {
        let f = cnf(4, &[&[1, 2], &[3, 4]]);
        let rep = proj_enum_trace(&f, &VarSet::new(), &ProjEnumConfig::default()).unwrap();
        assert_eq!(rep.passes.len(), 1);
        assert_eq!(rep.passes[0].factors, vec![2, 2]);
        assert_eq!(rep.result.count, Some(BigUint::from(4u32)));
        assert!(rep.result.exact);
    }

    #[test]
    fn falsum_counts_zero() {
        let r = proj_enum_count(&CnfFormula::falsum(3), &VarSet::new(), &ProjEnumConfig::default()).unwrap();
        assert_eq!(r.count, Some(BigUint::zero()));
        assert!(r.exact);
    }

    #[test]
    fn every_cut_gives_the_oracle_count() {
        let f = cnf(6, &[&[1, 2, 3], &[-1, 4], &[-2, 5, 6], &[3, -6], &[4, 5]]);
        let oracle = brute_force_mm(&f).unwrap().len() as u32;
        for mask in 0u32..64 {
            let cut: VarSet = (0..6).filter(|b| mask >> b & 1 == 1).map(|b| Var::new(b + 1)).collect();
            let r = proj_enum_count(&f, &cut, &ProjEnumConfig::default()).unwrap();
            assert_eq!(r.count, Some(BigUint::from(oracle)), "cut {cut:?}");
        }
    }

    #[test]
    fn cap_gives_a_lower_bound() {
        let f = cnf(6, &[&[1, 2], &[3, 4], &[5, 6]]);
        let cfg = ProjEnumConfig { cap: 1, ..ProjEnumConfig::default() };
        let r = proj_enum_count(&f, &VarSet::new(), &cfg).unwrap();
        assert!(!r.exact);
        assert_eq!(r.count, Some(BigUint::from(1u32)));
        let r = proj_enum_count(&f, &set(&[1]), &ProjEnumConfig { cap: 2, ..cfg }).unwrap();
        assert!(r.count.unwrap() <= BigUint::from(8u32));
    }

    #[test]
    fn out_of_range_cut_is_rejected() {
        assert!(proj_enum_count(&example1(), &set(&[9]), &ProjEnumConfig::default()).is_err());
    }
}
