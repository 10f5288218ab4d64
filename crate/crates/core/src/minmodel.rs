//! Minimal-model oracles built on the SAT engine.
//!
//! A model is minimal when no model of the formula has a strictly smaller
//! true-set. Candidates are found by iterative SAT minimisation: solve, then
//! keep asking for a model whose true-set is a strict subset until none
//! exists. Whenever the search runs under extra constraints (blocking
//! clauses, XOR constraints, positive assumptions) the minimised candidate
//! is re-checked against the bare formula and, if it is not minimal there,
//! its total model is blocked and the search continues.

use std::collections::BTreeSet;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{Assignment, CnfFormula, Lit, Var, VarSet};
use crate::sat::{SatStatus, Solver};

/// Largest number of occurring variables [`brute_force_mm`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 22;

/// Default cap on the number of projections one enumeration returns.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// A minimal model, total over `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinimalModel {
    values: Vec<bool>,
}

impl MinimalModel {
    /// Wraps `values` without checking minimality.
    pub fn new_unchecked(values: Vec<bool>) -> MinimalModel {
        MinimalModel { values }
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn value(&self, v: Var) -> bool {
        self.values[v.slot()]
    }

    pub fn true_vars(&self) -> Vec<Var> {
        self.values.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Var::from_slot(i)).collect()
    }

    pub fn to_assignment(&self) -> Assignment {
        Assignment::from_total(&self.values)
    }

    pub fn project(&self, vars: &VarSet) -> Assignment {
        vars.iter().map(|v| (v, self.values[v.slot()])).collect()
    }

    /// `self ≤ other` pointwise.
    pub fn le(&self, other: &MinimalModel) -> bool {
        self.values.iter().zip(&other.values).all(|(&a, &b)| !a || b)
    }
}

/// Result of a search that can run out of budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<T> {
    Found(T),
    /// The search space is exhausted: no (further) answer exists.
    Exhausted,
    /// The budget ran out before a verdict.
    Indeterminate,
}

impl<T> Outcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Outcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Outcome::Indeterminate)
    }
}

/// Every true variable of `values` has a witness clause: one that would be
/// falsified if the variable were flipped to false.
pub fn is_justified(f: &CnfFormula, values: &[bool]) -> bool {
    let mut justified = vec![false; values.len()];
    for c in f.clauses() {
        let mut true_lits = c.lits().iter().filter(|l| l.eval(values[l.var().slot()]));
        if let (Some(only), None) = (true_lits.next(), true_lits.next()) {
            if only.is_positive() {
                justified[only.var().slot()] = true;
            }
        }
    }
    values.iter().zip(&justified).all(|(&v, &j)| !v || j)
}

/// Cut projections already counted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BlockingSet {
    cut: VarSet,
    blocked: BTreeSet<Assignment>,
}

impl BlockingSet {
    pub fn new(cut: VarSet) -> BlockingSet {
        BlockingSet { cut, blocked: BTreeSet::new() }
    }

    pub fn cut(&self) -> &VarSet {
        &self.cut
    }

    /// Adds `tau`, which must bind exactly the cut.
    pub fn add(&mut self, tau: Assignment) -> Result<bool> {
        if tau.vars() != self.cut {
            return Err(Error::InvalidArgument(format!("blocking term {tau} does not bind exactly the cut")));
        }
        Ok(self.blocked.insert(tau))
    }

    pub fn contains(&self, tau: &Assignment) -> bool {
        self.blocked.contains(tau)
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Assignment> {
        self.blocked.iter()
    }
}

struct BudgetExceeded;

/// Incremental minimal-model search over one formula.
///
/// Holds two solvers: `search` carries the formula plus any side
/// constraints; `checker` carries the bare formula and decides minimality.
pub struct MinModelOracle {
    formula: CnfFormula,
    search: Solver,
    checker: Solver,
    num_vars: u32,
    constrained: bool,
}

impl MinModelOracle {
    pub fn new(formula: &CnfFormula) -> MinModelOracle {
        MinModelOracle {
            formula: formula.clone(),
            search: Solver::from_formula(formula),
            checker: Solver::from_formula(formula),
            num_vars: formula.num_vars(),
            constrained: false,
        }
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    /// Allocates a variable in the search solver only, for side constraints.
    pub fn new_aux_var(&mut self) -> Var {
        self.search.new_var()
    }

    /// Adds a side constraint to the search solver. Minimal models of the
    /// formula satisfying it are kept; it never creates new ones.
    pub fn add_side_clause(&mut self, lits: &[Lit]) {
        self.constrained = true;
        self.search.add_clause(lits);
    }

    /// Excludes every model agreeing with `tau`.
    pub fn block(&mut self, tau: &Assignment) {
        self.add_side_clause(&tau.blocking_clause());
    }

    fn original(&self, lits: &[Lit]) -> bool {
        lits.iter().all(|l| l.var().index() <= self.num_vars)
    }

    /// Minimality of a model of the formula, decided on the bare formula.
    /// Returns a strictly smaller model when there is one.
    fn check_minimal(&mut self, values: &[bool], budget: &Budget) -> std::result::Result<Option<Vec<bool>>, BudgetExceeded> {
        let trues: Vec<Var> = values.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Var::from_slot(i)).collect();
        if trues.is_empty() {
            return Ok(None);
        }
        let act = self.checker.new_var();
        let mut clause: Vec<Lit> = trues.iter().map(|v| v.neg()).collect();
        clause.push(act.neg());
        self.checker.add_clause(&clause);
        let mut assumptions: Vec<Lit> =
            values.iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| Var::from_slot(i).neg()).collect();
        assumptions.push(act.pos());
        let status = self.checker.solve(&assumptions, budget);
        self.checker.add_clause(&[act.neg()]);
        match status {
            SatStatus::Unsat => Ok(None),
            SatStatus::Sat => Ok(Some(self.checker.model()[..self.num_vars as usize].to_vec())),
            SatStatus::BudgetExceeded => Err(BudgetExceeded),
        }
    }

    /// Shrinks `mu` to a model of the search constraints under `assumptions`
    /// with no strictly smaller such model; variables in `forced` stay true.
    fn shrink(
        &mut self,
        mu: Vec<bool>,
        assumptions: &[Lit],
        forced: &BTreeSet<Var>,
        budget: &Budget,
    ) -> std::result::Result<Vec<bool>, BudgetExceeded> {
        shrink_in(&mut self.search, self.num_vars, mu, assumptions, forced, budget)
    }

    /// Excludes every strict superset of the minimal model `mu`.
    fn block_supersets(&mut self, mu: &[bool]) {
        let trues: Vec<Lit> = mu.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Var::from_slot(i).neg()).collect();
        for (i, _) in mu.iter().enumerate().filter(|(_, &b)| !b) {
            let mut clause = trues.clone();
            clause.push(Var::from_slot(i).neg());
            self.add_side_clause(&clause);
        }
    }

    /// Finds a minimal model of the formula that satisfies the side
    /// constraints and `assumptions`.
    ///
    /// Positive assumptions on formula variables are kept true during
    /// minimisation. The candidate is checked against the bare formula
    /// unless that is provably unnecessary; non-minimal candidates are
    /// blocked permanently.
    pub fn next(&mut self, assumptions: &[Lit], budget: &Budget) -> Outcome<MinimalModel> {
        let forced: BTreeSet<Var> = assumptions
            .iter()
            .filter(|l| l.is_positive() && l.var().index() <= self.num_vars)
            .map(|l| l.var())
            .collect();
        loop {
            match self.search.solve(assumptions, budget) {
                SatStatus::Unsat => return Outcome::Exhausted,
                SatStatus::BudgetExceeded => return Outcome::Indeterminate,
                SatStatus::Sat => {}
            }
            let mu = self.search.model()[..self.num_vars as usize].to_vec();
            let sigma = match self.shrink(mu, assumptions, &forced, budget) {
                Ok(s) => s,
                Err(BudgetExceeded) => return Outcome::Indeterminate,
            };
            // Negative assumptions on formula variables cannot hide a smaller
            // model, anything else can.
            let needs_check = self.constrained || !forced.is_empty() || !self.original(assumptions);
            if !needs_check {
                return Outcome::Found(MinimalModel { values: sigma });
            }
            let smaller = match self.check_minimal(&sigma, budget) {
                Ok(None) => return Outcome::Found(MinimalModel { values: sigma }),
                Ok(Some(smaller)) => smaller,
                Err(BudgetExceeded) => return Outcome::Indeterminate,
            };
            // A minimal model of the formula below the candidate: its strict
            // supersets are never minimal, and it may itself qualify.
            let mu = match shrink_in(&mut self.checker, self.num_vars, smaller, &[], &BTreeSet::new(), budget) {
                Ok(m) => m,
                Err(BudgetExceeded) => return Outcome::Indeterminate,
            };
            self.block_supersets(&mu);
            let mut probe = assumptions.to_vec();
            probe.extend(mu.iter().enumerate().map(|(i, &b)| Var::from_slot(i).lit(b)));
            match self.search.solve(&probe, budget) {
                SatStatus::Sat => return Outcome::Found(MinimalModel { values: mu }),
                SatStatus::Unsat => {}
                SatStatus::BudgetExceeded => return Outcome::Indeterminate,
            }
        }
    }
}

/// Repeatedly asks `solver` for a model strictly below `mu`.
fn shrink_in(
    solver: &mut Solver,
    num_vars: u32,
    mut mu: Vec<bool>,
    assumptions: &[Lit],
    forced: &BTreeSet<Var>,
    budget: &Budget,
) -> std::result::Result<Vec<bool>, BudgetExceeded> {
    loop {
        let free_trues: Vec<Var> = mu
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Var::from_slot(i))
            .filter(|v| !forced.contains(v))
            .collect();
        if free_trues.is_empty() {
            return Ok(mu);
        }
        let act = solver.new_var();
        let mut clause: Vec<Lit> = free_trues.iter().map(|v| v.neg()).collect();
        clause.push(act.neg());
        solver.add_clause(&clause);
        let mut step: Vec<Lit> = assumptions.to_vec();
        step.extend(mu.iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| Var::from_slot(i).neg()));
        step.push(act.pos());
        let status = solver.solve(&step, budget);
        solver.add_clause(&[act.neg()]);
        match status {
            SatStatus::Sat => mu = solver.model()[..num_vars as usize].to_vec(),
            SatStatus::Unsat => return Ok(mu),
            SatStatus::BudgetExceeded => return Err(BudgetExceeded),
        }
    }
}

fn check_total(f: &CnfFormula, tau: &Assignment) -> Result<Vec<bool>> {
    if let Some((v, _)) = tau.iter().find(|(v, _)| v.index() > f.num_vars()) {
        return Err(Error::VarOutOfRange { var: v.index(), num_vars: f.num_vars() });
    }
    let values = tau.to_total(f.num_vars());
    if !f.eval(&values) {
        return Err(Error::InvalidArgument(format!("{tau} is not a model of the formula")));
    }
    Ok(values)
}

/// Whether the model `tau` of `f` is minimal. Unbound variables read as false.
pub fn is_minimal(f: &CnfFormula, tau: &Assignment) -> Result<bool> {
    let values = check_total(f, tau)?;
    let mut oracle = MinModelOracle::new(f);
    Ok(matches!(oracle.check_minimal(&values, &Budget::unlimited()), Ok(None)))
}

/// Shrinks the model `mu` to a model of `f ∧ forced` with no strictly
/// smaller model of `f ∧ forced`. The result is pointwise below `mu`.
pub fn minimize(f: &CnfFormula, mu: &Assignment, forced: &Assignment) -> Result<Assignment> {
    let values = check_total(f, mu)?;
    if !forced.iter().all(|(v, b)| v.index() <= f.num_vars() && values[v.slot()] == b) {
        return Err(Error::InvalidArgument(format!("{mu} does not satisfy {forced}")));
    }
    let mut oracle = MinModelOracle::new(f);
    let assumptions: Vec<Lit> = forced.lits().collect();
    let kept: BTreeSet<Var> = forced.true_vars().collect();
    let sigma = oracle
        .shrink(values, &assumptions, &kept, &Budget::unlimited())
        .unwrap_or_else(|_| unreachable!("unlimited budget"));
    Ok(Assignment::from_total(&sigma))
}

/// Some minimal model of `f`, or `Exhausted` when `f` is unsatisfiable.
pub fn find_minimal_model(f: &CnfFormula, budget: &Budget) -> Outcome<MinimalModel> {
    MinModelOracle::new(f).next(&[], budget)
}

/// A minimal model of `f` whose projection onto the cut is not blocked.
pub fn blocked_min_model(f: &CnfFormula, blocked: &BlockingSet, budget: &Budget) -> Outcome<MinimalModel> {
    let mut oracle = MinModelOracle::new(f);
    for tau in blocked.iter() {
        oracle.block(tau);
    }
    oracle.next(&[], budget)
}

/// Projections returned by [`proj_enum`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Projections {
    pub projections: Vec<Assignment>,
    pub truncated: bool,
}

/// Visits `{σ↓X | σ ∈ MM(F), σ ⊨ τ}` until `cap` projections have been seen.
/// Returns `(count, truncated)`.
pub fn proj_enum_visit(
    f: &CnfFormula,
    tau: &Assignment,
    x: &VarSet,
    cap: u64,
    budget: &Budget,
    mut visit: impl FnMut(Assignment),
) -> (u64, bool) {
    let cap = cap.max(1);
    let mut oracle = MinModelOracle::new(f);
    let assumptions: Vec<Lit> = tau.lits().filter(|l| l.var().index() <= f.num_vars()).collect();
    let mut count = 0u64;
    loop {
        match oracle.next(&assumptions, budget) {
            Outcome::Exhausted => return (count, false),
            Outcome::Indeterminate => return (count, true),
            Outcome::Found(sigma) => {
                let proj = sigma.project(x);
                oracle.block(&proj);
                visit(proj);
                count += 1;
                if count >= cap {
                    let more = oracle.next(&assumptions, budget);
                    return (count, !matches!(more, Outcome::Exhausted));
                }
            }
        }
    }
}

/// Projected minimal-model enumeration under a conditioning assignment.
pub fn proj_enum(f: &CnfFormula, tau: &Assignment, x: &VarSet, cap: u64, budget: &Budget) -> Projections {
    let mut projections = Vec::new();
    let (_, truncated) = proj_enum_visit(f, tau, x, cap, budget, |p| projections.push(p));
    Projections { projections, truncated }
}

/// Exact `MM(F)` by exhaustive enumeration over the occurring variables.
/// Declared variables that occur in no clause are false in every result.
pub fn brute_force_mm(f: &CnfFormula) -> Result<Vec<MinimalModel>> {
    if f.is_falsum() {
        return Ok(Vec::new());
    }
    let vars = f.vars().to_vec();
    let k = vars.len();
    if k > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { what: "formula variables", actual: k, limit: BRUTE_FORCE_LIMIT });
    }
    let mut pos_of = vec![usize::MAX; f.num_vars() as usize];
    for (i, v) in vars.iter().enumerate() {
        pos_of[v.slot()] = i;
    }
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.lits().iter().fold((0u32, 0u32), |(p, n), l| {
                let bit = 1u32 << pos_of[l.var().slot()];
                if l.is_positive() {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect();

    let size = 1usize << k;
    let full = (size - 1) as u32;
    let is_model: Vec<bool> = (0..size as u32)
        .map(|m| masks.iter().all(|&(p, n)| (m & p) != 0 || (!m & full & n) != 0))
        .collect();
    // below[m]: some model is a subset of m.
    let mut below = is_model.clone();
    for bit in 0..k {
        for m in 0..size {
            if m >> bit & 1 == 1 && below[m ^ (1 << bit)] {
                below[m] = true;
            }
        }
    }
    let mut out = Vec::new();
    for m in 0..size {
        if !is_model[m] {
            continue;
        }
        let minimal = (0..k).filter(|&b| m >> b & 1 == 1).all(|b| !below[m ^ (1 << b)]);
        if minimal {
            let mut values = vec![false; f.num_vars() as usize];
            for (i, v) in vars.iter().enumerate() {
                values[v.slot()] = m >> i & 1 == 1;
            }
            out.push(MinimalModel { values });
        }
    }
    out.sort();
    Ok(out)
}

/// Up to `cap` minimal models in discovery order; the flag is true when the
/// list is complete.
pub fn enumerate_minimal_models(f: &CnfFormula, cap: u64, budget: &Budget) -> (Vec<MinimalModel>, bool) {
    let mut out = Vec::new();
    if f.is_falsum() {
        return (out, true);
    }
    let mut oracle = MinModelOracle::new(f);
    loop {
        match oracle.next(&[], budget) {
            Outcome::Found(m) => {
                if out.len() as u64 >= cap {
                    return (out, false);
                }
                oracle.block(&m.to_assignment());
                out.push(m);
            }
            Outcome::Exhausted => return (out, true),
            Outcome::Indeterminate => return (out, false),
        }
    }
}
