//! Probabilistic lower bounds on the number of minimal models by random XOR
//! partitioning, and independent-support extraction by Padoa's method.
//!
//! `|X| - 1` random parity constraints over a support `X` are drawn once.
//! A galloping-then-bisection search finds the largest prefix length `m⋆`
//! for which some minimal model satisfies the first `m⋆` constraints; the
//! bound `2^(m⋆ - α)` with `α = 1 - log2(δ)` holds with probability at
//! least `1 - δ`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{Clause, CnfFormula, Lit, Var, VarSet};
use crate::minmodel::{MinModelOracle, Outcome};
use crate::result::LowerBoundResult;
use crate::sat::{SatStatus, Solver};

/// Default chunk width of the XOR CNF encoding.
pub const XOR_CHUNK: usize = 4;

/// Floor of the per-query time slice.
pub const QUERY_FLOOR: Duration = Duration::from_secs(10);

/// `x1 ⊕ … ⊕ xk ⊕ b`: with `b = 1` it holds iff an even number of the
/// variables is true, with `b = 0` iff an odd number is.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XorConstraint {
    pub vars: Vec<Var>,
    pub constant: bool,
}

impl XorConstraint {
    /// Required parity of the number of true variables.
    pub fn odd(&self) -> bool {
        !self.constant
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        let ones = self.vars.iter().filter(|v| values[v.slot()]).count();
        (ones % 2 == 1) == self.odd()
    }
}

/// Ordered random constraints `Q1 .. Qk`, reproducible from the seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorPool {
    pub constraints: Vec<XorConstraint>,
    pub seed: u64,
}

impl XorPool {
    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Whether `values` satisfies the first `m` constraints.
    pub fn satisfies_prefix(&self, values: &[bool], m: usize) -> bool {
        self.constraints[..m].iter().all(|q| q.is_satisfied(values))
    }
}

/// Draws `|X| - 1` constraints; each variable of `X` and the constant are
/// fair coin flips.
pub fn sample_xors(x: &VarSet, seed: u64) -> XorPool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = x.len().saturating_sub(1);
    let constraints = (0..count)
        .map(|_| {
            let vars = x.iter().filter(|_| rng.gen_bool(0.5)).collect();
            XorConstraint { vars, constant: rng.gen_bool(0.5) }
        })
        .collect();
    XorPool { constraints, seed }
}

/// CNF clauses of an XOR constraint plus the number of auxiliary variables
/// they introduce (numbered from the `aux_base` passed to
/// [`encode_xor_cnf`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorEncoding {
    pub clauses: Vec<Clause>,
    pub num_aux: u32,
}

/// Forbids every assignment of `vars` whose parity differs from `odd`.
fn direct_parity(vars: &[Var], odd: bool, out: &mut Vec<Clause>) {
    let k = vars.len();
    for bits in 0u32..(1 << k) {
        if (bits.count_ones() % 2 == 1) != odd {
            let lits = vars.iter().enumerate().map(|(i, v)| v.lit(bits >> i & 1 == 0));
            out.push(Clause::new(lits).expect("distinct variables"));
        }
    }
}

/// Chunked parity encoding with chunk width `width` (at least 3).
///
/// Long constraints are split: the first `width - 1` variables are tied to
/// a fresh auxiliary variable holding their parity, which then replaces them.
/// Each chunk costs `2^(width-1)` clauses.
pub fn encode_xor_cnf_width(q: &XorConstraint, aux_base: u32, width: usize) -> XorEncoding {
    let width = width.max(3);
    let mut clauses = Vec::new();
    let mut vars = q.vars.clone();
    vars.sort();
    vars.dedup();
    if vars.is_empty() {
        if q.odd() {
            clauses.push(Clause::falsum());
        }
        return XorEncoding { clauses, num_aux: 0 };
    }
    let mut next_aux = aux_base;
    while vars.len() > width {
        let rest = vars.split_off(width - 1);
        let aux = Var::new(next_aux);
        next_aux += 1;
        vars.push(aux);
        direct_parity(&vars, false, &mut clauses);
        vars = std::iter::once(aux).chain(rest).collect();
    }
    direct_parity(&vars, q.odd(), &mut clauses);
    XorEncoding { clauses, num_aux: next_aux - aux_base }
}

pub fn encode_xor_cnf(q: &XorConstraint, aux_base: u32) -> XorEncoding {
    encode_xor_cnf_width(q, aux_base, XOR_CHUNK)
}

/// Answer to "does some minimal model satisfy the first m constraints?".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

/// Incremental minimal-model search under prefixes of one XOR pool.
///
/// Every constraint is encoded once behind a selector variable; a query for
/// prefix `m` assumes the first `m` selectors.
pub struct XorSearch {
    oracle: MinModelOracle,
    selectors: Vec<Var>,
}

impl XorSearch {
    pub fn new(f: &CnfFormula, pool: &XorPool) -> XorSearch {
        let mut oracle = MinModelOracle::new(f);
        let mut selectors = Vec::with_capacity(pool.len());
        for q in &pool.constraints {
            let sel = oracle.new_aux_var();
            let enc = encode_xor_cnf(q, sel.index() + 1);
            for _ in 0..enc.num_aux {
                oracle.new_aux_var();
            }
            for c in &enc.clauses {
                let mut lits: Vec<Lit> = c.lits().to_vec();
                lits.push(sel.neg());
                oracle.add_side_clause(&lits);
            }
            selectors.push(sel);
        }
        XorSearch { oracle, selectors }
    }

    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }

    /// Whether a minimal model of the formula satisfies `Q1 ∧ … ∧ Qm`.
    pub fn query(&mut self, m: usize, budget: &Budget) -> Verdict {
        assert!(m <= self.selectors.len(), "prefix {m} beyond {} constraints", self.selectors.len());
        let assumptions: Vec<Lit> = self.selectors[..m].iter().map(|s| s.pos()).collect();
        match self.oracle.next(&assumptions, budget) {
            Outcome::Found(_) => Verdict::Yes,
            Outcome::Exhausted => Verdict::No,
            Outcome::Indeterminate => Verdict::Indeterminate,
        }
    }
}

/// One-shot form of [`XorSearch::query`].
pub fn has_min_model_under_xors(f: &CnfFormula, pool: &XorPool, m: usize, budget: &Budget) -> Verdict {
    XorSearch::new(f, pool).query(m, budget)
}

/// `α = 1 - log2(δ)`.
pub fn precision_slack(delta: f64) -> f64 {
    -delta.log2() + 1.0
}

#[derive(Clone, Debug)]
pub struct HashCountConfig {
    /// Failure probability δ of the bound.
    pub delta: f64,
    pub seed: u64,
    pub budget: Budget,
}

impl Default for HashCountConfig {
    fn default() -> Self {
        HashCountConfig { delta: 0.2, seed: 0, budget: Budget::unlimited() }
    }
}

#[derive(Clone, Debug)]
pub struct HashCountReport {
    pub result: LowerBoundResult,
    pub m_star: usize,
    /// Largest prefix length with a confirmed minimal model, if any.
    pub m_hat: Option<usize>,
    pub timed_out: bool,
    /// Queries in the order they were issued.
    pub trace: Vec<(usize, Verdict)>,
    pub pool: XorPool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Unknown,
    Has,
    HasNot,
}

/// Lower bound `2^(m⋆ - α)` on `|MM(F)|` with XORs over `x`.
///
/// The caller guarantees `F` has at least one minimal model.
pub fn hashcount_lower_bound(f: &CnfFormula, x: &VarSet, cfg: &HashCountConfig) -> Result<HashCountReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    if let Some(v) = x.iter().find(|v| v.index() > f.num_vars()) {
        return Err(Error::VarOutOfRange { var: v.index(), num_vars: f.num_vars() });
    }
    let start = Instant::now();
    let alpha = precision_slack(cfg.delta);
    let n = x.len();
    let pool = sample_xors(x, cfg.seed);
    let mut trace = Vec::new();
    let mut m_hat: Option<usize> = None;
    let mut timed_out = false;

    let m_star = if n <= 1 {
        0
    } else {
        let mut search = XorSearch::new(f, &pool);
        let mut has = vec![Cell::Unknown; n + 1];
        has[0] = Cell::Has;
        has[n] = Cell::HasNot;
        let (mut lo, mut hi, mut m) = (0usize, n, 1usize);
        loop {
            if cfg.budget.expired() {
                timed_out = true;
                break m_hat.unwrap_or(0);
            }
            let verdict = search.query(m, &cfg.budget.slice(4, QUERY_FLOOR));
            trace.push((m, verdict));
            match verdict {
                Verdict::Indeterminate => {
                    timed_out = true;
                    break m_hat.unwrap_or(0);
                }
                Verdict::Yes => {
                    m_hat = Some(m_hat.map_or(m, |h| h.max(m)));
                    if has[m + 1] == Cell::HasNot {
                        break m;
                    }
                    has[1..=m].fill(Cell::Has);
                    lo = m;
                    m = if 2 * m < n { 2 * m } else { (hi + m) / 2 };
                }
                Verdict::No => {
                    if has[m - 1] == Cell::Has {
                        break m - 1;
                    }
                    has[m..n].fill(Cell::HasNot);
                    hi = m;
                    m = (lo + m) / 2;
                }
            }
        }
    };
    let result = LowerBoundResult::probabilistic(m_star as f64 - alpha, 1.0 - cfg.delta, start.elapsed().as_secs_f64());
    Ok(HashCountReport { result, m_star, m_hat, timed_out, trace, pool })
}

/// Padoa definability checks against one formula.
///
/// The solver holds `F(V) ∧ F(V')` over a primed copy, plus for every
/// variable a selector `e_v` enforcing `v ↔ v'` when assumed.
pub struct PadoaChecker {
    solver: Solver,
    num_vars: u32,
}

impl PadoaChecker {
    pub fn new(f: &CnfFormula) -> PadoaChecker {
        let n = f.num_vars();
        let mut solver = Solver::new(3 * n);
        let shift = |l: Lit| Var::new(l.var().index() + n).lit(l.is_positive());
        if f.is_falsum() {
            solver.add_clause(&[]);
        }
        for c in f.clauses() {
            solver.add_clause(c.lits());
            let primed: Vec<Lit> = c.lits().iter().map(|&l| shift(l)).collect();
            solver.add_clause(&primed);
        }
        for i in 1..=n {
            let (v, p, e) = (Var::new(i), Var::new(i + n), Var::new(i + 2 * n));
            solver.add_clause(&[e.neg(), v.neg(), p.pos()]);
            solver.add_clause(&[e.neg(), v.pos(), p.neg()]);
        }
        PadoaChecker { solver, num_vars: n }
    }

    /// `Some(true)` iff `v` is a function of `s` in every model.
    pub fn definable(&mut self, v: Var, s: &VarSet, budget: &Budget) -> Option<bool> {
        let n = self.num_vars;
        let mut assumptions: Vec<Lit> = s.iter().filter(|&u| u != v).map(|u| Var::new(u.index() + 2 * n).pos()).collect();
        assumptions.push(v.pos());
        assumptions.push(Var::new(v.index() + n).neg());
        match self.solver.solve(&assumptions, budget) {
            SatStatus::Unsat => Some(true),
            SatStatus::Sat => Some(false),
            SatStatus::BudgetExceeded => None,
        }
    }
}

/// Padoa's test: `F(V) ∧ F(V') ∧ ⋀_{s∈S} (s ↔ s') ∧ v ∧ ¬v'` is unsatisfiable.
/// `None` when the budget ran out.
pub fn padoa_definable(f: &CnfFormula, v: Var, s: &VarSet, budget: &Budget) -> Result<Option<bool>> {
    if s.contains(v) {
        return Err(Error::InvalidArgument(format!("{v} must not belong to the defining set")));
    }
    if v.index() > f.num_vars() {
        return Err(Error::VarOutOfRange { var: v.index(), num_vars: f.num_vars() });
    }
    Ok(PadoaChecker::new(f).definable(v, s, budget))
}

/// Greedy independent support: starting from every declared variable, drop
/// a variable when it is definable from the others still kept. Variables are
/// tried by descending occurrence count. On budget exhaustion the current
/// (still valid) set is returned.
pub fn independent_support(f: &CnfFormula, budget: &Budget) -> VarSet {
    let mut support = VarSet::range(f.num_vars());
    if f.is_falsum() {
        return support;
    }
    let occ = f.occurrences();
    let mut order: Vec<Var> = support.to_vec();
    order.sort_by_key(|v| (std::cmp::Reverse(occ[v.slot()]), *v));
    let mut checker = PadoaChecker::new(f);
    for v in order {
        if occ[v.slot()] == 0 {
            continue;
        }
        if budget.expired() {
            break;
        }
        support.remove(v);
        if checker.definable(v, &support, budget) != Some(true) {
            support.insert(v);
        }
    }
    support
}
