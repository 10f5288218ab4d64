//! Conflict-driven clause-learning SAT solver with incremental clause
//! addition and per-query assumptions.
//!
//! Two watched literals, VSIDS branching with phase saving (initial phase
//! false), first-UIP learning with local minimisation, Luby restarts and
//! activity-based learnt clause deletion. The wall-clock budget is polled at
//! restart boundaries and every few hundred conflicts.

use crate::budget::Budget;
use crate::formula::{Assignment, Clause, CnfFormula, Lit, Var};

/// Outcome of a satisfiability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SatStatus {
    Sat,
    Unsat,
    BudgetExceeded,
}

// Internal literal code: 2 * slot + sign, sign = 1 for negative.
type ILit = u32;

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;
const RESTART_UNIT: u64 = 100;
const BUDGET_POLL: u64 = 256;

#[inline]
fn ilit(l: Lit) -> ILit {
    let v = l.var().slot() as u32;
    2 * v + u32::from(!l.is_positive())
}

#[inline]
fn ivar(l: ILit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn ineg(l: ILit) -> ILit {
    l ^ 1
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: ILit,
}

struct ClauseData {
    lits: Vec<ILit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Max-heap of variables keyed by activity.
#[derive(Default)]
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarOrder {
    fn grow(&mut self) {
        self.pos.push(-1);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] >= 0
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = self.heap.len() as i32;
        self.heap.push(v as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0] as usize;
        let last = self.heap.pop().unwrap();
        self.pos[top] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(v, p, act) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as i32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(self.heap[r], self.heap[l], act) { r } else { l };
            if !Self::better(self.heap[c], v, act) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    // Ties go to the lower variable index so runs are reproducible.
    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }
}

/// Luby sequence value for restart `i` (0-based).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

/// Incremental CDCL solver over variables `1..=num_vars`.
pub struct Solver {
    clauses: Vec<ClauseData>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    polarity: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    order: VarOrder,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    cla_inc: f64,
    max_learnts: f64,
    ok: bool,
    model: Vec<bool>,
    conflicts: u64,
    decisions: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(0)
    }
}

impl Solver {
    pub fn new(num_vars: u32) -> Solver {
        let mut s = Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            polarity: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            order: VarOrder::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            cla_inc: 1.0,
            max_learnts: 0.0,
            ok: true,
            model: Vec::new(),
            conflicts: 0,
            decisions: 0,
        };
        for _ in 0..num_vars {
            s.new_var();
        }
        s
    }

    /// Loads every clause of `f`. A falsum formula yields a permanently
    /// unsatisfiable solver.
    pub fn from_formula(f: &CnfFormula) -> Solver {
        let mut s = Solver::new(f.num_vars());
        s.add_formula(f);
        s
    }

    pub fn add_formula(&mut self, f: &CnfFormula) {
        while (self.num_vars()) < f.num_vars() {
            self.new_var();
        }
        for c in f.clauses() {
            self.add_clause(c.lits());
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.learnt && !c.deleted).count()
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    /// False once the clause database is unsatisfiable without assumptions.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len();
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.polarity.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow();
        self.order.insert(v, &self.activity);
        Var::from_slot(v)
    }

    #[inline]
    fn value(&self, l: ILit) -> u8 {
        let a = self.assigns[ivar(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l as u8 & 1)
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause permanently. Returns false when the database became
    /// unsatisfiable (for instance on an empty clause).
    ///
    /// # Panics
    ///
    /// If a literal refers to a variable beyond [`Solver::num_vars`].
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let n = self.num_vars();
        let mut c: Vec<ILit> = lits
            .iter()
            .map(|&l| {
                assert!(l.var().index() <= n, "literal {l} beyond {n} solver variables");
                ilit(l)
            })
            .collect();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == ineg(w[1])) {
            return true;
        }
        if c.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        c.retain(|&l| self.value(l) == UNDEF);
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watcher { cref, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(ClauseData { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn enqueue(&mut self, l: ILit, reason: u32) {
        let v = ivar(l);
        self.assigns[v] = u8::from(l & 1 == 0);
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns a conflicting clause reference, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = ineg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watcher { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let lk = self.clauses[cref].lits[k];
                    if self.value(lk) != 0 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[lk as usize].push(Watcher { cref: w.cref, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher { cref: w.cref, blocker: first };
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis; returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, u32) {
        let mut learnt: Vec<ILit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<ILit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();

        loop {
            self.bump_clause(confl as usize);
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = ivar(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[ivar(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            confl = self.reason[ivar(lit)];
            self.seen[ivar(lit)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = ineg(p.unwrap());

        // Local minimisation: drop literals implied by other learnt literals.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                let r = self.reason[ivar(l)];
                if r == NO_REASON {
                    return true;
                }
                self.clauses[r as usize].lits[1..].iter().any(|&q| !self.seen[ivar(q)] && self.level[ivar(q)] > 0)
            })
            .collect();
        for &l in &learnt {
            self.seen[ivar(l)] = false;
        }
        let mut learnt: Vec<ILit> = learnt.into_iter().zip(keep).filter(|&(_, k)| k).map(|(l, _)| l).collect();

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[ivar(learnt[i])] > self.level[ivar(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[ivar(learnt[1])];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = ivar(l);
            self.polarity[v] = l & 1 == 0;
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn locked(&self, cref: u32) -> bool {
        let c0 = self.clauses[cref as usize].lits[0];
        self.value(c0) == 1 && self.reason[ivar(c0)] == cref
    }

    fn reduce_db(&mut self) {
        let mut cand: Vec<u32> = self.learnts.clone();
        cand.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            (ca.lits.len() <= 2)
                .cmp(&(cb.lits.len() <= 2))
                .then(ca.activity.partial_cmp(&cb.activity).unwrap_or(std::cmp::Ordering::Equal))
        });
        let limit = cand.len() / 2;
        let mut kept = Vec::with_capacity(cand.len());
        for (i, &cref) in cand.iter().enumerate() {
            let c = &self.clauses[cref as usize];
            if i < limit && c.lits.len() > 2 && !self.locked(cref) {
                let c = &mut self.clauses[cref as usize];
                c.deleted = true;
                c.lits = Vec::new();
            } else {
                kept.push(cref);
            }
        }
        kept.sort_unstable();
        self.learnts = kept;
    }

    fn pick_branch(&mut self) -> Option<ILit> {
        loop {
            let v = self.order.pop(&self.activity)?;
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + u32::from(!self.polarity[v]));
            }
        }
    }

    /// Solves under `assumptions`. The solver is back at decision level 0
    /// afterwards; on `Sat` the witness is available through [`Solver::model`].
    pub fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> SatStatus {
        if !self.ok {
            return SatStatus::Unsat;
        }
        let assumptions: Vec<ILit> = assumptions
            .iter()
            .map(|&l| {
                assert!(l.var().index() <= self.num_vars(), "assumption {l} beyond solver variables");
                ilit(l)
            })
            .collect();
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.num_clauses() as f64 / 3.0).max(2000.0);
        }
        let mut restart = 0u64;
        let status = loop {
            if budget.expired() {
                break SatStatus::BudgetExceeded;
            }
            let limit = RESTART_UNIT * luby(restart);
            restart += 1;
            match self.search(&assumptions, limit, budget) {
                Some(st) => break st,
                None => {
                    self.max_learnts *= 1.05;
                }
            }
        };
        self.cancel_until(0);
        status
    }

    /// Runs CDCL for at most `conflict_limit` conflicts. `None` means restart.
    fn search(&mut self, assumptions: &[ILit], conflict_limit: u64, budget: &Budget) -> Option<SatStatus> {
        let mut local_conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local_conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SatStatus::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, cref);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.conflicts % BUDGET_POLL == 0 && budget.expired() {
                    return Some(SatStatus::BudgetExceeded);
                }
            } else {
                if local_conflicts >= conflict_limit {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_db();
                }

                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let p = assumptions[self.decision_level() as usize];
                    match self.value(p) {
                        1 => self.trail_lim.push(self.trail.len()),
                        0 => return Some(SatStatus::Unsat),
                        _ => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(p) => p,
                    None => match self.pick_branch() {
                        Some(p) => {
                            self.decisions += 1;
                            p
                        }
                        None => {
                            self.model = self.assigns.iter().map(|&a| a == 1).collect();
                            return Some(SatStatus::Sat);
                        }
                    },
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, NO_REASON);
            }
        }
    }

    /// Model of the last satisfiable query, indexed by [`Var::slot`].
    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

/// Result of [`SolverSession::solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    /// Total assignment over the session's variables, present iff `Sat`.
    pub witness: Option<Assignment>,
}

/// A solver loaded with a formula, accepting further clauses and per-query
/// assumptions.
pub struct SolverSession {
    solver: Solver,
}

impl SolverSession {
    pub fn new(formula: &CnfFormula) -> SolverSession {
        SolverSession { solver: Solver::from_formula(formula) }
    }

    pub fn add_clause(&mut self, clause: &Clause) {
        self.solver.add_clause(clause.lits());
    }

    pub fn solve(&mut self, assumptions: &Assignment, budget: &Budget) -> SatResult {
        let lits: Vec<Lit> = assumptions.lits().collect();
        let status = self.solver.solve(&lits, budget);
        let witness = (status == SatStatus::Sat).then(|| Assignment::from_total(self.solver.model()));
        SatResult { status, witness }
    }

    pub fn solver_mut(&mut self) -> &mut Solver {
        &mut self.solver
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(codes: &[i32]) -> Vec<Lit> {
        codes.iter().map(|&c| Lit::from_dimacs(c)).collect()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn unit_contradiction_under_assumption() {
        let f = CnfFormula::from_dimacs_clauses(1, &[&[1]]).unwrap();
        let mut s = Solver::from_formula(&f);
        assert_eq!(s.solve(&lits(&[-1]), &Budget::unlimited()), SatStatus::Unsat);
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Sat);
    }

    #[test]
    fn witness_satisfies_clause() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let mut s = SolverSession::new(&f);
        let r = s.solve(&Assignment::new(), &Budget::unlimited());
        assert_eq!(r.status, SatStatus::Sat);
        let w = r.witness.unwrap();
        assert!(f.eval(&w.to_total(2)));
    }

    #[test]
    fn falsum_is_unsat() {
        let mut s = Solver::from_formula(&CnfFormula::falsum(3));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Unsat);
    }

    #[test]
    fn added_clauses_narrow_models() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let mut s = Solver::from_formula(&f);
        s.add_clause(&lits(&[-1]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Sat);
        assert_eq!(s.model(), &[false, true]);
        s.add_clause(&lits(&[-1]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Sat);
        assert!(!s.add_clause(&[]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Unsat);
    }

    #[test]
    fn expired_budget_yields_no_verdict() {
        let f = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
        let mut s = Solver::from_formula(&f);
        assert_eq!(s.solve(&[], &Budget::from_secs_f64(0.0)), SatStatus::BudgetExceeded);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 6 pigeons in 5 holes.
        let (p, h) = (6u32, 5u32);
        let var = |i: u32, j: u32| (i * h + j + 1) as i32;
        let mut s = Solver::new(p * h);
        for i in 0..p {
            s.add_clause(&lits(&(0..h).map(|j| var(i, j)).collect::<Vec<_>>()));
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    s.add_clause(&lits(&[-var(a, j), -var(b, j)]));
                }
            }
        }
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Unsat);
    }

    #[test]
    fn fresh_variables_extend_the_solver() {
        let mut s = Solver::new(1);
        let v = s.new_var();
        assert_eq!(v.index(), 2);
        s.add_clause(&[v.neg()]);
        s.add_clause(&lits(&[1, 2]));
        assert_eq!(s.solve(&[], &Budget::unlimited()), SatStatus::Sat);
        assert_eq!(s.model(), &[true, false]);
    }
}
