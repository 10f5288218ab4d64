//! CNF formulas, literals, partial assignments and the conditioning operator.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};

/// A propositional variable, 1-based as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(u32);

impl Var {
    /// # Panics
    ///
    /// If `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, handy for indexing dense arrays.
    pub fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_slot(slot: usize) -> Var {
        Var(slot as u32 + 1)
    }

    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    pub fn lit(self, value: bool) -> Lit {
        if value {
            self.pos()
        } else {
            self.neg()
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal in signed DIMACS encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lit(i32);

impl Lit {
    /// # Panics
    ///
    /// If `code` is zero.
    pub fn from_dimacs(code: i32) -> Lit {
        assert!(code != 0, "0 is not a literal");
        Lit(code)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl PartialOrd for Lit {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Literals order by variable, negative before positive.
impl Ord for Lit {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.var(), self.is_positive()).cmp(&(other.var(), other.is_positive()))
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals. Literals are kept sorted and duplicate-free; a
/// clause never holds both polarities of a variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause, collapsing duplicate literals. Tautologies are rejected.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Result<Clause, Error> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if let Some(w) = lits.windows(2).find(|w| w[0].var() == w[1].var()) {
            return Err(Error::Tautology(w[0].var().index()));
        }
        Ok(Clause { lits })
    }

    pub fn from_dimacs(codes: &[i32]) -> Result<Clause, Error> {
        Clause::new(codes.iter().map(|&c| Lit::from_dimacs(c)))
    }

    /// The empty clause.
    pub fn falsum() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.lits.len() == 1
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    /// Evaluates the clause under a total assignment indexed by [`Var::slot`].
    pub fn eval(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(values[l.var().slot()]))
    }

    pub fn positive_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().filter(|l| l.is_positive()).map(|l| l.var())
    }

    pub fn negative_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().filter(|l| !l.is_positive()).map(|l| l.var())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lits {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A set of variables in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarSet(BTreeSet<Var>);

impl VarSet {
    pub fn new() -> VarSet {
        VarSet::default()
    }

    pub fn range(num_vars: u32) -> VarSet {
        (1..=num_vars).map(Var::new).collect()
    }

    pub fn insert(&mut self, v: Var) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: Var) -> bool {
        self.0.remove(&v)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().copied()
    }

    pub fn min(&self) -> Option<Var> {
        self.0.first().copied()
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn to_vec(&self) -> Vec<Var> {
        self.0.iter().copied().collect()
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<T: IntoIterator<Item = Var>>(iter: T) -> Self {
        VarSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = Var;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Var>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

/// Partial map from variables to truth values. Also used for models, blocking
/// terms and cut projections.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<Var, bool>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// Total assignment over `1..=values.len()`.
    pub fn from_total(values: &[bool]) -> Assignment {
        Assignment(values.iter().enumerate().map(|(i, &b)| (Var::from_slot(i), b)).collect())
    }

    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Assignment {
        Assignment(lits.into_iter().map(|l| (l.var(), l.is_positive())).collect())
    }

    /// Binds `v`, returning the previous value if any.
    pub fn set(&mut self, v: Var, value: bool) -> Option<bool> {
        self.0.insert(v, value)
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> VarSet {
        self.0.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// The bindings as literals, ascending by variable.
    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.iter().map(|(v, b)| v.lit(b))
    }

    pub fn true_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().filter(|&(_, b)| b).map(|(v, _)| v)
    }

    /// Projection onto `vars`.
    pub fn project(&self, vars: &VarSet) -> Assignment {
        Assignment(self.0.iter().filter(|(v, _)| vars.contains(**v)).map(|(&v, &b)| (v, b)).collect())
    }

    /// Restriction to the bindings with the given value.
    pub fn restrict_to_value(&self, value: bool) -> Assignment {
        Assignment(self.0.iter().filter(|(_, &b)| b == value).map(|(&v, &b)| (v, b)).collect())
    }

    /// `self ⊨ other`: every binding of `other` is present in `self`.
    pub fn satisfies(&self, other: &Assignment) -> bool {
        other.iter().all(|(v, b)| self.get(v) == Some(b))
    }

    /// Dense view over `1..=num_vars`, unbound variables read as false.
    pub fn to_total(&self, num_vars: u32) -> Vec<bool> {
        let mut out = vec![false; num_vars as usize];
        for (v, b) in self.iter() {
            if v.index() <= num_vars {
                out[v.slot()] = b;
            }
        }
        out
    }

    /// The blocking clause excluding exactly this assignment.
    pub fn blocking_clause(&self) -> Vec<Lit> {
        self.lits().map(|l| !l).collect()
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Var, bool)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.lits().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// An immutable CNF formula over variables `1..=num_vars`.
///
/// A formula containing the empty clause is falsum; [`CnfFormula::falsum`]
/// builds the canonical one, which holds that single clause.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<CnfFormula, Error> {
        for c in &clauses {
            if let Some(l) = c.lits().iter().find(|l| l.var().index() > num_vars) {
                return Err(Error::VarOutOfRange { var: l.var().index(), num_vars });
            }
        }
        if clauses.iter().any(Clause::is_empty) {
            return Ok(CnfFormula::falsum(num_vars));
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS-coded clauses.
    pub fn from_dimacs_clauses(num_vars: u32, clauses: &[&[i32]]) -> Result<CnfFormula, Error> {
        let clauses = clauses.iter().map(|c| Clause::from_dimacs(c)).collect::<Result<Vec<_>, _>>()?;
        CnfFormula::new(num_vars, clauses)
    }

    pub fn falsum(num_vars: u32) -> CnfFormula {
        CnfFormula { num_vars, clauses: vec![Clause::falsum()] }
    }

    pub fn is_falsum(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Variables occurring in some clause.
    pub fn vars(&self) -> VarSet {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Evaluates under a total assignment indexed by [`Var::slot`].
    pub fn eval(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.eval(values))
    }

    /// Number of clause occurrences per variable, indexed by slot.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.num_vars as usize];
        for c in &self.clauses {
            for v in c.vars() {
                occ[v.slot()] += 1;
            }
        }
        occ
    }

    /// Unit propagation of `tau` on the formula (`F|τ`).
    ///
    /// Clauses satisfied by `tau` are removed. A literal is removed from a
    /// clause when `tau` falsifies it or when its complement is a unit clause
    /// of the current formula; this repeats to fixpoint. If an empty clause
    /// appears the canonical falsum is returned.
    ///
    /// Minimal models are only preserved when `tau` binds variables to false;
    /// see [`justified_restriction`].
    pub fn condition(&self, tau: &Assignment) -> CnfFormula {
        if self.is_falsum() {
            return self.clone();
        }
        let mut clauses: Vec<Vec<Lit>> = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            if c.lits().iter().any(|l| tau.get(l.var()) == Some(l.is_positive())) {
                continue;
            }
            let reduced: Vec<Lit> = c.lits().iter().copied().filter(|l| tau.get(l.var()).is_none()).collect();
            if reduced.is_empty() {
                return CnfFormula::falsum(self.num_vars);
            }
            clauses.push(reduced);
        }

        let mut units: HashSet<Lit> = HashSet::new();
        loop {
            let fresh: Vec<Lit> = clauses.iter().filter(|c| c.len() == 1).map(|c| c[0]).filter(|l| !units.contains(l)).collect();
            if fresh.is_empty() {
                break;
            }
            units.extend(fresh);
            for c in clauses.iter_mut() {
                c.retain(|l| !units.contains(&!*l));
                if c.is_empty() {
                    return CnfFormula::falsum(self.num_vars);
                }
            }
        }

        let mut seen = HashSet::new();
        let clauses = clauses
            .into_iter()
            .map(|lits| Clause { lits })
            .filter(|c| seen.insert(c.clone()))
            .collect();
        CnfFormula { num_vars: self.num_vars, clauses }
    }

    /// Sub-formula made of the clauses touching `vars`.
    pub fn restrict_to(&self, vars: &VarSet) -> CnfFormula {
        let clauses = self.clauses.iter().filter(|c| c.vars().any(|v| vars.contains(v))).cloned().collect();
        CnfFormula { num_vars: self.num_vars, clauses }
    }

    /// Renders the formula in DIMACS CNF.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// `τ*`: the false bindings of `tau`, which are always justified under
/// minimal-model semantics.
pub fn justified_restriction(tau: &Assignment) -> Assignment {
    tau.restrict_to_value(false)
}

/// Parses DIMACS CNF text.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut current_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::new(line_no, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(ParseError::new(line_no, "malformed header, expected \"p cnf <vars> <clauses>\""));
            }
            let vars = fields[2].parse::<u32>().map_err(|_| ParseError::new(line_no, "invalid variable count"))?;
            let ncl = fields[3].parse::<usize>().map_err(|_| ParseError::new(line_no, "invalid clause count"))?;
            if vars > (i32::MAX as u32) {
                return Err(ParseError::new(line_no, "variable count too large"));
            }
            header = Some((vars, ncl));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::new(line_no, "clause before \"p cnf\" header"));
        };
        for tok in line.split_whitespace() {
            let code: i32 = tok.parse().map_err(|_| ParseError::new(line_no, format!("invalid literal {tok:?}")))?;
            if code == 0 {
                let clause = Clause::from_dimacs(&current).map_err(|e| ParseError::new(current_line.max(line_no), e.to_string()))?;
                clauses.push(clause);
                current.clear();
                continue;
            }
            if code.unsigned_abs() > num_vars {
                return Err(ParseError::new(
                    line_no,
                    format!("literal {code} exceeds declared {num_vars} variables"),
                ));
            }
            if current.is_empty() {
                current_line = line_no;
            }
            current.push(code);
        }
    }

    let Some((num_vars, _)) = header else {
        return Err(ParseError::new(last_line.max(1), "missing \"p cnf\" header"));
    };
    if !current.is_empty() {
        return Err(ParseError::new(current_line, "clause missing terminating 0"));
    }
    CnfFormula::new(num_vars, clauses).map_err(|e| ParseError::new(last_line, e.to_string()))
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}
