//! Export of a CNF formula as a disjunctive logic program.
//!
//! Each clause `p1 ∨ … ∨ pk ∨ ¬n1 ∨ … ∨ ¬nm` becomes the rule
//! `p1 ; … ; pk :- n1, …, nm.` whose answer sets are the minimal models of
//! the formula. Atoms are written `x<index>`.

use crate::error::ParseError;
use crate::formula::{Clause, CnfFormula, Var};

/// A rule with a disjunctive head and a positive body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Vec<Var>,
    pub body: Vec<Var>,
}

impl Rule {
    pub fn from_clause(c: &Clause) -> Rule {
        Rule { head: c.positive_vars().collect(), body: c.negative_vars().collect() }
    }
}

fn render_rule(rule: &Rule) -> String {
    let head = rule.head.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ; ");
    let body = rule.body.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
    match (head.is_empty(), body.is_empty()) {
        (false, true) => format!("{head}."),
        (false, false) => format!("{head} :- {body}."),
        (true, false) => format!(":- {body}."),
        (true, true) => ":- #true.".to_string(),
    }
}

/// One rule per line, in clause order.
pub fn dlp_export(f: &CnfFormula) -> String {
    let mut out = String::new();
    for c in f.clauses() {
        out.push_str(&render_rule(&Rule::from_clause(c)));
        out.push('\n');
    }
    out
}

fn parse_atoms(s: &str, sep: char, line: usize) -> Result<Vec<Var>, ParseError> {
    let s = s.trim();
    if s.is_empty() || s == "#true" {
        return Ok(Vec::new());
    }
    s.split(sep)
        .map(|a| {
            let a = a.trim();
            a.strip_prefix('x')
                .and_then(|n| n.parse::<u32>().ok())
                .filter(|&n| n >= 1)
                .map(Var::new)
                .ok_or_else(|| ParseError::new(line, format!("bad atom {a:?}")))
        })
        .collect()
}

/// Reads back rules in the syntax produced by [`dlp_export`].
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ParseError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let line_no = i + 1;
        let body_text = line.strip_suffix('.').ok_or_else(|| ParseError::new(line_no, "rule must end with '.'"))?;
        let (head, body) = match body_text.split_once(":-") {
            Some((h, b)) => (parse_atoms(h, ';', line_no)?, parse_atoms(b, ',', line_no)?),
            None => (parse_atoms(body_text, ';', line_no)?, Vec::new()),
        };
        rules.push(Rule { head, body });
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CnfFormula;
    use crate::minmodel::brute_force_mm;
    use proptest::prelude::*;

    fn cnf(n: u32, cls: &[&[i32]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, cls).unwrap()
    }

    #[test]
    fn rule_shapes() {
        assert_eq!(dlp_export(&cnf(3, &[&[1, 2, -3]])), "x1 ; x2 :- x3.\n");
        assert_eq!(dlp_export(&cnf(1, &[&[1]])), "x1.\n");
        assert_eq!(dlp_export(&cnf(2, &[&[-1, -2]])), ":- x1, x2.\n");
    }

    fn satisfies(m: &[bool], rules: &[Rule]) -> bool {
        rules.iter().all(|r| r.body.iter().any(|v| !m[v.slot()]) || r.head.iter().any(|v| m[v.slot()]))
    }

    /// Answer sets by definition: a model of the program with no smaller
    /// model of its reduct. dlp(F) has no default negation, so the reduct is
    /// the program itself.
    fn answer_sets(n: usize, rules: &[Rule]) -> Vec<Vec<bool>> {
        let all: Vec<Vec<bool>> = (0..1u32 << n).map(|b| (0..n).map(|i| b >> i & 1 == 1).collect()).collect();
        all.iter()
            .filter(|m| satisfies(m, rules))
            .filter(|m| {
                !all.iter().any(|s| s != *m && s.iter().zip(m.iter()).all(|(a, b)| !a | b) && satisfies(s, rules))
            })
            .cloned()
            .collect()
    }

    fn arb_cnf() -> impl Strategy<Value = CnfFormula> {
        (2u32..7).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::btree_map(1..=n, any::<bool>(), 1..4), 0..8).prop_map(move |cls| {
                let clauses = cls
                    .into_iter()
                    .map(|m| Clause::new(m.into_iter().map(|(v, b)| Var::new(v).lit(b))).unwrap())
                    .collect();
                CnfFormula::new(n, clauses).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn export_round_trips(f in arb_cnf()) {
            let rules = parse_rules(&dlp_export(&f)).unwrap();
            prop_assert_eq!(rules.len(), f.num_clauses());
            for (r, c) in rules.iter().zip(f.clauses()) {
                prop_assert_eq!(r, &Rule::from_clause(c));
            }
        }

        #[test]
        fn answer_sets_are_minimal_models(f in arb_cnf()) {
            let rules = parse_rules(&dlp_export(&f)).unwrap();
            let mut asets = answer_sets(f.num_vars() as usize, &rules);
            let mut mms: Vec<Vec<bool>> = brute_force_mm(&f).unwrap().into_iter().map(|m| m.values().to_vec()).collect();
            asets.sort();
            mms.sort();
            prop_assert_eq!(asets, mms);
        }
    }
}
