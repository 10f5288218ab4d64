#![allow(dead_code)]

use minlb_core::{Clause, CnfFormula, Var};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random `k`-CNF over `n` variables with `m` clauses of distinct variables.
pub fn random_kcnf<R: Rng>(rng: &mut R, n: u32, m: usize, k: usize) -> CnfFormula {
    let vars: Vec<u32> = (1..=n).collect();
    let clauses = (0..m)
        .map(|_| {
            let picked: Vec<u32> = vars.choose_multiple(rng, k.min(n as usize)).copied().collect();
            Clause::new(picked.into_iter().map(|v| Var::new(v).lit(rng.gen_bool(0.5)))).unwrap()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

/// Random CNF with clause widths 1..=3 over variables `offset+1 ..= offset+n`
/// inside a formula of `total` variables.
pub fn random_block<R: Rng>(rng: &mut R, offset: u32, n: u32, m: usize) -> Vec<Clause> {
    let vars: Vec<u32> = (offset + 1..=offset + n).collect();
    (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=3usize.min(n as usize));
            let picked: Vec<u32> = vars.choose_multiple(rng, k).copied().collect();
            // Lean positive so that blocks have several minimal models.
            Clause::new(picked.into_iter().map(|v| Var::new(v).lit(rng.gen_bool(0.6)))).unwrap()
        })
        .collect()
}

/// Independent witness scan: every true variable has a clause in which it
/// is the only true literal, occurring positively.
pub fn justified(f: &CnfFormula, values: &[bool]) -> bool {
    (0..values.len()).filter(|&i| values[i]).all(|i| {
        let v = Var::from_slot(i);
        f.clauses().iter().any(|c| {
            c.contains(v.pos())
                && c.lits().iter().all(|l| l.var() == v || !l.eval(values[l.var().slot()]))
        })
    })
}

/// All satisfying total assignments by enumeration.
pub fn all_models(f: &CnfFormula) -> Vec<Vec<bool>> {
    let n = f.num_vars();
    (0u64..1 << n)
        .map(|b| (0..n).map(|i| b >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|v| f.eval(v))
        .collect()
}
