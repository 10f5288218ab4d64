//! Primal-graph components and cut computation.
//!
//! The cut is a vertex separator taken from a min-degree elimination order,
//! which approximates a tree decomposition: every eliminated vertex's
//! neighbourhood at elimination time is the adhesion between its bag and the
//! rest of the decomposition.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{CnfFormula, Var, VarSet};

/// Adjacency sets of the primal graph over the variables occurring in `f`.
pub fn primal_graph(f: &CnfFormula) -> BTreeMap<Var, BTreeSet<Var>> {
    let mut adj: BTreeMap<Var, BTreeSet<Var>> = BTreeMap::new();
    for c in f.clauses() {
        for v in c.vars() {
            let entry = adj.entry(v).or_default();
            entry.extend(c.vars().filter(|&u| u != v));
        }
    }
    adj
}

/// Connected components of the primal graph, ordered by their smallest
/// variable. Variables that occur in no clause belong to no component.
pub fn components(f: &CnfFormula) -> Vec<VarSet> {
    let n = f.num_vars() as usize;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut occurs = vec![false; n];
    for c in f.clauses() {
        let mut it = c.vars();
        let Some(first) = it.next() else { continue };
        occurs[first.slot()] = true;
        for v in it {
            occurs[v.slot()] = true;
            let (a, b) = (find(&mut parent, first.slot()), find(&mut parent, v.slot()));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, VarSet> = BTreeMap::new();
    for slot in 0..n {
        if occurs[slot] {
            let root = find(&mut parent, slot);
            groups.entry(root).or_default().insert(Var::from_slot(slot));
        }
    }
    let mut out: Vec<VarSet> = groups.into_values().collect();
    out.sort_by_key(|s| s.min());
    out
}

/// Components of the graph after deleting `removed`.
fn components_without(adj: &BTreeMap<Var, BTreeSet<Var>>, removed: &BTreeSet<Var>) -> Vec<usize> {
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    let mut sizes = Vec::new();
    for &start in adj.keys() {
        if removed.contains(&start) || seen.contains(&start) {
            continue;
        }
        let mut stack = vec![start];
        seen.insert(start);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in &adj[&v] {
                if !removed.contains(&u) && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Separator candidates from a min-degree elimination order: the
/// neighbourhood of each vertex at the moment it is eliminated.
fn elimination_adhesions(adj: &BTreeMap<Var, BTreeSet<Var>>) -> Vec<BTreeSet<Var>> {
    let mut g = adj.clone();
    let mut out = Vec::new();
    while !g.is_empty() {
        let (&v, _) = g.iter().min_by_key(|(&v, n)| (n.len(), v)).unwrap();
        let nb = g.remove(&v).unwrap();
        for &u in &nb {
            let e = g.get_mut(&u).unwrap();
            e.remove(&v);
            e.extend(nb.iter().copied().filter(|&w| w != u));
        }
        if !nb.is_empty() && nb.len() < g.len() {
            out.push(nb);
        }
    }
    out
}

/// Most candidates checked for separation; they are visited smallest first.
const MAX_CANDIDATES: usize = 4096;

/// A variable set whose full assignment splits the formula into independent
/// parts.
///
/// Returns the empty set when the primal graph already has two or more
/// components. Otherwise returns the elimination adhesion that separates the
/// graph with the smallest `|cut| + largest remaining component`. When no
/// separator exists (the primal graph is a clique) all variables but the
/// highest are returned.
pub fn compute_cut(f: &CnfFormula) -> VarSet {
    if f.is_falsum() {
        return VarSet::new();
    }
    let adj = primal_graph(f);
    if adj.len() <= 1 || components_without(&adj, &BTreeSet::new()).len() >= 2 {
        return VarSet::new();
    }

    let mut candidates = elimination_adhesions(&adj);
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    candidates.dedup();

    let mut best: Option<(usize, usize, BTreeSet<Var>)> = None;
    for cand in candidates.into_iter().take(MAX_CANDIDATES) {
        if let Some((score, _, _)) = &best {
            // |cut| + 1 is a lower bound on the score.
            if cand.len() + 1 > *score {
                break;
            }
        }
        let sizes = components_without(&adj, &cand);
        if sizes.len() < 2 {
            continue;
        }
        let largest = sizes.into_iter().max().unwrap_or(0);
        let score = cand.len() + largest;
        let better = match &best {
            None => true,
            Some((s, l, c)) => (score, largest, &cand) < (*s, *l, c),
        };
        if better {
            best = Some((score, largest, cand));
        }
    }

    match best {
        Some((_, _, cut)) => cut.into_iter().collect(),
        None => {
            let mut all: VarSet = adj.keys().copied().collect();
            if let Some(&last) = adj.keys().next_back() {
                all.remove(last);
            }
            all
        }
    }
}
