//! Minimal generators of a transaction database as minimal models.
//!
//! `mingen(D) = ⋀ᵢ (qᵢ ∨ ⋁_{a ∈ ℐ∖Iᵢ} p_a)`: `p_a` selects item `a` into the
//! itemset, `qᵢ` marks transaction `i` as covering it. Minimal models are in
//! one-to-one correspondence with minimal generators.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ParseError, Result};
use crate::formula::{Clause, CnfFormula, Var};
use crate::minmodel::MinimalModel;

pub type Item = u32;
pub type Itemset = BTreeSet<Item>;

/// Largest item universe accepted by [`brute_force_min_generators`].
pub const BRUTE_FORCE_ITEMS: usize = 16;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransactionDb {
    pub items: BTreeSet<Item>,
    /// `(id, itemset)` with ids starting at 1.
    pub transactions: Vec<(usize, Itemset)>,
}

impl TransactionDb {
    /// Builds a database with ids `1..`; the universe is the union of the
    /// transactions plus `extra_items`.
    pub fn new(transactions: Vec<Itemset>, extra_items: impl IntoIterator<Item = Item>) -> TransactionDb {
        let mut items: BTreeSet<Item> = extra_items.into_iter().collect();
        for t in &transactions {
            items.extend(t.iter().copied());
        }
        TransactionDb { items, transactions: transactions.into_iter().enumerate().map(|(i, t)| (i + 1, t)).collect() }
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }
}

/// One transaction per non-blank line, as whitespace-separated item ids.
pub fn parse_transactions(text: &str) -> Result<TransactionDb, ParseError> {
    let mut txns = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut set = Itemset::new();
        for tok in line.split_whitespace() {
            let item = tok.parse::<Item>().map_err(|_| ParseError::new(i + 1, format!("bad item id {tok:?}")))?;
            set.insert(item);
        }
        txns.push(set);
    }
    Ok(TransactionDb::new(txns, []))
}

#[derive(Clone, Debug)]
pub struct MingenEncoding {
    pub formula: CnfFormula,
    pub item_var: BTreeMap<Item, Var>,
    pub txn_var: BTreeMap<usize, Var>,
}

impl MingenEncoding {
    pub fn num_literals(&self) -> usize {
        self.formula.clauses().iter().map(|c| c.len()).sum()
    }
}

/// Items take variables `1..=|ℐ|` in ascending order, transactions follow.
pub fn encode_mingen(db: &TransactionDb) -> MingenEncoding {
    let item_var: BTreeMap<Item, Var> = db.items.iter().enumerate().map(|(i, &a)| (a, Var::from_slot(i))).collect();
    let base = item_var.len();
    let txn_var: BTreeMap<usize, Var> =
        db.transactions.iter().enumerate().map(|(i, (id, _))| (*id, Var::from_slot(base + i))).collect();
    let clauses = db
        .transactions
        .iter()
        .map(|(id, set)| {
            let missing = db.items.iter().filter(|a| !set.contains(a)).map(|a| item_var[a].pos());
            Clause::new(std::iter::once(txn_var[id].pos()).chain(missing)).expect("positive clause")
        })
        .collect();
    let formula = CnfFormula::new((base + db.len()) as u32, clauses).expect("variables in range");
    MingenEncoding { formula, item_var, txn_var }
}

/// Itemset from the true `p` variables, cover from the true `q` variables.
pub fn decode_generator(sigma: &MinimalModel, enc: &MingenEncoding) -> (Itemset, BTreeSet<usize>) {
    let items = enc.item_var.iter().filter(|(_, v)| sigma.value(**v)).map(|(a, _)| *a).collect();
    let cover = enc.txn_var.iter().filter(|(_, v)| sigma.value(**v)).map(|(i, _)| *i).collect();
    (items, cover)
}

/// Ids of the transactions containing `j`.
pub fn cover(j: &Itemset, db: &TransactionDb) -> BTreeSet<usize> {
    db.transactions.iter().filter(|(_, t)| j.is_subset(t)).map(|(id, _)| *id).collect()
}

/// Every itemset whose cover is strictly smaller than that of each of its
/// immediate subsets.
pub fn brute_force_min_generators(db: &TransactionDb) -> Result<BTreeSet<Itemset>> {
    if db.items.len() > BRUTE_FORCE_ITEMS {
        return Err(Error::TooLarge { what: "items", actual: db.items.len(), limit: BRUTE_FORCE_ITEMS });
    }
    let items: Vec<Item> = db.items.iter().copied().collect();
    let n = items.len();
    let covers: Vec<BTreeSet<usize>> = (0u32..1 << n)
        .map(|mask| {
            let set: Itemset = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect();
            cover(&set, db)
        })
        .collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << n {
        let generator = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .all(|b| covers[(mask & !(1 << b)) as usize].len() > covers[mask as usize].len());
        if generator {
            out.insert((0..n).filter(|b| mask >> b & 1 == 1).map(|b| items[b]).collect());
        }
    }
    Ok(out)
}
