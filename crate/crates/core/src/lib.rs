//! Counting minimal models of CNF formulas.
//!
//! Exact counts come from cut-conditioned projected enumeration
//! ([`projenum`]); probabilistic lower bounds come from random XOR hashing
//! ([`hashcount`]). [`minlb`] picks between the two by cut size.

pub mod bench;
pub mod budget;
pub mod decompose;
pub mod dlp;
pub mod error;
pub mod formula;
pub mod hashcount;
pub mod mingen;
pub mod minlb;
pub mod minmodel;
pub mod projenum;
pub mod result;
pub mod sat;

pub use budget::Budget;
pub use error::{Error, ParseError, Result};
pub use formula::{justified_restriction, parse_dimacs, Assignment, Clause, CnfFormula, Lit, Var, VarSet};
pub use result::{LowerBoundResult, Method};
