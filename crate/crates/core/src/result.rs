use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Which counter produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    ProjEnum,
    HashCount,
    MinLB,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ProjEnum => "projenum",
            Method::HashCount => "hashcount",
            Method::MinLB => "minlb",
            Method::BruteForce => "bruteforce",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "projenum" | "proj-enum" => Ok(Method::ProjEnum),
            "hashcount" => Ok(Method::HashCount),
            "minlb" => Ok(Method::MinLB),
            "bruteforce" | "brute-force" => Ok(Method::BruteForce),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// `log2` of an arbitrary-precision count; `-inf` for zero.
pub fn log2_big(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

/// A (possibly probabilistic) lower bound on the number of minimal models.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundResult {
    /// `log2` of the bound. `-inf` when the bound is zero; may be negative for
    /// hashing bounds below one.
    pub bound_log2: f64,
    /// The bound as an integer, for deterministic counters.
    pub count: Option<BigUint>,
    /// True when `count` is exactly the number of minimal models.
    pub exact: bool,
    /// Probability that the bound holds: 1 for deterministic results.
    pub confidence: f64,
    pub method: Method,
    pub elapsed: f64,
    /// Reference `log2 |MM(F)|`, filled in by tests and the bench harness.
    pub oracle_log2: Option<f64>,
}

impl LowerBoundResult {
    pub fn counted(count: BigUint, exact: bool, method: Method, elapsed: f64) -> LowerBoundResult {
        LowerBoundResult {
            bound_log2: log2_big(&count),
            count: Some(count),
            exact,
            confidence: 1.0,
            method,
            elapsed,
            oracle_log2: None,
        }
    }

    pub fn zero(method: Method, elapsed: f64) -> LowerBoundResult {
        LowerBoundResult::counted(BigUint::zero(), true, method, elapsed)
    }

    pub fn probabilistic(bound_log2: f64, confidence: f64, elapsed: f64) -> LowerBoundResult {
        LowerBoundResult {
            bound_log2,
            count: None,
            exact: false,
            confidence,
            method: Method::HashCount,
            elapsed,
            oracle_log2: None,
        }
    }

    /// The bound as a real number, `2^bound_log2`.
    pub fn bound(&self) -> f64 {
        match &self.count {
            Some(c) => c.to_f64().unwrap_or(f64::INFINITY),
            None => self.bound_log2.exp2(),
        }
    }

    /// JSON rendering without timing information, so that identical runs
    /// print identical bytes.
    pub fn to_json(&self) -> serde_json::Value {
        let log2 = if self.bound_log2.is_finite() { serde_json::json!(self.bound_log2) } else { serde_json::Value::Null };
        let mut obj = serde_json::json!({
            "method": self.method.name(),
            "bound_log2": log2,
            "count": self.count.as_ref().map(|c| c.to_string()),
            "exact": self.exact,
            "confidence": self.confidence,
        });
        if let Some(o) = self.oracle_log2 {
            obj["oracle_log2"] = serde_json::json!(o);
        }
        obj
    }
}
