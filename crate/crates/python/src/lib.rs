//! Python bindings: `import minlb`.

use std::path::PathBuf;

use pyo3::exceptions::{PyTimeoutError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use minlb_core::bench::{self, TqpConfig};
use minlb_core::decompose;
use minlb_core::dlp::dlp_export;
use minlb_core::hashcount::{self, HashCountConfig};
use minlb_core::mingen::{self, TransactionDb};
use minlb_core::minlb::{self as hybrid, MinLbConfig};
use minlb_core::minmodel::{self, DEFAULT_CAP};
use minlb_core::projenum::{self, ProjEnumConfig};
use minlb_core::{parse_dimacs, Budget, CnfFormula, Error, LowerBoundResult, Var, VarSet};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn budget(timeout_s: Option<f64>) -> Budget {
    timeout_s.map_or_else(Budget::unlimited, Budget::from_secs_f64)
}

fn var_list(vs: &VarSet) -> Vec<u32> {
    vs.iter().map(|v| v.index()).collect()
}

fn result_dict<'py>(py: Python<'py>, r: &LowerBoundResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", r.method.name())?;
    d.set_item("bound_log2", r.bound_log2.is_finite().then_some(r.bound_log2))?;
    d.set_item("count", r.count.clone())?;
    d.set_item("exact", r.exact)?;
    d.set_item("confidence", r.confidence)?;
    d.set_item("elapsed", r.elapsed)?;
    Ok(d)
}

/// A CNF formula over variables `1..=num_vars`; clauses use DIMACS literals.
#[pyclass(name = "CnfFormula", module = "minlb", frozen)]
struct PyCnf {
    inner: CnfFormula,
}

#[pymethods]
impl PyCnf {
    #[new]
    fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> PyResult<Self> {
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        Ok(PyCnf { inner: CnfFormula::from_dimacs_clauses(num_vars, &refs).map_err(err)? })
    }

    /// Parses DIMACS text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCnf { inner: parse_dimacs(text).map_err(|e| err(e.into()))? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)?;
        Self::parse(&text)
    }

    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.num_vars()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.inner.num_clauses()
    }

    #[getter]
    fn is_falsum(&self) -> bool {
        self.inner.is_falsum()
    }

    fn clauses(&self) -> Vec<Vec<i32>> {
        self.inner.clauses().iter().map(|c| c.lits().iter().map(|l| l.to_dimacs()).collect()).collect()
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    /// The formula as a disjunctive logic program.
    fn to_dlp(&self) -> String {
        dlp_export(&self.inner)
    }

    /// Whether the total assignment (a list of true variables) is a model.
    fn is_model(&self, true_vars: Vec<u32>) -> bool {
        let mut values = vec![false; self.inner.num_vars() as usize];
        for v in true_vars {
            if v >= 1 && v <= self.inner.num_vars() {
                values[v as usize - 1] = true;
            }
        }
        self.inner.eval(&values)
    }

    fn __repr__(&self) -> String {
        format!("CnfFormula(num_vars={}, num_clauses={})", self.inner.num_vars(), self.inner.num_clauses())
    }
}

/// Minimal models by exhaustive search, as sorted lists of true variables.
#[pyfunction]
fn brute_force_minimal_models(f: &PyCnf) -> PyResult<Vec<Vec<u32>>> {
    let mms = minmodel::brute_force_mm(&f.inner).map_err(err)?;
    Ok(mms.iter().map(|m| m.true_vars().iter().map(|v| v.index()).collect()).collect())
}

/// Minimal models found by SAT-based enumeration, up to `cap`.
#[pyfunction]
#[pyo3(signature = (f, cap = DEFAULT_CAP, timeout_s = None))]
fn minimal_models(f: &PyCnf, cap: u64, timeout_s: Option<f64>) -> PyResult<Vec<Vec<u32>>> {
    let (mms, complete) = minmodel::enumerate_minimal_models(&f.inner, cap, &budget(timeout_s));
    if !complete && mms.is_empty() && !f.inner.is_falsum() {
        return Err(PyTimeoutError::new_err("budget exhausted"));
    }
    Ok(mms.iter().map(|m| m.true_vars().iter().map(|v| v.index()).collect()).collect())
}

#[pyfunction]
fn compute_cut(f: &PyCnf) -> Vec<u32> {
    var_list(&decompose::compute_cut(&f.inner))
}

#[pyfunction]
#[pyo3(signature = (f, timeout_s = None))]
fn independent_support(f: &PyCnf, timeout_s: Option<f64>) -> Vec<u32> {
    var_list(&hashcount::independent_support(&f.inner, &budget(timeout_s)))
}

/// Exact count by cut conditioning; `cut` defaults to the computed cut.
#[pyfunction]
#[pyo3(signature = (f, cut = None, cap = DEFAULT_CAP, timeout_s = None))]
fn proj_enum_count<'py>(
    py: Python<'py>,
    f: &PyCnf,
    cut: Option<Vec<u32>>,
    cap: u64,
    timeout_s: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cut: VarSet = match cut {
        Some(vs) if vs.contains(&0) => return Err(PyValueError::new_err("variables are 1-based")),
        Some(vs) => vs.into_iter().map(Var::new).collect(),
        None => decompose::compute_cut(&f.inner),
    };
    let r = projenum::proj_enum_count(&f.inner, &cut, &ProjEnumConfig { cap, budget: budget(timeout_s) }).map_err(err)?;
    result_dict(py, &r)
}

/// Lower bound by XOR hashing with confidence `1 - delta`.
#[pyfunction]
#[pyo3(signature = (f, delta = 0.2, seed = 0, timeout_s = None, xor_over_all_vars = false))]
fn hashcount_lower_bound<'py>(
    py: Python<'py>,
    f: &PyCnf,
    delta: f64,
    seed: u64,
    timeout_s: Option<f64>,
    xor_over_all_vars: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let b = budget(timeout_s);
    let x = if xor_over_all_vars {
        VarSet::range(f.inner.num_vars())
    } else {
        hashcount::independent_support(&f.inner, &b)
    };
    let rep = hashcount::hashcount_lower_bound(&f.inner, &x, &HashCountConfig { delta, seed, budget: b }).map_err(err)?;
    let d = result_dict(py, &rep.result)?;
    d.set_item("m_star", rep.m_star)?;
    d.set_item("timed_out", rep.timed_out)?;
    Ok(d)
}

/// Hybrid bound: exact when the cut has at most `cut_limit` variables.
#[pyfunction]
#[pyo3(name = "minlb", signature = (f, delta = 0.2, cut_limit = 50, seed = 0, cap = DEFAULT_CAP, timeout_s = None, xor_over_all_vars = false))]
#[allow(clippy::too_many_arguments)]
fn minlb_bound<'py>(
    py: Python<'py>,
    f: &PyCnf,
    delta: f64,
    cut_limit: usize,
    seed: u64,
    cap: u64,
    timeout_s: Option<f64>,
    xor_over_all_vars: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = MinLbConfig { delta, cut_limit, cap, seed, budget: budget(timeout_s), xor_over_all_vars };
    let rep = hybrid::minlb(&f.inner, &cfg).map_err(err)?;
    let r = rep.result.ok_or_else(|| PyTimeoutError::new_err("budget exhausted before any bound was found"))?;
    let d = result_dict(py, &r)?;
    d.set_item("branch", rep.branch.name())?;
    d.set_item("cut_size", rep.cut_size)?;
    Ok(d)
}

fn db_from(transactions: Vec<Vec<u32>>) -> TransactionDb {
    TransactionDb::new(transactions.into_iter().map(|t| t.into_iter().collect()).collect(), [])
}

/// Minimal generators of a transaction database as `(itemset, cover)` pairs,
/// with transaction ids starting at 1.
#[pyfunction]
fn minimal_generators(transactions: Vec<Vec<u32>>) -> Vec<(Vec<u32>, Vec<usize>)> {
    let db = db_from(transactions);
    let enc = mingen::encode_mingen(&db);
    let (mms, _) = minmodel::enumerate_minimal_models(&enc.formula, u64::MAX, &Budget::unlimited());
    let mut out: Vec<(Vec<u32>, Vec<usize>)> = mms
        .iter()
        .map(|m| {
            let (items, cover) = mingen::decode_generator(m, &enc);
            (items.into_iter().collect(), cover.into_iter().collect())
        })
        .collect();
    out.sort();
    out
}

/// The CNF whose minimal models are the database's minimal generators.
#[pyfunction]
fn mingen_formula(transactions: Vec<Vec<u32>>) -> PyCnf {
    PyCnf { inner: mingen::encode_mingen(&db_from(transactions)).formula }
}

/// `2T` without a bound, else `t + T (1 + log(c_min + 1)) / (1 + log(C + 1))`.
#[pyfunction]
#[pyo3(signature = (time_s, bound, c_min, timeout_s = 5000.0, log_base = 10.0))]
fn tqp_score(time_s: f64, bound: Option<f64>, c_min: f64, timeout_s: f64, log_base: f64) -> f64 {
    bench::tqp_value(time_s, bound, c_min, &TqpConfig { timeout: timeout_s, log_base })
}

#[pyfunction]
#[pyo3(signature = (c_a, c_b, log_base = 10.0))]
fn relative_quality(c_a: f64, c_b: f64, log_base: f64) -> f64 {
    bench::relative_quality(c_a, c_b, &TqpConfig { timeout: 1.0, log_base })
}

#[pymodule]
fn minlb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCnf>()?;
    m.add_function(wrap_pyfunction!(brute_force_minimal_models, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_models, m)?)?;
    m.add_function(wrap_pyfunction!(compute_cut, m)?)?;
    m.add_function(wrap_pyfunction!(independent_support, m)?)?;
    m.add_function(wrap_pyfunction!(proj_enum_count, m)?)?;
    m.add_function(wrap_pyfunction!(hashcount_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(minlb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_generators, m)?)?;
    m.add_function(wrap_pyfunction!(mingen_formula, m)?)?;
    m.add_function(wrap_pyfunction!(tqp_score, m)?)?;
    m.add_function(wrap_pyfunction!(relative_quality, m)?)?;
    Ok(())
}
