use num_bigint::BigUint;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use whtrim_core::automata::{self, AutomatonSpec, StateBudget, TupleLabel};
use whtrim_core::constraints::{self, Word};
use whtrim_core::jsr::{self, ClosedLoopPair, GeneratorOptions, JsrOptions, Representation};
use whtrim_core::language;
use whtrim_core::linalg::Matrix;
use whtrim_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::StateBudgetExceeded { .. } | Error::SizeBudgetExceeded { .. } | Error::LimitExceeded { .. } => {
            PyMemoryError::new_err(e.to_string())
        }
        Error::NoConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn budget() -> PyResult<StateBudget> {
    StateBudget::from_env().map_err(err)
}

/// Whether a hit/miss word (`1` hit, `0` miss, oldest first) satisfies an
/// `anymiss:m:k` or `anyhit:h:k` constraint.
#[pyfunction]
fn satisfies(word: &str, constraint: &str) -> PyResult<bool> {
    match parse::<AutomatonSpec>(constraint)? {
        AutomatonSpec::Exact(c) => Ok(constraints::satisfies(&parse::<Word>(word)?, &c)),
        AutomatonSpec::Trim { .. } => Err(PyValueError::new_err("trim is not a constraint")),
    }
}

/// States of `T_{m,k,c}`; `c = 1` gives the exact automaton.
#[pyfunction]
#[pyo3(signature = (m, k, c = 1))]
fn state_count(m: u32, k: u32, c: u32) -> PyResult<BigUint> {
    automata::state_count(m, k, c).map_err(err)
}

/// Tuple-labelled automaton built from a spec string.
#[pyclass(frozen)]
struct Automaton {
    spec: AutomatonSpec,
    inner: automata::Automaton<TupleLabel>,
}

#[pymethods]
impl Automaton {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: AutomatonSpec = parse(spec)?;
        let inner = spec.build(budget()?).map_err(err)?;
        Ok(Self { spec, inner })
    }

    #[getter]
    fn spec(&self) -> String {
        self.spec.to_string()
    }

    #[getter]
    fn states(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn transitions(&self) -> usize {
        self.inner.transition_count()
    }

    #[getter]
    fn initial(&self) -> usize {
        self.inner.initial()
    }

    fn label(&self, state: usize) -> PyResult<Vec<u32>> {
        if state >= self.inner.len() {
            return Err(PyValueError::new_err(format!("state {state} out of range")));
        }
        Ok(self.inner.label(state).values().to_vec())
    }

    #[pyo3(signature = (state, hit))]
    fn successor(&self, state: usize, hit: bool) -> PyResult<Option<usize>> {
        if state >= self.inner.len() {
            return Err(PyValueError::new_err(format!("state {state} out of range")));
        }
        Ok(self.inner.successor(state, hit))
    }

    /// `(src, symbol, dst)` triples, symbol `0` miss and `1` hit.
    fn edges(&self) -> Vec<(usize, u8, usize)> {
        self.inner.transitions().collect()
    }

    fn accepts(&self, word: &str) -> PyResult<bool> {
        Ok(self.inner.accepts(&parse(word)?))
    }

    fn count_words(&self, length: usize) -> BigUint {
        language::count_words(&self.inner, length)
    }

    /// `(a, lambda)` with `|L_l| ~ a * lambda^l`.
    fn growth(&self) -> PyResult<(f64, f64)> {
        let g = language::growth(&self.inner).map_err(err)?;
        Ok((g.a, g.lambda))
    }

    fn __repr__(&self) -> String {
        format!("Automaton('{}', states={})", self.spec, self.inner.len())
    }
}

/// Whether `t` simulates `h`, with the number of related pairs visited.
#[pyfunction]
fn check_simulation(h: &Automaton, t: &Automaton) -> PyResult<(bool, usize)> {
    let r = language::check_simulation(&h.inner, &t.inner).map_err(err)?;
    Ok((r.holds, r.relation_size))
}

/// Shortest word up to `max_len` accepted by `a` and rejected by `t`.
#[pyfunction]
fn inclusion_counterexample(a: &Automaton, t: &Automaton, max_len: usize) -> PyResult<Option<String>> {
    Ok(language::inclusion_counterexample(&a.inner, &t.inner, max_len)
        .map_err(err)?
        .map(|w| w.to_string()))
}

#[pyclass(frozen, name = "ClosedLoopPair")]
struct PyPair(ClosedLoopPair);

#[pymethods]
impl PyPair {
    #[new]
    #[pyo3(signature = (phi_hit, phi_miss, name = "pair"))]
    fn new(phi_hit: Vec<Vec<f64>>, phi_miss: Vec<Vec<f64>>, name: &str) -> PyResult<Self> {
        let hit = Matrix::from_rows(&phi_hit).map_err(err)?;
        let miss = Matrix::from_rows(&phi_miss).map_err(err)?;
        Ok(Self(ClosedLoopPair::new(name, hit, miss).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(ClosedLoopPair::from_json(text).map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (seed = 1, dim = 2, sr = 0.6, open_loop_sr = 1.1, strategy = "hold"))]
    fn synthetic(seed: u64, dim: usize, sr: f64, open_loop_sr: f64, strategy: &str) -> PyResult<Self> {
        let opts = GeneratorOptions {
            seed,
            dim,
            strategy: parse(strategy)?,
            hit_radius: sr,
            open_loop_radius: open_loop_sr,
        };
        Ok(Self(jsr::synthetic_pair(&opts).map_err(err)?))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn phi_hit(&self) -> Vec<Vec<f64>> {
        self.0.phi_hit.to_rows()
    }

    #[getter]
    fn phi_miss(&self) -> Vec<Vec<f64>> {
        self.0.phi_miss.to_rows()
    }
}

/// JSR bounds of the lifted pair; returns a dict with the verdict, bounds
/// and per-iteration history.
#[pyfunction]
#[pyo3(signature = (pair, automaton, representation = "factored", delta = None, max_iterations = None, entry_budget = None))]
fn verify_stability<'py>(
    py: Python<'py>,
    pair: &PyPair,
    automaton: &Automaton,
    representation: &str,
    delta: Option<f64>,
    max_iterations: Option<usize>,
    entry_budget: Option<u128>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep: Representation = parse(representation)?;
    let mut opts = JsrOptions::default();
    if let Some(d) = delta {
        opts.delta = d;
    }
    if let Some(n) = max_iterations {
        opts.max_iterations = n;
    }
    if let Some(b) = entry_budget {
        opts.entry_budget = b;
    }
    let r = py
        .detach(|| jsr::verify_stability(&pair.0, &automaton.inner, rep, &opts))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("verdict", r.verdict.to_string())?;
    out.set_item("lower", r.lower)?;
    out.set_item("upper", r.upper)?;
    out.set_item("iterations", r.iterations)?;
    out.set_item("stored_entries", r.stored_entries)?;
    out.set_item("factored_entries", r.factored_entries)?;
    out.set_item("explicit_entries", r.explicit_entries)?;
    out.set_item("representation", r.representation.to_string())?;
    out.set_item("delta", r.delta)?;
    out.set_item("lower_word", r.lower_word)?;
    out.set_item("exhausted", r.exhausted)?;
    let history: Vec<(usize, f64, f64, u128, usize)> = r
        .history
        .iter()
        .map(|s| (s.iteration, s.lower, s.upper, s.stored_entries, s.frontier))
        .collect();
    out.set_item("history", history)?;
    Ok(out)
}

#[pymodule]
fn whtrim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(satisfies, m)?)?;
    m.add_function(wrap_pyfunction!(state_count, m)?)?;
    m.add_function(wrap_pyfunction!(check_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(inclusion_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(verify_stability, m)?)?;
    m.add_class::<Automaton>()?;
    m.add_class::<PyPair>()?;
    Ok(())
}
