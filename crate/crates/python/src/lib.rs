//! Python bindings. Users are 1-based, matrices are lists of 0/1 rows.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use partition_mac as pm;
use pm::random_coding::{DecoderKind, TrialConfig};

fn value_err(e: pm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<u8>]) -> PyResult<pm::AccessMatrix> {
    pm::AccessMatrix::from_rows(rows).map_err(value_err)
}

fn feedback(bits: &[u8]) -> PyResult<pm::Feedback> {
    pm::Feedback::from_bits(bits).map_err(value_err)
}

fn edges_of(h: &pm::hypergraph::Hypergraph) -> Vec<Vec<usize>> {
    h.edges().map(<[usize]>::to_vec).collect()
}

#[pyclass(name = "StatusVector", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyStatusVector(pm::StatusVector);

#[pymethods]
impl PyStatusVector {
    #[new]
    fn new(n_users: usize, active: Vec<usize>) -> PyResult<Self> {
        pm::StatusVector::new(n_users, active)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn n_users(&self) -> usize {
        self.0.n_users()
    }

    #[getter]
    fn active(&self) -> Vec<usize> {
        self.0.active().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "StatusVector(n_users={}, active={:?})",
            self.0.n_users(),
            self.0.active()
        )
    }
}

#[pyclass(name = "PartitionVector", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPartitionVector(pm::PartitionVector);

#[pymethods]
impl PyPartitionVector {
    #[new]
    #[pyo3(signature = (labels, n_groups=None))]
    fn new(labels: Vec<usize>, n_groups: Option<usize>) -> PyResult<Self> {
        match n_groups {
            Some(k) => pm::PartitionVector::new(labels, k),
            None => pm::PartitionVector::from_labels(labels),
        }
        .map(Self)
        .map_err(value_err)
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.0.labels().to_vec()
    }

    #[getter]
    fn n_groups(&self) -> usize {
        self.0.n_groups()
    }

    fn group_sizes(&self) -> Vec<usize> {
        self.0.group_sizes().as_slice().to_vec()
    }

    fn separates(&self, s: &PyStatusVector) -> bool {
        self.0.separates(&s.0)
    }

    fn __repr__(&self) -> String {
        format!("PartitionVector({})", self.0)
    }
}

#[pyclass(name = "ErrorEstimate", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyErrorEstimate {
    point: f64,
    ci_low: f64,
    ci_high: f64,
    trials: u64,
    failures: u64,
}

#[pymethods]
impl PyErrorEstimate {
    fn __repr__(&self) -> String {
        format!(
            "ErrorEstimate(point={}, ci=({}, {}), failures={}/{})",
            self.point, self.ci_low, self.ci_high, self.failures, self.trials
        )
    }
}

impl From<pm::ErrorEstimate> for PyErrorEstimate {
    fn from(e: pm::ErrorEstimate) -> Self {
        Self {
            point: e.point,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            trials: e.trials,
            failures: e.failures,
        }
    }
}

#[pyfunction]
fn or_channel(x: Vec<Vec<u8>>, s: &PyStatusVector) -> PyResult<Vec<u32>> {
    let y = pm::or_channel(&matrix(&x)?, &s.0).map_err(value_err)?;
    Ok(y.bits().into_iter().map(u32::from).collect())
}

#[pyfunction]
fn distortion(s: &PyStatusVector, z: &PyPartitionVector) -> PyResult<u8> {
    pm::distortion(&s.0, &z.0).map_err(value_err)
}

#[pyfunction]
fn optimal_group_sizes(n: usize, k: usize) -> PyResult<Vec<usize>> {
    Ok(pm::source_coding::optimal_group_sizes(n, k)
        .map_err(value_err)?
        .as_slice()
        .to_vec())
}

#[pyfunction]
fn partition_information_bits(n: usize, k: usize) -> PyResult<f64> {
    pm::source_coding::partition_information_bits(n, k).map_err(value_err)
}

#[pyfunction]
fn codebook_error_bound(l: f64, w_bits: f64) -> f64 {
    pm::source_coding::codebook_error_bound(l, w_bits)
}

/// Edges of the hypergraph left after applying every slot's feedback.
#[pyfunction]
fn reduce(n: usize, k: usize, x: Vec<Vec<u8>>, y: Vec<u8>) -> PyResult<Vec<Vec<usize>>> {
    let h = pm::hypergraph::reduce(n, k, &matrix(&x)?, &feedback(&y)?).map_err(value_err)?;
    Ok(edges_of(&h))
}

/// Strong coloring of the given edges, or `None` when none exists.
#[pyfunction]
fn strong_color(n: usize, k: usize, edges: Vec<Vec<usize>>) -> PyResult<Option<PyPartitionVector>> {
    let h = pm::hypergraph::Hypergraph::new(n, k, edges).map_err(value_err)?;
    Ok(pm::hypergraph::strong_color(&h)
        .ok()
        .map(|c| PyPartitionVector(c.into_partition())))
}

/// MAP partition and the number of candidate active sets it separates.
#[pyfunction]
fn map_decode(
    n: usize,
    k: usize,
    x: Vec<Vec<u8>>,
    y: Vec<u8>,
) -> PyResult<(PyPartitionVector, usize)> {
    let (z, score) = pm::random_coding::map_decode_scored(n, k, &matrix(&x)?, &feedback(&y)?)
        .map_err(value_err)?;
    Ok((PyPartitionVector(z), score))
}

#[pyfunction]
fn bipartite_decode_k2(
    n: usize,
    x: Vec<Vec<u8>>,
    y: Vec<u8>,
) -> PyResult<Option<PyPartitionVector>> {
    let decoded = pm::random_coding::bipartite_decode_k2(n, &matrix(&x)?, &feedback(&y)?)
        .map_err(value_err)?;
    Ok(decoded.ok().map(PyPartitionVector))
}

#[pyfunction]
fn slots_for_rate(n: usize, p: f64, xi: f64) -> PyResult<usize> {
    pm::random_coding::slots_for_rate(n, p, xi).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n, k, t, p, trials, seed, decoder="bipartite-k2", random_actives=false, fixed_codebook=false))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo_error(
    py: Python<'_>,
    n: usize,
    k: usize,
    t: usize,
    p: f64,
    trials: u64,
    seed: u64,
    decoder: &str,
    random_actives: bool,
    fixed_codebook: bool,
) -> PyResult<PyErrorEstimate> {
    let decoder: DecoderKind = decoder.parse().map_err(value_err)?;
    let cfg = TrialConfig {
        random_actives,
        fixed_codebook,
        ..TrialConfig::new(n, k, t, p, trials, seed, decoder)
    };
    py.detach(|| pm::random_coding::monte_carlo_error(&cfg))
        .map(Into::into)
        .map_err(value_err)
}

#[pyfunction]
fn c_rate(p: f64) -> f64 {
    pm::analysis::c_rate(p)
}

#[pyfunction]
fn c_group(p: f64) -> f64 {
    pm::analysis::c_group(p)
}

/// `(p_star, value)` maximizing `C` (`which="c"`) or `C_g` (`which="c_g"`).
#[pyfunction]
#[pyo3(signature = (which="c", tol=1e-9))]
fn maximize_rate(which: &str, tol: f64) -> PyResult<(f64, f64)> {
    let best = match which {
        "c" => pm::analysis::maximize_rate(pm::analysis::c_rate, tol),
        "c_g" => pm::analysis::maximize_rate(pm::analysis::c_group, tol),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown rate {other:?}, expected c or c_g"
            )))
        }
    };
    Ok((best.p_star, best.value))
}

#[pyfunction]
fn fib_extended(k: usize, p: f64) -> f64 {
    pm::analysis::fib_extended(k, p)
}

#[pyfunction]
fn no_consec_zeros_prob(m: usize, p: f64) -> f64 {
    pm::analysis::no_consec_zeros_prob(m, p)
}

/// `cycle_type` is one of "1", "2a", "2b", "3".
#[pyfunction]
fn survival_prob(cycle_type: &str, u: bool, v: bool, m: usize, p: f64) -> PyResult<f64> {
    use pm::analysis::CycleType;
    let cycle_type = match cycle_type {
        "1" => CycleType::One,
        "2a" => CycleType::TwoA,
        "2b" => CycleType::TwoB,
        "3" => CycleType::Three,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown cycle type {other:?}"
            )))
        }
    };
    pm::analysis::survival_prob(&pm::analysis::SurvivalQuery {
        cycle_type,
        slot_class: (u, v),
        cycle_len: m,
        p,
    })
    .map_err(value_err)
}

#[pyfunction]
fn cycle_error_bound(m: usize, p: f64, t: usize) -> PyResult<f64> {
    pm::analysis::cycle_error_bound(m, p, t).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "partition_mac")]
fn partition_mac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStatusVector>()?;
    m.add_class::<PyPartitionVector>()?;
    m.add_class::<PyErrorEstimate>()?;
    m.add_function(wrap_pyfunction!(or_channel, m)?)?;
    m.add_function(wrap_pyfunction!(distortion, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_group_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(partition_information_bits, m)?)?;
    m.add_function(wrap_pyfunction!(codebook_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(strong_color, m)?)?;
    m.add_function(wrap_pyfunction!(map_decode, m)?)?;
    m.add_function(wrap_pyfunction!(bipartite_decode_k2, m)?)?;
    m.add_function(wrap_pyfunction!(slots_for_rate, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_error, m)?)?;
    m.add_function(wrap_pyfunction!(c_rate, m)?)?;
    m.add_function(wrap_pyfunction!(c_group, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_rate, m)?)?;
    m.add_function(wrap_pyfunction!(fib_extended, m)?)?;
    m.add_function(wrap_pyfunction!(no_consec_zeros_prob, m)?)?;
    m.add_function(wrap_pyfunction!(survival_prob, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_error_bound, m)?)?;
    Ok(())
}
