//! Python bindings. Infinite distances are returned as `math.inf`.

use std::sync::{Arc, Mutex};

use distenum::metering::run_metered;
use distenum::oracle::{validate as validate_stream, validate_single_source};
use distenum::{
    brute_force_matrix, DelayReport, Distance, DistanceTriple, EnumError, GraphError, OutputMode,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Triple = (usize, usize, Dist);

/// A distance as handed to Python: an int, or `math.inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Finite(u64),
    Infinite,
}

impl<'py> IntoPyObject<'py> for Dist {
    type Target = PyAny;
    type Output = Bound<'py, PyAny>;
    type Error = PyErr;

    fn into_pyobject(self, py: Python<'py>) -> PyResult<Self::Output> {
        match self {
            Dist::Finite(d) => Ok(d.into_pyobject(py)?.into_any()),
            Dist::Infinite => Ok(f64::INFINITY.into_pyobject(py)?.into_any()),
        }
    }
}

impl<'a, 'py> FromPyObject<'a, 'py> for Dist {
    type Error = PyErr;

    fn extract(ob: Borrowed<'a, 'py, PyAny>) -> PyResult<Self> {
        if let Ok(d) = ob.extract::<u64>() {
            return Ok(Dist::Finite(d));
        }
        match ob.extract::<f64>() {
            Ok(f) if f == f64::INFINITY => Ok(Dist::Infinite),
            _ => Err(PyValueError::new_err(
                "distance must be a non-negative int or math.inf",
            )),
        }
    }
}

impl From<Distance> for Dist {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Finite(x) => Dist::Finite(x),
            Distance::Infinite => Dist::Infinite,
        }
    }
}

impl From<Dist> for Distance {
    fn from(d: Dist) -> Self {
        match d {
            Dist::Finite(x) => Distance::Finite(x),
            Dist::Infinite => Distance::Infinite,
        }
    }
}

fn triple(t: DistanceTriple) -> Triple {
    (t.source, t.target, t.distance.into())
}

fn graph_err(e: GraphError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn enum_err(e: EnumError) -> PyErr {
    match e {
        EnumError::ScheduleUnderflow { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn mode(row_wise: bool, no_self: bool, reachable: bool, sorted: bool) -> OutputMode {
    OutputMode {
        row_wise,
        no_self,
        reachable_only: reachable,
        sorted,
    }
}

/// Immutable graph in adjacency-array form.
#[pyclass(frozen, module = "pydistenum")]
pub struct Graph {
    inner: Arc<distenum::Graph>,
}

impl Graph {
    fn wrap(g: distenum::Graph) -> Self {
        Self { inner: Arc::new(g) }
    }
}

#[pymethods]
impl Graph {
    /// Builds a graph from `(u, v)` or `(u, v, w)` tuples.
    #[new]
    #[pyo3(signature = (n, edges, directed = false))]
    fn new(n: usize, edges: Vec<Vec<i64>>, directed: bool) -> PyResult<Self> {
        let weighted = edges.first().is_some_and(|e| e.len() == 3);
        let bad = || PyValueError::new_err("edges must all be (u, v) or all be (u, v, w)");
        let vertex = |x: i64| {
            usize::try_from(x).map_err(|_| PyValueError::new_err(format!("bad vertex id {x}")))
        };
        if weighted {
            let mut list = Vec::with_capacity(edges.len());
            for e in &edges {
                let [u, v, w] = e[..] else { return Err(bad()) };
                list.push((vertex(u)?, vertex(v)?, w));
            }
            distenum::Graph::from_weighted_edge_list(n, &list, directed)
                .map(Self::wrap)
                .map_err(graph_err)
        } else {
            let mut list = Vec::with_capacity(edges.len());
            for e in &edges {
                let [u, v] = e[..] else { return Err(bad()) };
                list.push((vertex(u)?, vertex(v)?));
            }
            distenum::Graph::from_edge_list(n, &list, directed)
                .map(Self::wrap)
                .map_err(graph_err)
        }
    }

    /// Parses the text format written by `to_text`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        distenum::Graph::parse(text)
            .map(Self::wrap)
            .map_err(graph_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    #[getter]
    fn weighted(&self) -> bool {
        self.inner.is_weighted()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.degree(v))
    }

    /// `(max_degree, average_degree)`.
    fn degree_stats(&self) -> (usize, f64) {
        let s = self.inner.degree_stats();
        (s.max_degree, s.avg_degree())
    }

    fn __repr__(&self) -> String {
        let py_bool = |b: bool| if b { "True" } else { "False" };
        format!(
            "Graph(n={}, m={}, directed={}, weighted={})",
            self.inner.n(),
            self.inner.m(),
            py_bool(self.inner.is_directed()),
            py_bool(self.inner.is_weighted())
        )
    }
}

/// Resumable stream of `(source, target, distance)` triples.
#[pyclass(module = "pydistenum")]
pub struct Enumerator {
    inner: Mutex<distenum::Enumerator>,
}

impl Enumerator {
    fn with<R>(&self, f: impl FnOnce(&mut distenum::Enumerator) -> R) -> R {
        let mut guard = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        f(&mut guard)
    }
}

#[pymethods]
impl Enumerator {
    fn __iter__(slf: PyRef<'_, Self>) -> PyRef<'_, Self> {
        slf
    }

    fn __next__(&self) -> PyResult<Option<Triple>> {
        self.pull()
    }

    /// Next triple, or `None` once exhausted.
    fn pull(&self) -> PyResult<Option<Triple>> {
        self.with(|e| e.pull().map(|t| t.map(triple)).map_err(enum_err))
    }

    /// `(steps, declared_bound, phase)` of the most recent pull.
    fn last_pull(&self) -> (u64, u64, &'static str) {
        self.with(|e| {
            let p = e.last_pull();
            (p.steps, p.declared_bound, p.phase)
        })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.with(|e| e.variant())
    }

    #[getter]
    fn total_steps(&self) -> u64 {
        self.with(|e| e.total_steps())
    }

    #[getter]
    fn preprocessing_steps(&self) -> u64 {
        self.with(|e| e.preprocessing_steps())
    }

    #[getter]
    fn bound_violations(&self) -> u64 {
        self.with(|e| e.bound_violations())
    }

    /// Drains the remaining stream; returns the triples and a delay report.
    fn run_metered<'py>(&self, py: Python<'py>) -> PyResult<(Vec<Triple>, Bound<'py, PyDict>)> {
        let (out, report) = self.with(run_metered).map_err(enum_err)?;
        Ok((
            out.into_iter().map(triple).collect(),
            report_dict(py, &report)?,
        ))
    }
}

fn report_dict<'py>(py: Python<'py>, r: &DelayReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("variant", &r.variant)?;
    d.set_item("pulls", r.pulls)?;
    d.set_item("outputs", r.outputs)?;
    d.set_item("max_delay", r.max_delay)?;
    d.set_item("total_delay_steps", r.total_delay_steps)?;
    d.set_item("mean_delay", r.mean_delay)?;
    d.set_item("per_phase_max", r.per_phase_max.clone())?;
    d.set_item("declared_bound_value", r.declared_bound_value)?;
    d.set_item("bound_violations", r.bound_violations)?;
    d.set_item("bound_base", r.bound_base)?;
    d.set_item("fitted_constant", r.fitted_constant)?;
    d.set_item("preprocessing_steps", r.preprocessing_steps)?;
    d.set_item("peak_queue", r.peak_queue)?;
    d.set_item("lazy_cells_allocated", r.lazy_cells_allocated)?;
    d.set_item("n", r.n)?;
    d.set_item("m", r.m)?;
    Ok(d)
}

/// Opens an enumeration. `source` selects single-source output.
#[pyfunction]
#[pyo3(signature = (graph, *, row_wise = false, no_self = false, reachable = false, sorted = false, source = None, dedup = false))]
fn enumerate(
    graph: &Graph,
    row_wise: bool,
    no_self: bool,
    reachable: bool,
    sorted: bool,
    source: Option<usize>,
    dedup: bool,
) -> PyResult<Enumerator> {
    let mut e = distenum::enumerate(
        &graph.inner,
        mode(row_wise, no_self, reachable, sorted),
        source,
    )
    .map_err(enum_err)?;
    if dedup {
        if source.is_some() {
            return Err(PyValueError::new_err(
                "dedup applies to all-pairs enumeration only",
            ));
        }
        e = e.dedup_undirected().map_err(enum_err)?;
    }
    Ok(Enumerator {
        inner: Mutex::new(e),
    })
}

/// Every valid mode combination as keyword dictionaries for `enumerate`.
#[pyfunction]
fn all_modes(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    OutputMode::all_valid()
        .into_iter()
        .map(|m| {
            let d = PyDict::new(py);
            d.set_item("row_wise", m.row_wise)?;
            d.set_item("no_self", m.no_self)?;
            d.set_item("reachable", m.reachable_only)?;
            d.set_item("sorted", m.sorted)?;
            Ok(d)
        })
        .collect()
}

/// All-pairs distances by repeated single-source search.
#[pyfunction]
fn distance_matrix(graph: &Graph) -> Vec<Vec<Dist>> {
    let m = brute_force_matrix(&graph.inner);
    (0..m.n())
        .map(|u| m.row(u).iter().map(|&d| d.into()).collect())
        .collect()
}

/// Checks a stream against the oracle; returns `None` or a description of
/// the first violation.
#[pyfunction]
#[pyo3(signature = (graph, triples, *, row_wise = false, no_self = false, reachable = false, sorted = false, source = None, dedup = false))]
#[allow(clippy::too_many_arguments)]
fn validate(
    graph: &Graph,
    triples: Vec<Triple>,
    row_wise: bool,
    no_self: bool,
    reachable: bool,
    sorted: bool,
    source: Option<usize>,
    dedup: bool,
) -> Option<String> {
    let triples: Vec<DistanceTriple> = triples
        .into_iter()
        .map(|(u, v, d)| DistanceTriple::new(u, v, d.into()))
        .collect();
    let matrix = brute_force_matrix(&graph.inner);
    let mode = mode(row_wise, no_self, reachable, sorted);
    let verdict = match source {
        Some(s) => validate_single_source(&triples, &matrix, s, mode),
        None => validate_stream(&triples, &matrix, mode, dedup),
    };
    verdict.err().map(|v| v.to_string())
}

fn bool_matrix(rows: Vec<Vec<bool>>) -> PyResult<distenum::BoolMatrix> {
    distenum::BoolMatrix::from_rows(rows).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn rows(m: &distenum::BoolMatrix) -> Vec<Vec<bool>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
        .collect()
}

/// Boolean product computed through reachable enumeration.
#[pyfunction]
fn bmm_multiply(a: Vec<Vec<bool>>, b: Vec<Vec<bool>>) -> PyResult<Vec<Vec<bool>>> {
    let p = distenum::bmm_multiply(&bool_matrix(a)?, &bool_matrix(b)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(rows(&p))
}

/// Direct boolean product.
#[pyfunction]
fn bool_product(a: Vec<Vec<bool>>, b: Vec<Vec<bool>>) -> PyResult<Vec<Vec<bool>>> {
    let p = distenum::bool_product(&bool_matrix(a)?, &bool_matrix(b)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(rows(&p))
}

#[pyfunction]
fn clique_path(k: usize) -> PyResult<Graph> {
    distenum::gen_clique_path(k)
        .map(Graph::wrap)
        .map_err(graph_err)
}

#[pyfunction]
fn star(n: usize, weights: Vec<i64>) -> PyResult<Graph> {
    distenum::gen_star(n, &weights)
        .map(Graph::wrap)
        .map_err(graph_err)
}

#[pyfunction]
fn isolated_plus_edge(n: usize) -> PyResult<Graph> {
    distenum::gen_isolated_plus_edge(n)
        .map(Graph::wrap)
        .map_err(graph_err)
}

#[pyfunction]
fn bmm_graph(a: Vec<Vec<bool>>, b: Vec<Vec<bool>>) -> PyResult<Graph> {
    distenum::gen_bmm_graph(&bool_matrix(a)?, &bool_matrix(b)?)
        .map(Graph::wrap)
        .map_err(graph_err)
}

/// Seeded random simple graph; `max_weight = 0` gives an unweighted graph.
#[pyfunction]
#[pyo3(signature = (n, m, *, directed = false, max_weight = 0, seed = 0))]
fn random_graph(n: usize, m: usize, directed: bool, max_weight: u64, seed: u64) -> PyResult<Graph> {
    distenum::gen_random(n, m, directed, max_weight, seed)
        .map(Graph::wrap)
        .map_err(graph_err)
}

#[pymodule]
pub fn pydistenum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Enumerator>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(all_modes, m)?)?;
    m.add_function(wrap_pyfunction!(distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(bmm_multiply, m)?)?;
    m.add_function(wrap_pyfunction!(bool_product, m)?)?;
    m.add_function(wrap_pyfunction!(clique_path, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(isolated_plus_edge, m)?)?;
    m.add_function(wrap_pyfunction!(bmm_graph, m)?)?;
    m.add_function(wrap_pyfunction!(random_graph, m)?)?;
    Ok(())
}
