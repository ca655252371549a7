//! Python bindings for the ontology scorer, crawler, graph and search.
//!
//! Weights and scores cross the boundary as integer milli-units, the same
//! fixed-point values the Rust side computes with.

use std::fmt::Display;
use std::path::PathBuf;

use ontocrawl_core::compare::run_comparison;
use ontocrawl_core::graph::rebuild_from_repository;
use ontocrawl_core::html::{extract_links as links_of, extract_text as text_of};
use ontocrawl_core::ontology::{format_milli as fmt_milli, parse_milli as parse};
use ontocrawl_core::relevance::{classify_domains, score_naive, PageText, RelevanceLimits, RelevanceVector};
use ontocrawl_core::urlnorm::{normalize_url as norm_url, parse_absolute};
use ontocrawl_core::{crawl_to_dir, AppConfig, DomainGraph, OntologySet, Scorer, SearchIndex, SearchRequest, Semantics};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ontocrawl, OntocrawlError, PyException);

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl Display) -> PyErr {
    OntocrawlError::new_err(e.to_string())
}

/// Hands a serializable value to Python as plain dicts and lists.
fn to_python<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (json,))
}

#[derive(FromPyObject)]
enum Html {
    Text(String),
    Bytes(Vec<u8>),
}

impl Html {
    fn bytes(&self) -> &[u8] {
        match self {
            Html::Text(s) => s.as_bytes(),
            Html::Bytes(b) => b,
        }
    }
}

fn block_on<F: std::future::Future>(f: F) -> PyResult<F::Output> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(runtime_err)?;
    Ok(rt.block_on(f))
}

/// A loaded set of domain ontologies.
#[pyclass(name = "Ontologies", module = "ontocrawl", frozen)]
struct PyOntologies {
    scorer: Scorer,
}

#[pymethods]
impl PyOntologies {
    #[staticmethod]
    fn load(manifest: PathBuf) -> PyResult<Self> {
        let set = OntologySet::load_manifest(&manifest).map_err(value_err)?;
        Ok(PyOntologies { scorer: Scorer::new(set) })
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.scorer.set().names()
    }

    fn __len__(&self) -> usize {
        self.scorer.set().len()
    }

    /// `{domain name: milli score}` for an HTML document.
    fn score_html<'py>(&self, py: Python<'py>, html: Html) -> PyResult<Bound<'py, PyDict>> {
        let scores = self.scorer.score(&text_of(html.bytes(), ""));
        let out = PyDict::new(py);
        for (name, score) in self.names().into_iter().zip(scores.scores()) {
            out.set_item(name, score)?;
        }
        Ok(out)
    }

    /// Partitioned scores for an already tokenized page.
    fn score_tokens(&self, tokens: Vec<String>) -> Vec<u64> {
        self.scorer.score(&PageText::new("", tokens)).scores().to_vec()
    }

    /// The straightforward per-domain scorer, for cross-checking.
    fn score_tokens_naive(&self, tokens: Vec<String>) -> Vec<u64> {
        score_naive(&PageText::new("", tokens), self.scorer.set()).scores().to_vec()
    }

    /// Term classes as `(domain indices, terms)`, widest class first.
    fn partition(&self) -> Vec<(Vec<usize>, Vec<String>)> {
        self.scorer
            .partition()
            .classes()
            .map(|(set, terms)| (set.iter().collect(), terms.iter().map(|t| t.as_str().to_owned()).collect()))
            .collect()
    }

    fn restrict_to(&self, domain: usize) -> PyResult<Self> {
        if domain >= self.scorer.set().len() {
            return Err(value_err(format!("no domain {domain}")));
        }
        Ok(PyOntologies {
            scorer: Scorer::new(self.scorer.set().restrict_to(domain)),
        })
    }

    fn __repr__(&self) -> String {
        format!("Ontologies({})", self.names().join(", "))
    }
}

/// Domains whose score strictly exceeds its limit.
#[pyfunction]
fn classify(scores: Vec<u64>, limits: Vec<u64>) -> PyResult<Vec<usize>> {
    let limits = RelevanceLimits::new(limits).map_err(value_err)?;
    let set = classify_domains(&RelevanceVector::from_milli(scores), &limits).map_err(value_err)?;
    Ok(set.iter().collect())
}

/// A search snapshot loaded from a crawl output directory.
#[pyclass(name = "SearchIndex", module = "ontocrawl", frozen)]
struct PySearchIndex {
    index: SearchIndex,
}

#[pymethods]
impl PySearchIndex {
    #[staticmethod]
    fn load(output_dir: PathBuf) -> PyResult<Self> {
        let index = SearchIndex::load_dir(&output_dir).map_err(runtime_err)?;
        Ok(PySearchIndex { index })
    }

    #[getter]
    fn domain_names(&self) -> Vec<String> {
        self.index.domain_names().to_vec()
    }

    #[pyo3(signature = (query, domains, semantics = "intersect", limit = ontocrawl_core::search::DEFAULT_LIMIT))]
    fn search<'py>(
        &self,
        py: Python<'py>,
        query: String,
        domains: Vec<String>,
        semantics: &str,
        limit: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let semantics: Semantics = semantics.parse().map_err(value_err)?;
        let req = SearchRequest {
            query,
            domains,
            semantics,
            limit,
        };
        let resp = self.index.search(&req).map_err(value_err)?;
        to_python(py, &resp)
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.index.graph().stats())
    }
}

fn load_config(path: PathBuf) -> PyResult<AppConfig> {
    AppConfig::load(&path).map_err(value_err)
}

/// Runs the crawl described by a config file and returns its report.
#[pyfunction]
fn crawl<'py>(py: Python<'py>, config: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let outcome = py
        .detach(|| block_on(crawl_to_dir(&cfg.crawl, &cfg.ontologies, &cfg.layout)))?
        .map_err(runtime_err)?;
    let report = to_python(py, &outcome.report)?;
    report.set_item("elapsed_ms", outcome.elapsed.as_secs_f64() * 1000.0)?;
    Ok(report)
}

/// Rebuilds and saves the graph for a config's repository; returns its stats.
#[pyfunction]
fn build_graph<'py>(py: Python<'py>, config: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let graph: DomainGraph = rebuild_from_repository(&cfg.layout.pages(), &cfg.crawl.limits).map_err(runtime_err)?;
    graph.save(&cfg.layout.graph(), &cfg.ontologies.names()).map_err(runtime_err)?;
    to_python(py, &graph.stats())
}

/// Single-domain versus multi-domain crawl comparison.
#[pyfunction]
fn compare<'py>(py: Python<'py>, config: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = load_config(config)?;
    let report = py
        .detach(|| block_on(run_comparison(&cfg.crawl, &cfg.ontologies)))?
        .map_err(runtime_err)?;
    to_python(py, &report)
}

#[pyfunction]
fn normalize_term(raw: &str) -> PyResult<String> {
    ontocrawl_core::normalize_term(raw).map(|t| t.as_str().to_owned()).map_err(value_err)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    ontocrawl_core::text::tokenize(text)
}

#[pyfunction]
fn extract_text(html: Html) -> Vec<String> {
    text_of(html.bytes(), "").tokens
}

#[pyfunction]
fn normalize_url(raw: &str, base: &str) -> PyResult<String> {
    let base = parse_absolute(base).map_err(value_err)?;
    norm_url(raw, &base).map(String::from).map_err(value_err)
}

#[pyfunction]
fn extract_links(html: Html, base: &str) -> PyResult<Vec<String>> {
    let base = parse_absolute(base).map_err(value_err)?;
    Ok(links_of(html.bytes(), &base).into_iter().map(String::from).collect())
}

#[pyfunction]
fn format_milli(milli: u64) -> String {
    fmt_milli(milli)
}

#[pyfunction]
fn parse_milli(raw: &str) -> Option<u64> {
    parse(raw)
}

#[pymodule]
fn ontocrawl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OntocrawlError", m.py().get_type::<OntocrawlError>())?;
    m.add_class::<PyOntologies>()?;
    m.add_class::<PySearchIndex>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(crawl, m)?)?;
    m.add_function(wrap_pyfunction!(build_graph, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_term, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(extract_text, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_url, m)?)?;
    m.add_function(wrap_pyfunction!(extract_links, m)?)?;
    m.add_function(wrap_pyfunction!(format_milli, m)?)?;
    m.add_function(wrap_pyfunction!(parse_milli, m)?)?;
    Ok(())
}
