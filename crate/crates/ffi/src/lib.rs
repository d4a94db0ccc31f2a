//! C ABI over the `combsage` crate.
//!
//! Graphs and matrices cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every fallible function
//! returns a [`CombsageStatus`]; on failure a message for the calling thread
//! is available from [`combsage_last_error_message`]. Panics never unwind
//! into the caller.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use combsage::data::{generate_synthetic, load_graph, load_matrix, save_matrix, SynthConfig};
use combsage::eval::{compute_metrics, embed, run_evaluation, EvalConfig, Method, MethodSettings};
use combsage::graph::Graph;
use combsage::numeric::Matrix;
use combsage::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombsageStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Input = 3,
    Precondition = 4,
    Shape = 5,
    Parse = 6,
    Config = 7,
    Numeric = 8,
    Io = 9,
    Json = 10,
    Panic = 11,
}

/// Undirected graph handle.
pub struct CombsageGraph(Graph);

/// Row-major matrix handle (features or embeddings).
pub struct CombsageMatrix(Matrix);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CombsageMetrics {
    pub auc_roc: f64,
    pub auprc: f64,
    pub average_precision: f64,
    pub macro_f1: f64,
    pub balanced_accuracy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CombsageStatus {
    match e {
        Error::Input(_) => CombsageStatus::Input,
        Error::Precondition(_) => CombsageStatus::Precondition,
        Error::Shape(_) => CombsageStatus::Shape,
        Error::Parse { .. } => CombsageStatus::Parse,
        Error::Config(_) => CombsageStatus::Config,
        Error::Numeric(_) => CombsageStatus::Numeric,
        Error::Io { .. } => CombsageStatus::Io,
        Error::Json(_) => CombsageStatus::Json,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CombsageStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CombsageStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} must not be null"));
            CombsageStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(what))) => {
            set_error(format!("{what} is not valid UTF-8"));
            CombsageStatus::InvalidUtf8
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            CombsageStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn optional_json<T: serde::de::DeserializeOwned + Default>(
    p: *const c_char,
    what: &'static str,
) -> Result<T, Failure> {
    if p.is_null() {
        return Ok(T::default());
    }
    let text = string(p, what)?;
    serde_json::from_str(text).map_err(|e| Failure::Core(Error::Config(format!("{what}: {e}"))))
}

/// Message describing the last failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn combsage_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn combsage_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from `num_edges` pairs stored flat in `edges`
/// (`u0, v0, u1, v1, ...`). Duplicates and self-loops are dropped.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_new(
    num_nodes: usize,
    edges: *const usize,
    num_edges: usize,
    out: *mut *mut CombsageGraph,
) -> CombsageStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = num_edges
            .checked_mul(2)
            .ok_or(Failure::Core(Error::Input("edge count overflows".into())))?;
        let flat = slice(edges, len, "edges")?;
        let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let g = Graph::from_edges(num_nodes, &pairs)?;
        *out = Box::into_raw(Box::new(CombsageGraph(g)));
        Ok(())
    })
}

/// Reads an edge-list file for a graph with `num_nodes` nodes.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_load(
    path: *const c_char,
    num_nodes: usize,
    out: *mut *mut CombsageGraph,
) -> CombsageStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = load_graph(Path::new(string(path, "path")?), num_nodes)?;
        *out = Box::into_raw(Box::new(CombsageGraph(g)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn combsage_graph_free(graph: *mut CombsageGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Node count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_num_nodes(graph: *const CombsageGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_nodes())
}

/// Undirected edge count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_num_edges(graph: *const CombsageGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_edges())
}

/// Sorted neighbours of `v`, borrowed from the graph: valid until the graph
/// is freed.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_neighbors(
    graph: *const CombsageGraph,
    v: usize,
    out_neighbors: *mut *const usize,
    out_len: *mut usize,
) -> CombsageStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let out_neighbors = out_ptr(out_neighbors, "out_neighbors")?;
        let out_len = out_ptr(out_len, "out_len")?;
        if v >= g.num_nodes() {
            return Err(Error::Input(format!("node {v} outside 0..{}", g.num_nodes())).into());
        }
        let n = g.neighbors(v);
        *out_neighbors = n.as_ptr();
        *out_len = n.len();
        Ok(())
    })
}

/// Connected components of the subgraph induced by `subset` (all neighbours
/// of `v`). Writes, for each `subset[i]`, the index of its component to
/// `out_labels[i]` and the number of components to `out_count`. Components
/// are numbered in order of their smallest node id.
#[no_mangle]
pub unsafe extern "C" fn combsage_graph_components(
    graph: *const CombsageGraph,
    v: usize,
    subset: *const usize,
    len: usize,
    out_labels: *mut usize,
    out_count: *mut usize,
) -> CombsageStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let subset = slice(subset, len, "subset")?;
        let out_count = out_ptr(out_count, "out_count")?;
        if len > 0 && out_labels.is_null() {
            return Err(Failure::Null("out_labels"));
        }
        let comps = g.neighborhood_components(v, subset)?;
        let labels: Vec<usize> = subset
            .iter()
            .map(|u| {
                comps
                    .components()
                    .iter()
                    .position(|c| c.binary_search(u).is_ok())
                    .expect("every subset member lies in a component")
            })
            .collect();
        if len > 0 {
            std::slice::from_raw_parts_mut(out_labels, len).copy_from_slice(&labels);
        }
        *out_count = comps.len();
        Ok(())
    })
}

/// Copies `rows * cols` row-major values into a new matrix.
#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut CombsageMatrix,
) -> CombsageStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or(Failure::Core(Error::Shape("matrix size overflows".into())))?;
        let values = slice(data, len, "data")?;
        let m = Matrix::new(rows, cols, values.to_vec())?;
        *out = Box::into_raw(Box::new(CombsageMatrix(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_load(
    path: *const c_char,
    out: *mut *mut CombsageMatrix,
) -> CombsageStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = load_matrix(Path::new(string(path, "path")?))?;
        *out = Box::into_raw(Box::new(CombsageMatrix(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_save(
    matrix: *const CombsageMatrix,
    path: *const c_char,
) -> CombsageStatus {
    guard(|| {
        let m = &borrow(matrix, "matrix")?.0;
        save_matrix(Path::new(string(path, "path")?), m)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_free(matrix: *mut CombsageMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_rows(matrix: *const CombsageMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.rows())
}

#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_cols(matrix: *const CombsageMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.cols())
}

/// Row-major values borrowed from the matrix, or null for a null handle.
#[no_mangle]
pub unsafe extern "C" fn combsage_matrix_data(matrix: *const CombsageMatrix) -> *const f64 {
    matrix.as_ref().map_or(ptr::null(), |m| m.0.data().as_ptr())
}

/// Generates a synthetic community graph and its features. `config_json`
/// holds generator settings (null for defaults); randomness comes from
/// `seed`.
#[no_mangle]
pub unsafe extern "C" fn combsage_generate_synthetic(
    config_json: *const c_char,
    seed: u64,
    out_graph: *mut *mut CombsageGraph,
    out_features: *mut *mut CombsageMatrix,
) -> CombsageStatus {
    guard(|| {
        let out_graph = out_ptr(out_graph, "out_graph")?;
        let out_features = out_ptr(out_features, "out_features")?;
        let cfg: SynthConfig = optional_json(config_json, "config_json")?;
        let data = generate_synthetic(&SynthConfig { seed, ..cfg })?;
        *out_graph = Box::into_raw(Box::new(CombsageGraph(data.graph)));
        *out_features = Box::into_raw(Box::new(CombsageMatrix(data.features)));
        Ok(())
    })
}

/// Embeds every node with `method` (`deepwalk`, `features_only`,
/// `graphsage_mean`, `graphsage_lstm` or `combsage`). `settings_json` holds
/// `gnn`/`deepwalk` hyperparameters (null for defaults).
#[no_mangle]
pub unsafe extern "C" fn combsage_embed(
    graph: *const CombsageGraph,
    features: *const CombsageMatrix,
    method: *const c_char,
    settings_json: *const c_char,
    seed: u64,
    out: *mut *mut CombsageMatrix,
) -> CombsageStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let x = &borrow(features, "features")?.0;
        let out = out_ptr(out, "out")?;
        let method: Method = string(method, "method")?.parse()?;
        let settings: MethodSettings = optional_json(settings_json, "settings_json")?;
        settings.validate()?;
        let z = embed(method, g, x, &settings, seed)?;
        *out = Box::into_raw(Box::new(CombsageMatrix(z)));
        Ok(())
    })
}

/// Link-prediction metrics for `n` scores; `labels[i]` is nonzero for a
/// positive example.
#[no_mangle]
pub unsafe extern "C" fn combsage_compute_metrics(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut CombsageMetrics,
) -> CombsageStatus {
    guard(|| {
        let scores = slice(scores, n, "scores")?;
        let labels: Vec<bool> = slice(labels, n, "labels")?
            .iter()
            .map(|&l| l != 0)
            .collect();
        let out = out_ptr(out, "out")?;
        let m = compute_metrics(scores, &labels)?;
        *out = CombsageMetrics {
            auc_roc: m.auc_roc,
            auprc: m.auprc,
            average_precision: m.average_precision,
            macro_f1: m.macro_f1,
            balanced_accuracy: m.balanced_accuracy,
        };
        Ok(())
    })
}

/// Runs the repeated split/classify evaluation for a comma-separated list
/// of methods and returns the report as a JSON string, to be released with
/// [`combsage_string_free`]. Null `settings_json`/`eval_json` use defaults.
#[no_mangle]
pub unsafe extern "C" fn combsage_evaluate(
    graph: *const CombsageGraph,
    features: *const CombsageMatrix,
    methods: *const c_char,
    settings_json: *const c_char,
    eval_json: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> CombsageStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let x = &borrow(features, "features")?.0;
        let out_json = out_ptr(out_json, "out_json")?;
        let methods = string(methods, "methods")?
            .split(',')
            .map(|m| m.trim().parse())
            .collect::<Result<Vec<Method>, Error>>()?;
        let settings: MethodSettings = optional_json(settings_json, "settings_json")?;
        let eval: EvalConfig = optional_json(eval_json, "eval_json")?;
        let report = run_evaluation(g, x, &methods, &settings, &eval, seed)?;
        let text = serde_json::to_string(&report).map_err(Error::from)?;
        *out_json = CString::new(text)
            .expect("JSON has no NUL bytes")
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn combsage_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
