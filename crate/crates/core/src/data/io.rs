use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::numeric::Matrix;

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    field: &str,
    what: &str,
) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} `{field}`")))
}

/// Edge list: one `u v` pair of node ids per line.
pub fn load_edges(path: &Path) -> Result<Vec<(NodeId, NodeId)>> {
    let text = read(path)?;
    let mut edges = Vec::new();
    for (line, content) in content_lines(&text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 2 node ids, found {}", fields.len()),
            ));
        }
        let u = parse_field(path, line, fields[0], "node id")?;
        let v = parse_field(path, line, fields[1], "node id")?;
        edges.push((u, v));
    }
    Ok(edges)
}

/// Loads an edge file as an undirected graph over `num_nodes` nodes.
pub fn load_graph(path: &Path, num_nodes: usize) -> Result<Graph> {
    let edges = load_edges(path)?;
    Graph::from_edges(num_nodes, &edges).map_err(|e| match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_edges(path: &Path, graph: &Graph) -> Result<()> {
    let mut out = String::new();
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    write_atomic(path, out.as_bytes())
}

/// Matrix file: a `rows cols` header, then one whitespace-separated row per
/// line. Row index is the node id.
pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let text = read(path)?;
    let mut lines = content_lines(&text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `rows cols` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(path, hline, "header must be `rows cols`"));
    }
    let rows: usize = parse_field(path, hline, dims[0], "row count")?;
    let cols: usize = parse_field(path, hline, dims[1], "column count")?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    let mut last_line = hline;
    for (line, content) in lines {
        if seen == rows {
            return Err(Error::parse(
                path,
                line,
                format!("more than the {rows} rows declared in the header"),
            ));
        }
        let before = data.len();
        for field in content.split_whitespace() {
            let x: f64 = parse_field(path, line, field, "number")?;
            if !x.is_finite() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("non-finite value `{field}`"),
                ));
            }
            data.push(x);
        }
        if data.len() - before != cols {
            return Err(Error::parse(
                path,
                line,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
        seen += 1;
        last_line = line;
    }
    if seen != rows {
        return Err(Error::parse(
            path,
            last_line,
            format!("file is truncated: header declares {rows} rows, found {seen}"),
        ));
    }
    Matrix::new(rows, cols, data)
}

/// Loads a feature matrix and checks it covers exactly `num_nodes` nodes.
pub fn load_features(path: &Path, num_nodes: Option<usize>) -> Result<Matrix> {
    let m = load_matrix(path)?;
    if let Some(n) = num_nodes {
        if m.rows() != n {
            return Err(Error::Input(format!(
                "{}: {} feature rows but the graph has {n} nodes",
                path.display(),
                m.rows()
            )));
        }
    }
    Ok(m)
}

/// Writes values with 17 significant digits, which parse back exactly.
pub fn save_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = String::with_capacity(m.rows() * m.cols() * 24 + 16);
    writeln!(out, "{} {}", m.rows(), m.cols()).unwrap();
    for row in m.row_iter() {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{x:.16e}").unwrap();
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLabel {
    pub community: usize,
    pub is_bridge: bool,
}

/// Labels file: `node_id community_id is_bridge(0|1)` per line, ids dense.
pub fn load_labels(path: &Path) -> Result<Vec<NodeLabel>> {
    let text = read(path)?;
    let mut labels = Vec::new();
    for (line, content) in content_lines(&text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                "expected `node_id community_id is_bridge`",
            ));
        }
        let id: usize = parse_field(path, line, fields[0], "node id")?;
        if id != labels.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected node id {}, found {id}", labels.len()),
            ));
        }
        let community = parse_field(path, line, fields[1], "community id")?;
        let is_bridge = match fields[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("bridge flag must be 0 or 1, got `{other}`"),
                ))
            }
        };
        labels.push(NodeLabel {
            community,
            is_bridge,
        });
    }
    Ok(labels)
}

pub fn save_labels(path: &Path, labels: &[NodeLabel]) -> Result<()> {
    let mut out = String::new();
    for (id, l) in labels.iter().enumerate() {
        writeln!(out, "{id} {} {}", l.community, u8::from(l.is_bridge)).unwrap();
    }
    write_atomic(path, out.as_bytes())
}
