use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{KgxError, Triple};
use crate::text::{collapse_whitespace, normalize_key};

/// Undirected edge between two node indices, with the relation text kept for
/// serialization. Serializes as `[head, tail, relation]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize, pub String);

/// Per-document knowledge graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentGraph {
    pub doc_id: String,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

impl DocumentGraph {
    pub fn empty(doc_id: impl Into<String>) -> Self {
        DocumentGraph {
            doc_id: doc_id.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Graphs without edges are kept on disk but skipped by training.
    pub fn is_flagged_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Index pairs of every edge, ignoring direction and relation.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|e| (e.0, e.1))
    }

    /// Triples that reassemble into this exact graph: one self-loop marker
    /// per node in node order (fixing first-appearance order, dropped as an
    /// edge), then every edge in order.
    pub fn to_triples(&self) -> Vec<Triple> {
        let markers = self.nodes.iter().map(|n| Triple::new(n.clone(), "", n.clone()));
        let edges = self
            .edges
            .iter()
            .map(|Edge(h, t, r)| Triple::new(self.nodes[*h].clone(), r.clone(), self.nodes[*t].clone()));
        markers.chain(edges).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(normalize_key(n)) {
                return Err(format!("duplicate node label {n:?}"));
            }
        }
        for Edge(h, t, _) in &self.edges {
            if *h >= self.nodes.len() || *t >= self.nodes.len() {
                return Err(format!("edge ({h}, {t}) out of range"));
            }
            if h == t {
                return Err(format!("self-loop on node {h}"));
            }
        }
        Ok(())
    }
}

/// Merge per-chunk triples into one graph.
///
/// Nodes are identified by case-folded, whitespace-collapsed label and keep
/// the first spelling seen. Repeated `(head, relation, tail)` edges collapse
/// to one; self-loops contribute their node but no edge.
pub fn assemble_graph(doc_id: &str, chunk_triples: &[Vec<Triple>]) -> DocumentGraph {
    let mut graph = DocumentGraph::empty(doc_id);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edge_keys: HashSet<(usize, String, usize)> = HashSet::new();
    let mut node_id = |label: &str, graph: &mut DocumentGraph| -> Option<usize> {
        let clean = collapse_whitespace(label);
        if clean.is_empty() {
            return None;
        }
        let key = clean.to_lowercase();
        Some(*index.entry(key).or_insert_with(|| {
            graph.nodes.push(clean);
            graph.nodes.len() - 1
        }))
    };
    for triple in chunk_triples.iter().flatten() {
        let Some(h) = node_id(&triple.head, &mut graph) else { continue };
        let Some(t) = node_id(&triple.tail, &mut graph) else { continue };
        if h == t {
            continue;
        }
        let relation = collapse_whitespace(&triple.relation);
        if edge_keys.insert((h, relation.to_lowercase(), t)) {
            graph.edges.push(Edge(h, t, relation));
        }
    }
    graph
}

/// Read a `graphs.jsonl` store.
pub fn read_graphs(path: &Path) -> Result<Vec<DocumentGraph>, KgxError> {
    let io_err = |source| KgxError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(fs::File::open(path).map_err(io_err)?);
    let mut graphs = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record_err = |detail: String| KgxError::GraphRecord {
            path: path.to_path_buf(),
            line: i + 1,
            detail,
        };
        let g: DocumentGraph = serde_json::from_str(&line).map_err(|e| record_err(e.to_string()))?;
        g.validate().map_err(record_err)?;
        if !ids.insert(g.doc_id.clone()) {
            return Err(record_err(format!("duplicate doc_id {:?}", g.doc_id)));
        }
        graphs.push(g);
    }
    Ok(graphs)
}

/// Append graph records to a `graphs.jsonl` store, creating it if needed.
pub fn append_graphs(path: &Path, graphs: &[DocumentGraph]) -> Result<(), KgxError> {
    let io_err = |source| KgxError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = String::new();
    for g in graphs {
        buf.push_str(&serde_json::to_string(g).expect("graphs always serialize"));
        buf.push('\n');
    }
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    file.write_all(buf.as_bytes()).map_err(io_err)?;
    file.flush().map_err(io_err)
}
