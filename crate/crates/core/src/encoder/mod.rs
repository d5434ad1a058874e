//! Three-layer graph-convolutional encoder with mean pooling.
//!
//! Propagation uses the symmetric normalized adjacency with self-loops,
//! `Â = D̃^{-1/2} (A + I) D̃^{-1/2}`:
//!
//! ```text
//! H1 = relu(Â X W1 + b1)
//! H2 = relu(Â H1 W2 + b2)
//! H3 = Â H2 W3 + b3
//! e  = mean over rows of H3
//! ```
//!
//! The last layer is linear so embeddings can take either sign. Gradients
//! are derived by hand; `relu'(0)` is taken as 0.

mod weights;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::kgx::DocumentGraph;

pub use weights::{init_weights, EncoderWeights, TensorRecord, TENSOR_NAMES};

#[derive(Debug, thiserror::Error)]
pub enum EncoderError {
    #[error("invalid encoder config: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("forward cache does not match these weights: {0}")]
    StaleCache(String),
    #[error("graph {0:?} has no nodes")]
    EmptyGraph(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub in_dim: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub seed: u64,
    /// Not supported; must stay 0.
    pub dropout: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            in_dim: 384,
            hidden_dim: 500,
            out_dim: 100,
            seed: 0,
            dropout: 0.0,
        }
    }
}

impl EncoderConfig {
    pub fn new(in_dim: usize, hidden_dim: usize, out_dim: usize, seed: u64) -> Self {
        EncoderConfig {
            in_dim,
            hidden_dim,
            out_dim,
            seed,
            dropout: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.in_dim == 0 || self.hidden_dim == 0 || self.out_dim == 0 {
            return Err(EncoderError::Config("all dimensions must be at least 1".into()));
        }
        if self.dropout != 0.0 {
            return Err(EncoderError::Config("dropout is not supported; set it to 0".into()));
        }
        Ok(())
    }
}

/// Pooled graph-level output.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding(pub Array1<f64>);

impl GraphEmbedding {
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("contiguous")
    }
}

/// `D̃^{-1/2}(A + I)D̃^{-1/2}` for the undirected 0/1 adjacency of a graph.
pub fn normalize_adjacency(graph: &DocumentGraph) -> Array2<f64> {
    normalize_edges(graph.node_count(), graph.undirected_edges())
}

/// Same as [`normalize_adjacency`] from a node count and edge list. Repeated
/// edges and either direction count once; self-pairs are ignored.
pub fn normalize_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Array2<f64> {
    let mut a = Array2::<f64>::eye(n);
    for (i, j) in edges {
        if i != j {
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
    }
    let degree: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    for ((i, j), v) in a.indexed_iter_mut() {
        if *v != 0.0 {
            *v /= (degree[i] * degree[j]).sqrt();
        }
    }
    a
}

/// Intermediates from [`forward`] needed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    adj: Array2<f64>,
    /// Â X
    ax: Array2<f64>,
    /// pre-activation of layer 1
    z1: Array2<f64>,
    /// Â H1
    ah1: Array2<f64>,
    z2: Array2<f64>,
    /// Â H2
    ah2: Array2<f64>,
}

impl ForwardCache {
    pub fn node_count(&self) -> usize {
        self.adj.nrows()
    }
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| if v > 0.0 { v } else { 0.0 })
}

fn check_inputs(weights: &EncoderWeights, adj: &Array2<f64>, x: &Array2<f64>) -> Result<(), EncoderError> {
    let n = adj.nrows();
    if n == 0 {
        return Err(EncoderError::Dimension("graph has no nodes".into()));
    }
    if adj.ncols() != n {
        return Err(EncoderError::Dimension(format!("adjacency is {}x{}", n, adj.ncols())));
    }
    if x.nrows() != n {
        return Err(EncoderError::Dimension(format!("{} feature rows for {} nodes", x.nrows(), n)));
    }
    if x.ncols() != weights.w1.nrows() {
        return Err(EncoderError::Dimension(format!(
            "feature dimension {} but encoder expects {}",
            x.ncols(),
            weights.w1.nrows()
        )));
    }
    Ok(())
}

/// Embed one graph given its normalized adjacency and node features.
pub fn forward(
    weights: &EncoderWeights,
    adj: &Array2<f64>,
    x: &FeatureMatrix,
) -> Result<(GraphEmbedding, ForwardCache), EncoderError> {
    check_inputs(weights, adj, &x.0)?;
    let ax = adj.dot(&x.0);
    let z1 = ax.dot(&weights.w1) + &weights.b1;
    let h1 = relu(&z1);
    let ah1 = adj.dot(&h1);
    let z2 = ah1.dot(&weights.w2) + &weights.b2;
    let h2 = relu(&z2);
    let ah2 = adj.dot(&h2);
    let h3 = ah2.dot(&weights.w3) + &weights.b3;
    let embedding = h3.mean_axis(Axis(0)).expect("at least one node");
    let cache = ForwardCache {
        adj: adj.clone(),
        ax,
        z1,
        ah1,
        z2,
        ah2,
    };
    Ok((GraphEmbedding(embedding), cache))
}

/// Gradients of `upstream · e` with respect to every parameter, where `e` is
/// the embedding produced by the matching [`forward`] call.
pub fn backward(
    weights: &EncoderWeights,
    cache: &ForwardCache,
    upstream: &[f64],
) -> Result<EncoderWeights, EncoderError> {
    let (hidden, out) = weights.w3.dim();
    if upstream.len() != out {
        return Err(EncoderError::Dimension(format!(
            "upstream gradient has length {}, embedding has {}",
            upstream.len(),
            out
        )));
    }
    let n = cache.node_count();
    if cache.ax.ncols() != weights.w1.nrows()
        || cache.z1.ncols() != weights.w1.ncols()
        || cache.z2.ncols() != weights.w2.ncols()
        || cache.ah2.ncols() != hidden
        || cache.ax.nrows() != n
    {
        return Err(EncoderError::StaleCache(format!(
            "cache shapes {:?}/{:?}/{:?} vs weights {:?}/{:?}/{:?}",
            cache.ax.dim(),
            cache.z1.dim(),
            cache.z2.dim(),
            weights.w1.dim(),
            weights.w2.dim(),
            weights.w3.dim()
        )));
    }
    let g = ndarray::ArrayView1::from(upstream);
    // Mean pooling: every node row receives g / n.
    let d_h3 = Array2::from_shape_fn((n, out), |(_, j)| g[j] / n as f64);
    let d_w3 = cache.ah2.t().dot(&d_h3);
    let d_b3 = g.to_owned();

    // Â is symmetric, so Âᵀ = Â.
    let d_h2 = cache.adj.dot(&d_h3.dot(&weights.w3.t()));
    let d_z2 = relu_grad(&d_h2, &cache.z2);
    let d_w2 = cache.ah1.t().dot(&d_z2);
    let d_b2 = d_z2.sum_axis(Axis(0));

    let d_h1 = cache.adj.dot(&d_z2.dot(&weights.w2.t()));
    let d_z1 = relu_grad(&d_h1, &cache.z1);
    let d_w1 = cache.ax.t().dot(&d_z1);
    let d_b1 = d_z1.sum_axis(Axis(0));

    Ok(EncoderWeights {
        w1: d_w1,
        b1: d_b1,
        w2: d_w2,
        b2: d_b2,
        w3: d_w3,
        b3: d_b3,
    })
}

fn relu_grad(upstream: &Array2<f64>, pre: &Array2<f64>) -> Array2<f64> {
    let mut out = upstream.clone();
    out.zip_mut_with(pre, |g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
    out
}

/// Normalize, then run the encoder on a graph whose features are already
/// computed.
pub fn embed_graph(
    weights: &EncoderWeights,
    graph: &DocumentGraph,
    features: &FeatureMatrix,
) -> Result<GraphEmbedding, EncoderError> {
    if graph.nodes.is_empty() {
        return Err(EncoderError::EmptyGraph(graph.doc_id.clone()));
    }
    forward(weights, &normalize_adjacency(graph), features).map(|(e, _)| e)
}
