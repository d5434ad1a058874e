use super::BaselineError;
use crate::features::EmbeddingProvider;
use crate::text::{char_len, char_slice};

pub const DOC_CHUNK_CHARS: usize = 1000;

/// Sum of the embeddings of consecutive non-overlapping 1000-character
/// chunks. Whitespace-only chunks are skipped.
pub fn document_vector(provider: &dyn EmbeddingProvider, text: &str) -> Result<Vec<f64>, BaselineError> {
    let n = char_len(text);
    let chunks: Vec<&str> = (0..n)
        .step_by(DOC_CHUNK_CHARS)
        .map(|s| char_slice(text, s, (s + DOC_CHUNK_CHARS).min(n)))
        .filter(|c| !c.trim().is_empty())
        .collect();
    if chunks.is_empty() {
        return Err(BaselineError::EmptyText);
    }
    let vectors = provider.embed_batch(&chunks)?;
    let mut sum = vec![0.0; provider.dim()];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v.as_slice()) {
            *s += x;
        }
    }
    Ok(sum)
}

/// `1 - cos(u, v)`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64, BaselineError> {
    if u.len() != v.len() {
        return Err(BaselineError::DimensionMismatch(u.len(), v.len()));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(BaselineError::ZeroNorm);
    }
    if u == v {
        // Rounding in the dot product would otherwise leave ~1e-16.
        return Ok(0.0);
    }
    let cos = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

pub fn doc_embedding_score(provider: &dyn EmbeddingProvider, a: &str, b: &str) -> Result<f64, BaselineError> {
    cosine_distance(&document_vector(provider, a)?, &document_vector(provider, b)?)
}
