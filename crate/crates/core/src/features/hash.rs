use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{EmbeddingProvider, EmbeddingVector, FeatureError};
use crate::text::normalize_key;

/// Deterministic offline provider.
///
/// The normalized text is hashed (SHA-256, together with the provider seed)
/// to a 64-bit key that seeds a ChaCha stream; `dim` standard normal draws
/// are L2-normalized. Distinct texts give nearly orthogonal unit vectors, and
/// the mapping is stable across processes and platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "embedding dimension must be positive");
        HashEmbedder { dim, seed }
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(normalize_key(text).as_bytes());
        let digest = hasher.finalize();
        let key = u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        EmbeddingVector(v)
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>, FeatureError> {
        texts
            .iter()
            .map(|t| {
                if t.trim().is_empty() {
                    Err(FeatureError::EmptyText)
                } else {
                    Ok(self.embed_one(t))
                }
            })
            .collect()
    }
}
