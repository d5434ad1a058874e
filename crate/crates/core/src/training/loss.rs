use super::{PairLabel, TrainError};

/// Loss value and its gradients with respect to both embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLoss {
    pub loss: f64,
    pub cosine: f64,
    pub grad_a: Vec<f64>,
    pub grad_b: Vec<f64>,
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, TrainError> {
    if a.len() != b.len() {
        return Err(TrainError::LengthMismatch(a.len(), b.len()));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(TrainError::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// Cosine embedding loss: `1 - cos` for positive pairs and
/// `max(0, cos - margin)` for negative pairs. Gradients are zero when a
/// negative pair is already at or below the margin.
pub fn cosine_embedding_loss(a: &[f64], b: &[f64], label: PairLabel, margin: f64) -> Result<PairLoss, TrainError> {
    let cos = cosine_similarity(a, b)?;
    let na2: f64 = a.iter().map(|x| x * x).sum();
    let nb2: f64 = b.iter().map(|x| x * x).sum();
    let inv = 1.0 / (na2 * nb2).sqrt();
    // d cos / d a = b / (|a||b|) - cos * a / |a|^2, symmetric for b.
    let dcos_da = || a.iter().zip(b).map(|(x, y)| y * inv - cos * x / na2).collect::<Vec<f64>>();
    let dcos_db = || a.iter().zip(b).map(|(x, y)| x * inv - cos * y / nb2).collect::<Vec<f64>>();
    let (loss, sign) = match label {
        PairLabel::Positive => ((1.0 - cos).max(0.0), -1.0),
        PairLabel::Negative if cos > margin => (cos - margin, 1.0),
        PairLabel::Negative => {
            return Ok(PairLoss {
                loss: 0.0,
                cosine: cos,
                grad_a: vec![0.0; a.len()],
                grad_b: vec![0.0; b.len()],
            })
        }
    };
    let scale = |v: Vec<f64>| v.into_iter().map(|x| sign * x).collect();
    Ok(PairLoss {
        loss,
        cosine: cos,
        grad_a: scale(dcos_da()),
        grad_b: scale(dcos_db()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_positive_has_zero_loss() {
        let e = [0.3, -1.0, 2.0];
        let l = cosine_embedding_loss(&e, &e, PairLabel::Positive, 0.5).unwrap();
        assert!(l.loss.abs() < 1e-12);
    }

    #[test]
    fn orthogonal_negative_has_zero_loss() {
        let l = cosine_embedding_loss(&[1.0, 0.0], &[0.0, 2.0], PairLabel::Negative, 0.5).unwrap();
        assert_eq!(l.loss, 0.0);
        assert!(l.grad_a.iter().chain(&l.grad_b).all(|&g| g == 0.0));
    }

    #[test]
    fn identical_negative_pays_one_minus_margin() {
        let e = [0.3, -1.0, 2.0];
        let l = cosine_embedding_loss(&e, &e, PairLabel::Negative, 0.5).unwrap();
        assert!((l.loss - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_norm_is_an_error() {
        assert!(matches!(
            cosine_embedding_loss(&[0.0, 0.0], &[1.0, 0.0], PairLabel::Positive, 0.5),
            Err(TrainError::ZeroNorm)
        ));
    }

    fn finite_difference(a: &[f64], b: &[f64], label: PairLabel) -> (Vec<f64>, Vec<f64>) {
        let h = 1e-6;
        let f = |a: &[f64], b: &[f64]| cosine_embedding_loss(a, b, label, 0.5).unwrap().loss;
        let grad = |which: usize| {
            (0..a.len())
                .map(|i| {
                    let (mut ap, mut am, mut bp, mut bm) = (a.to_vec(), a.to_vec(), b.to_vec(), b.to_vec());
                    if which == 0 {
                        ap[i] += h;
                        am[i] -= h;
                    } else {
                        bp[i] += h;
                        bm[i] -= h;
                    }
                    (f(&ap, &bp) - f(&am, &bm)) / (2.0 * h)
                })
                .collect()
        };
        (grad(0), grad(1))
    }

    proptest! {
        #[test]
        fn gradients_match_finite_differences(
            a in prop::collection::vec(-2.0f64..2.0, 4),
            b in prop::collection::vec(-2.0f64..2.0, 4),
            positive in any::<bool>(),
        ) {
            let na = a.iter().map(|x| x * x).sum::<f64>();
            let nb = b.iter().map(|x| x * x).sum::<f64>();
            prop_assume!(na > 0.1 && nb > 0.1);
            let label = if positive { PairLabel::Positive } else { PairLabel::Negative };
            let l = cosine_embedding_loss(&a, &b, label, 0.5).unwrap();
            prop_assume!((l.cosine - 0.5).abs() > 1e-3);
            prop_assert!(l.loss >= 0.0);
            let (ga, gb) = finite_difference(&a, &b, label);
            for (x, y) in l.grad_a.iter().zip(&ga).chain(l.grad_b.iter().zip(&gb)) {
                prop_assert!((x - y).abs() < 1e-6, "{} vs {}", x, y);
            }
        }
    }
}
