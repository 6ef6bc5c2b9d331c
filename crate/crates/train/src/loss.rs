//! Supervised contrastive loss over unit-norm embeddings.
//!
//! For each anchor with a nonempty positive set P(i), the per-anchor loss
//! averages -log softmax(sim/tau) over the positives, normalizing over all
//! other batch entries A(i). Anchors without positives only contribute as
//! negatives. The batch loss is the mean over contributing anchors, so its
//! magnitude is batch-size invariant.

use crate::error::LossError;
use meridian_encoder::weights::{real, Real};
use ndarray::Array2;

#[derive(Clone, Copy, Debug)]
pub struct LossReport {
    pub loss: f64,
    pub anchors_with_positives: usize,
    pub mean_positive_sim: f64,
    pub mean_negative_sim: f64,
}

/// Compute the loss and its gradient with respect to the embeddings.
///
/// `z` holds unit-norm rows; `mask[i][j]` marks positive pairs and must be
/// symmetric with a false diagonal. Log-sum-exp runs with max subtraction.
pub fn supcon_loss<F: Real>(
    z: &Array2<F>,
    mask: &Array2<bool>,
    tau: f64,
) -> Result<(LossReport, Array2<F>), LossError> {
    if tau <= 0.0 {
        return Err(LossError::BadTau(tau));
    }
    let n = z.nrows();
    if mask.dim() != (n, n) {
        return Err(LossError::MaskShape {
            rows: mask.nrows(),
            cols: mask.ncols(),
            batch: n,
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(LossError::NonFiniteEmbedding);
    }
    for i in 0..n {
        if mask[[i, i]] {
            return Err(LossError::MaskDiagonal(i));
        }
        for j in 0..i {
            if mask[[i, j]] != mask[[j, i]] {
                return Err(LossError::MaskAsymmetric(i, j));
            }
        }
    }

    // Cosine similarity of unit vectors is their dot product. The loss
    // bookkeeping runs in f64 regardless of F.
    let sims_f = z.dot(&z.t());
    let sims: Vec<f64> = sims_f.iter().map(|v| v.to_f64().unwrap()).collect();
    let sim = |i: usize, j: usize| sims[i * n + j];

    let positive_counts: Vec<usize> =
        (0..n).map(|i| (0..n).filter(|&j| mask[[i, j]]).count()).collect();
    let anchors = positive_counts.iter().filter(|&&c| c > 0).count();

    // Similarity statistics over all ordered pairs.
    let mut pos_sum = 0.0;
    let mut pos_count = 0usize;
    let mut neg_sum = 0.0;
    let mut neg_count = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if mask[[i, j]] {
                pos_sum += sim(i, j);
                pos_count += 1;
            } else {
                neg_sum += sim(i, j);
                neg_count += 1;
            }
        }
    }

    if anchors == 0 {
        let report = LossReport {
            loss: 0.0,
            anchors_with_positives: 0,
            mean_positive_sim: 0.0,
            mean_negative_sim: mean(neg_sum, neg_count),
        };
        return Ok((report, Array2::zeros(z.dim())));
    }

    let mut loss_sum = 0.0f64;
    let mut grad_sim = Array2::<F>::zeros((n, n));
    let grad_scale = 1.0 / (anchors as f64 * tau);

    for i in 0..n {
        let p_count = positive_counts[i];
        if p_count == 0 {
            continue;
        }
        // log-sum-exp over A(i) = everything but the anchor itself.
        let mut max = f64::NEG_INFINITY;
        for j in 0..n {
            if j != i {
                max = max.max(sim(i, j) / tau);
            }
        }
        let mut denom = 0.0f64;
        for j in 0..n {
            if j != i {
                denom += (sim(i, j) / tau - max).exp();
            }
        }
        let lse = max + denom.ln();

        let inv_p = 1.0 / p_count as f64;
        let mut anchor_loss = 0.0;
        for j in 0..n {
            if mask[[i, j]] {
                anchor_loss += lse - sim(i, j) / tau;
            }
        }
        loss_sum += anchor_loss * inv_p;

        // d(anchor mean loss)/d(sim[i][j]) = (softmax_j - [j in P]/|P|)/tau,
        // and the batch divides by the number of contributing anchors.
        for j in 0..n {
            if j == i {
                continue;
            }
            let q = (sim(i, j) / tau - lse).exp();
            let indicator = if mask[[i, j]] { inv_p } else { 0.0 };
            grad_sim[[i, j]] = real::<F>((q - indicator) * grad_scale);
        }
    }

    // sims = z z^T, so d(loss)/dz = (G + G^T) z.
    let grad_z = (&grad_sim + &grad_sim.t()).dot(z);

    let loss = loss_sum / anchors as f64;
    if !loss.is_finite() {
        return Err(LossError::NonFiniteLoss);
    }
    let report = LossReport {
        loss,
        anchors_with_positives: anchors,
        mean_positive_sim: mean(pos_sum, pos_count),
        mean_negative_sim: mean(neg_sum, neg_count),
    };
    Ok((report, grad_z))
}

fn mean(sum: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn mask_from(pairs: &[(usize, usize)], n: usize) -> Array2<bool> {
        let mut m = Array2::from_elem((n, n), false);
        for &(a, b) in pairs {
            m[[a, b]] = true;
            m[[b, a]] = true;
        }
        m
    }

    #[test]
    fn mutually_positive_pair_has_zero_loss() {
        // With batch size 2, A(i) = P(i) for both anchors: numerator equals
        // denominator regardless of the embeddings.
        let z = array![[1.0f64, 0.0], [0.6, 0.8]];
        let mask = mask_from(&[(0, 1)], 2);
        let (report, grad) = supcon_loss(&z, &mask, 0.07).unwrap();
        assert!(report.loss.abs() < 1e-9, "loss {}", report.loss);
        assert_eq!(report.anchors_with_positives, 2);
        assert!(grad.iter().all(|g| g.abs() < 1e-9));
    }

    #[test]
    fn hand_computed_three_sample_case() {
        // e1, e1, e2 with positives {0 <-> 1} at tau = 1: each contributing
        // anchor loses -log(e / (e + 1)) ~ 0.31326; anchor 2 is skipped.
        let z = array![[1.0f64, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let mask = mask_from(&[(0, 1)], 3);
        let (report, _) = supcon_loss(&z, &mask, 1.0).unwrap();
        let expected = -(1f64.exp() / (1f64.exp() + 1.0)).ln();
        assert!((expected - 0.31326).abs() < 1e-5);
        assert!(
            (report.loss - expected).abs() < 1e-9,
            "loss {} vs {expected}",
            report.loss
        );
        assert_eq!(report.anchors_with_positives, 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = array![[1.0f64, 0.0], [0.0, 1.0]];
        assert!(matches!(
            supcon_loss(&z, &mask_from(&[], 2), 0.0),
            Err(LossError::BadTau(_))
        ));
        assert!(matches!(
            supcon_loss(&z, &mask_from(&[], 3), 0.07),
            Err(LossError::MaskShape { .. })
        ));
        let mut diag = mask_from(&[], 2);
        diag[[1, 1]] = true;
        assert!(matches!(
            supcon_loss(&z, &diag, 0.07),
            Err(LossError::MaskDiagonal(1))
        ));
        let mut asym = mask_from(&[], 2);
        asym[[0, 1]] = true;
        assert!(matches!(
            supcon_loss(&z, &asym, 0.07),
            Err(LossError::MaskAsymmetric(_, _))
        ));
        let bad = array![[f64::NAN, 0.0], [0.0, 1.0]];
        assert!(matches!(
            supcon_loss(&bad, &mask_from(&[], 2), 0.07),
            Err(LossError::NonFiniteEmbedding)
        ));
    }

    #[test]
    fn anchors_without_positives_get_zero_gradient_rows_only_via_negatives() {
        // Anchor 2 has no positives; it still receives gradient as a
        // negative of anchors 0 and 1, but the loss only counts two anchors.
        let z = array![[1.0f64, 0.0], [0.8, 0.6], [0.0, 1.0]];
        let mask = mask_from(&[(0, 1)], 3);
        let (report, grad) = supcon_loss(&z, &mask, 0.5).unwrap();
        assert_eq!(report.anchors_with_positives, 2);
        assert!(report.loss > 0.0);
        assert!(grad.row(2).iter().any(|&g| g != 0.0));
    }
}
