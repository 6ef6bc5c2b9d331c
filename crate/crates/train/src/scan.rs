//! Embedding-structure scans on held-out data.

use crate::dataset::AnnotatedPosition;
use meridian_encoder::{forward_batch, tokenize, Mode, ModelWeights, TokenSeq};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean cosine similarity of sampled positive pairs (|dp| < delta) versus
/// negative pairs, over up to `max_rows` held-out rows. Returns
/// `(mean_positive, mean_negative)`.
pub fn positive_negative_cosine(
    weights: &ModelWeights<f32>,
    rows: &[AnnotatedPosition],
    delta: f64,
    max_rows: usize,
    pairs: usize,
    seed: u64,
) -> (f64, f64) {
    let n = rows.len().min(max_rows);
    assert!(n >= 2, "need at least two rows to compare pairs");
    let seqs: Vec<TokenSeq> = rows[..n].iter().map(|r| tokenize(&r.position)).collect();
    let z = forward_batch(weights, &seqs, Mode::Eval).expect("embedding scan");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos_sum = 0.0;
    let mut pos_n = 0usize;
    let mut neg_sum = 0.0;
    let mut neg_n = 0usize;
    let mut drawn = 0usize;
    // Draw random pairs until both classes have `pairs` samples or the
    // attempt budget runs out (heavily imbalanced data).
    while (pos_n < pairs || neg_n < pairs) && drawn < pairs * 200 {
        drawn += 1;
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let cos = z.row(i).dot(&z.row(j)) as f64;
        if (rows[i].p_white - rows[j].p_white).abs() < delta {
            if pos_n < pairs {
                pos_sum += cos;
                pos_n += 1;
            }
        } else if neg_n < pairs {
            neg_sum += cos;
            neg_n += 1;
        }
    }
    assert!(pos_n > 0 && neg_n > 0, "pair sampling found no examples of one class");
    (pos_sum / pos_n as f64, neg_sum / neg_n as f64)
}
