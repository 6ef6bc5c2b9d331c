//! Training batch assembly: anchor groups with sampled positives, plus
//! independent fills, and the batch-level positive mask.

use crate::dataset::{Dataset, PositiveIndex};
use crate::error::TrainError;
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Positives drawn per anchor group.
pub const POSITIVES_PER_ANCHOR: usize = 5;

#[derive(Clone, Debug)]
pub struct TrainBatch {
    /// Dataset row ids in batch order.
    pub ids: Vec<u32>,
    pub p_white: Vec<f64>,
    /// `mask[i][j]` = i != j and |p_i - p_j| < delta, recomputed over the
    /// whole batch so cross-group positives count too.
    pub mask: Array2<bool>,
}

pub struct Sampler<'a> {
    ds: &'a Dataset,
    index: &'a PositiveIndex,
    eligible: Vec<u32>,
    batch_size: usize,
}

impl<'a> Sampler<'a> {
    /// Anchors need at least [`POSITIVES_PER_ANCHOR`] precomputed
    /// positives; rows below that threshold still appear as fills and
    /// sampled positives.
    pub fn new(
        ds: &'a Dataset,
        index: &'a PositiveIndex,
        batch_size: usize,
    ) -> Result<Sampler<'a>, TrainError> {
        if ds.is_empty() {
            return Err(TrainError::EmptyDataset);
        }
        let eligible = index.eligible_anchors(POSITIVES_PER_ANCHOR);
        if eligible.is_empty() {
            return Err(TrainError::NoEligibleAnchors {
                needed: POSITIVES_PER_ANCHOR,
            });
        }
        if batch_size < POSITIVES_PER_ANCHOR + 1 {
            return Err(TrainError::Config(format!(
                "batch size {batch_size} cannot hold an anchor group"
            )));
        }
        Ok(Sampler {
            ds,
            index,
            eligible,
            batch_size,
        })
    }

    /// Assemble one batch: `batch_size / 6` groups of one anchor plus five
    /// sampled positives, padded to size with independently drawn fills
    /// (for the default 128 that is 21 groups + 2 fills).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> TrainBatch {
        let groups = self.batch_size / (POSITIVES_PER_ANCHOR + 1);
        let mut ids: Vec<u32> = Vec::with_capacity(self.batch_size);
        for _ in 0..groups {
            let anchor = self.eligible[rng.gen_range(0..self.eligible.len())];
            ids.push(anchor);
            ids.extend(
                self.index
                    .sample_neighbors(anchor, POSITIVES_PER_ANCHOR, rng),
            );
        }
        while ids.len() < self.batch_size {
            ids.push(rng.gen_range(0..self.ds.len() as u32));
        }

        let p_white: Vec<f64> = ids
            .iter()
            .map(|&id| self.ds.rows[id as usize].p_white)
            .collect();
        let mask = mask_from_probs(&p_white, self.index.delta());
        TrainBatch {
            ids,
            p_white,
            mask,
        }
    }
}

/// The delta rule applied across a whole batch.
pub fn mask_from_probs(p: &[f64], delta: f64) -> Array2<bool> {
    let n = p.len();
    let mut mask = Array2::from_elem((n, n), false);
    for i in 0..n {
        for j in 0..n {
            if i != j && (p[i] - p[j]).abs() < delta {
                mask[[i, j]] = true;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_positive_index, AnnotatedPosition};
    use meridian_chess::Position;
    use rand::SeedableRng;

    fn dataset_with_probs(ps: &[f64]) -> Dataset {
        let pos = Position::start();
        Dataset {
            rows: ps
                .iter()
                .map(|&p_white| AnnotatedPosition {
                    position: pos.clone(),
                    p_white,
                })
                .collect(),
            skipped: 0,
        }
    }

    fn uniform_probs(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn batch_has_exact_size_and_valid_mask() {
        let ds = dataset_with_probs(&uniform_probs(500));
        let index = build_positive_index(&ds, 0.05);
        let sampler = Sampler::new(&ds, &index, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let batch = sampler.sample(&mut rng);
            assert_eq!(batch.ids.len(), 128);
            for i in 0..128 {
                assert!(!batch.mask[[i, i]], "diagonal must be false");
                for j in 0..128 {
                    let expected =
                        i != j && (batch.p_white[i] - batch.p_white[j]).abs() < 0.05;
                    assert_eq!(batch.mask[[i, j]], expected, "mask rule at {i},{j}");
                }
            }
        }
    }

    #[test]
    fn anchor_groups_provide_in_batch_positives() {
        let ds = dataset_with_probs(&uniform_probs(400));
        let index = build_positive_index(&ds, 0.05);
        let sampler = Sampler::new(&ds, &index, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let batch = sampler.sample(&mut rng);
            for group in 0..(128 / 6) {
                let anchor_slot = group * 6;
                let positives = (0..128)
                    .filter(|&j| batch.mask[[anchor_slot, j]])
                    .count();
                assert!(
                    positives >= POSITIVES_PER_ANCHOR,
                    "anchor in slot {anchor_slot} has only {positives} positives"
                );
            }
        }
    }

    #[test]
    fn sampler_requires_eligible_anchors() {
        // Probabilities spaced wider than delta: nobody has 5 positives.
        let ds = dataset_with_probs(&[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        let index = build_positive_index(&ds, 0.05);
        assert!(matches!(
            Sampler::new(&ds, &index, 128),
            Err(TrainError::NoEligibleAnchors { .. })
        ));
    }
}
