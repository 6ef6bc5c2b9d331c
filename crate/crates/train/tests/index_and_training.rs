//! Positive-index oracle check and a short end-to-end training smoke run.

use meridian_chess::SplitMix64;
use meridian_encoder::EncoderConfig;
use meridian_train::{
    build_positive_index, train, AnnotatedPosition, Dataset, Sampler, TrainConfig,
};
use meridian_chess::Position;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

#[test]
fn positive_index_matches_quadratic_oracle_on_10k_rows() {
    let mut rng = SplitMix64::new(404);
    let ps: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
    let ds = dataset_with_probs(&ps);
    let delta = 0.05;
    let index = build_positive_index(&ds, delta);

    // Counts must match the brute-force rule for every row.
    for i in 0..ps.len() {
        let expected = ps
            .iter()
            .enumerate()
            .filter(|&(j, &pj)| j != i && (ps[i] - pj).abs() < delta)
            .count();
        assert_eq!(
            index.neighbor_count(i as u32),
            expected,
            "count mismatch at {i}"
        );
        let _ = expected;
    }

    // Exact set equality on a sample of anchors, plus symmetry.
    for i in (0..ps.len()).step_by(997) {
        let mut got: Vec<u32> = index.neighbors(i as u32).collect();
        got.sort_unstable();
        let mut expected: Vec<u32> = ps
            .iter()
            .enumerate()
            .filter(|&(j, &pj)| j != i && (ps[i] - pj).abs() < delta)
            .map(|(j, _)| j as u32)
            .collect();
        expected.sort_unstable();
        assert_eq!(got, expected, "set mismatch at {i}");
        for &j in got.iter().take(50) {
            assert!(index.are_positive(j, i as u32), "asymmetric at {i},{j}");
        }
    }
}

#[test]
fn anchor_groups_contribute_positives_over_many_batches() {
    let mut rng_p = SplitMix64::new(42);
    let ps: Vec<f64> = (0..3000).map(|_| rng_p.next_f64()).collect();
    let ds = dataset_with_probs(&ps);
    let index = build_positive_index(&ds, 0.05);
    let sampler = Sampler::new(&ds, &index, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for batch_index in 0..1000 {
        let batch = sampler.sample(&mut rng);
        for group in 0..21 {
            let anchor = group * 6;
            let positives = (0..128).filter(|&j| batch.mask[[anchor, j]]).count();
            assert!(
                positives >= 5,
                "batch {batch_index}: anchor slot {anchor} has {positives} positives"
            );
        }
    }
}

#[test]
fn short_training_run_is_reproducible_and_logs() {
    let corpus = meridian_train::synth::generate_corpus(1500, 99);
    let ds = Dataset {
        rows: corpus
            .iter()
            .map(|(position, p)| AnnotatedPosition {
                position: position.clone(),
                p_white: match position.side_to_move() {
                    meridian_chess::Color::White => *p,
                    meridian_chess::Color::Black => 1.0 - *p,
                },
            })
            .collect(),
        skipped: 0,
    };
    let cfg = TrainConfig {
        steps: 6,
        checkpoint_every: 4,
        seed: 7,
        ..TrainConfig::default()
    };
    let dir_a = std::env::temp_dir().join("meridian-train-smoke-a");
    let dir_b = std::env::temp_dir().join("meridian-train-smoke-b");
    for d in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(d);
    }
    let out_a = train(&ds, EncoderConfig::tiny(), &cfg, &dir_a, |_| {}).unwrap();
    let out_b = train(&ds, EncoderConfig::tiny(), &cfg, &dir_b, |_| {}).unwrap();

    // Bitwise-identical checkpoints from the same seed.
    let bytes_a = std::fs::read(&out_a.final_checkpoint).unwrap();
    let bytes_b = std::fs::read(&out_b.final_checkpoint).unwrap();
    assert_eq!(bytes_a, bytes_b, "training is not seed-deterministic");

    // Loss log has one line per step plus a header, with finite values.
    let log = std::fs::read_to_string(&out_a.loss_log).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines.len(), 1 + cfg.steps);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 5);
        let loss: f64 = fields[1].parse().unwrap();
        assert!(loss.is_finite());
    }
    // Intermediate checkpoint at the cadence exists.
    assert!(dir_a.join("checkpoint_step4.ckpt").exists());

    for d in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(d);
    }
}
