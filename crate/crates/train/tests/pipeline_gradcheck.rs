//! Finite-difference check of the full pipeline: tokenized positions
//! through the encoder into the SupCon loss, differentiated with respect
//! to raw parameters. Runs in f64 via the generic math.

use meridian_chess::playout::random_playout;
use meridian_chess::SplitMix64;
use meridian_encoder::{
    backward, forward_batch, forward_batch_traced, tokenize, EncoderConfig, Mode, ModelWeights,
    TokenSeq,
};
use meridian_train::{mask_from_probs, supcon_loss};
use ndarray::Array2;

fn pipeline_loss(
    w: &ModelWeights<f64>,
    seqs: &[TokenSeq],
    mask: &Array2<bool>,
    tau: f64,
) -> f64 {
    let z = forward_batch(w, seqs, Mode::Eval).unwrap();
    supcon_loss(&z, mask, tau).unwrap().0.loss
}

#[test]
fn encoder_plus_supcon_matches_finite_differences() {
    let w: ModelWeights<f64> = ModelWeights::init(EncoderConfig::tiny(), 88);
    let positions = random_playout(55, 40);
    let seqs: Vec<TokenSeq> = positions.iter().take(8).map(tokenize).collect();
    // Synthetic probabilities that give a mixed positive/negative mask.
    let probs: Vec<f64> = (0..8).map(|i| (i % 4) as f64 * 0.03).collect();
    let mask = mask_from_probs(&probs, 0.05);
    let tau = 0.07;

    let (z, traces) = forward_batch_traced(&w, &seqs, Mode::Eval).unwrap();
    let (_, d_z) = supcon_loss(&z, &mask, tau).unwrap();
    let grads = backward(&w, &traces, &d_z).unwrap();

    let total = w.param_count();
    let mut rng = SplitMix64::new(31337);
    let samples = 120;
    let mut failures = 0;
    for _ in 0..samples {
        let flat = rng.below(total);
        let (tensor_idx, elem_idx) = {
            let tensors = w.params.tensors();
            let mut acc = 0;
            let mut found = (0, 0);
            for (i, (_, t)) in tensors.iter().enumerate() {
                if flat < acc + t.len() {
                    found = (i, flat - acc);
                    break;
                }
                acc += t.len();
            }
            found
        };
        let analytic = grads.tensors()[tensor_idx].1.as_slice()[elem_idx];
        // Central differences with one Richardson step: the h^2 truncation
        // term cancels, which matters for coordinates with tiny gradients.
        let eval_at = |offset: f64| {
            let mut shifted = w.clone();
            shifted.params.tensors_mut()[tensor_idx].1.as_slice_mut()[elem_idx] += offset;
            pipeline_loss(&shifted, &seqs, &mask, tau)
        };
        let h = 2e-4;
        let d_h = (eval_at(h) - eval_at(-h)) / (2.0 * h);
        let d_h2 = (eval_at(h / 2.0) - eval_at(-h / 2.0)) / h;
        let fd = (4.0 * d_h2 - d_h) / 3.0;
        let scale = analytic.abs().max(fd.abs());
        if scale > 1e-10 && (analytic - fd).abs() / scale >= 1e-4 {
            failures += 1;
            let name = &w.params.tensors()[tensor_idx].0;
            eprintln!("pipeline grad mismatch {name}[{elem_idx}]: {analytic} vs fd {fd}");
        }
    }
    assert!(
        failures as f64 <= 0.01 * samples as f64,
        "{failures}/{samples} coordinates exceeded tolerance"
    );
}
