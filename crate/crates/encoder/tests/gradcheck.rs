//! Finite-difference verification of the analytic backward pass.
//!
//! The probe loss is the sum of all embedding components, so the upstream
//! gradient is a matrix of ones. The check runs in f64 (same generic code
//! as the f32 production path) so central differences are sharp enough for
//! a 1e-4 relative-error bound.

use meridian_chess::playout::random_playout;
use meridian_chess::SplitMix64;
use meridian_encoder::{
    backward, forward_batch, forward_batch_traced, tokenize, EncoderConfig, Mode, ModelWeights,
    TokenSeq,
};
use ndarray::Array2;

fn probe_loss(w: &ModelWeights<f64>, seqs: &[TokenSeq]) -> f64 {
    forward_batch(w, seqs, Mode::Eval).unwrap().sum()
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-10 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[test]
fn analytic_gradients_match_central_differences() {
    let w: ModelWeights<f64> = ModelWeights::init(EncoderConfig::tiny(), 31);
    let seqs: Vec<TokenSeq> = random_playout(123, 40)
        .iter()
        .take(6)
        .map(tokenize)
        .collect();

    let (z, traces) = forward_batch_traced(&w, &seqs, Mode::Eval).unwrap();
    let d_z = Array2::<f64>::ones(z.dim());
    let grads = backward(&w, &traces, &d_z).unwrap();

    let total = w.param_count();
    let samples = 300;
    let mut rng = SplitMix64::new(9001);
    let mut failures = 0;
    let mut checked = 0;
    for _ in 0..samples {
        let flat = rng.below(total);
        // Locate the tensor containing this flat index.
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
        let h = 1e-5;
        let mut plus = w.clone();
        plus.params.tensors_mut()[tensor_idx].1.as_slice_mut()[elem_idx] += h;
        let mut minus = w.clone();
        minus.params.tensors_mut()[tensor_idx].1.as_slice_mut()[elem_idx] -= h;
        let fd = (probe_loss(&plus, &seqs) - probe_loss(&minus, &seqs)) / (2.0 * h);

        let err = relative_error(analytic, fd);
        if err >= 1e-4 {
            failures += 1;
            let name = &w.params.tensors()[tensor_idx].0;
            eprintln!("grad mismatch {name}[{elem_idx}]: analytic {analytic}, fd {fd}, rel {err}");
        }
        checked += 1;
    }
    assert!(
        (failures as f64) <= 0.01 * checked as f64,
        "{failures}/{checked} sampled coordinates exceeded 1e-4 relative error"
    );
}

#[test]
fn f32_gradients_track_f64_gradients() {
    // The production f32 path must agree with the f64 instantiation of the
    // same code to within float noise.
    let w32: ModelWeights<f32> = ModelWeights::init(EncoderConfig::tiny(), 32);
    let w64: ModelWeights<f64> = w32.cast();
    let seqs: Vec<TokenSeq> = random_playout(321, 30)
        .iter()
        .take(4)
        .map(tokenize)
        .collect();

    let (z64, tr64) = forward_batch_traced(&w64, &seqs, Mode::Eval).unwrap();
    let (z32, tr32) = forward_batch_traced(&w32, &seqs, Mode::Eval).unwrap();
    for (a, b) in z64.iter().zip(z32.iter()) {
        assert!((a - *b as f64).abs() < 1e-4, "forward drift {a} vs {b}");
    }

    let g64 = backward(&w64, &tr64, &Array2::<f64>::ones(z64.dim())).unwrap();
    let g32 = backward(&w32, &tr32, &Array2::<f32>::ones(z32.dim())).unwrap();
    let mut max_abs = 0f64;
    for ((_, a), (_, b)) in g64.tensors().iter().zip(g32.tensors().iter()) {
        for (x, y) in a.as_slice().iter().zip(b.as_slice().iter()) {
            let diff = (x - *y as f64).abs();
            let scale = x.abs().max(1.0);
            max_abs = max_abs.max(diff / scale);
        }
    }
    assert!(max_abs < 5e-3, "f32/f64 gradient divergence {max_abs}");
}
