//! Stochastic gradient descent with classical momentum.

use crate::error::TrainError;
use meridian_encoder::weights::{ParamSet, Real};
use meridian_encoder::EncoderConfig;

/// Per-parameter velocity buffers.
pub struct SgdState<F: Real> {
    pub velocity: ParamSet<F>,
}

impl<F: Real> SgdState<F> {
    pub fn new(config: &EncoderConfig) -> SgdState<F> {
        SgdState {
            velocity: ParamSet::zeros(config),
        }
    }
}

/// The slice-level update kernel: `v <- momentum * v + g`,
/// `w <- w - lr * v`.
pub fn sgd_update_slices<F: Real>(w: &mut [F], g: &[F], v: &mut [F], lr: F, momentum: F) {
    debug_assert!(w.len() == g.len() && g.len() == v.len());
    for i in 0..w.len() {
        v[i] = momentum * v[i] + g[i];
        w[i] = w[i] - lr * v[i];
    }
}

/// Apply one momentum-SGD step. Non-finite gradients reject the step and
/// leave weights and state untouched.
pub fn sgd_step<F: Real>(
    params: &mut ParamSet<F>,
    grads: &ParamSet<F>,
    state: &mut SgdState<F>,
    lr: F,
    momentum: F,
) -> Result<(), TrainError> {
    if !grads.all_finite() {
        return Err(TrainError::NonFiniteGradient { step: 0 });
    }
    let mut ws = params.tensors_mut();
    let gs = grads.tensors();
    let mut vs = state.velocity.tensors_mut();
    debug_assert_eq!(ws.len(), gs.len());
    for i in 0..ws.len() {
        sgd_update_slices(
            ws[i].1.as_slice_mut(),
            gs[i].1.as_slice(),
            vs[i].1.as_slice_mut(),
            lr,
            momentum,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_without_momentum() {
        let mut w = [0.0f64];
        let mut v = [0.0f64];
        sgd_update_slices(&mut w, &[1.0], &mut v, 0.1, 0.0);
        assert!((w[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn momentum_accumulates_across_steps() {
        // Two identical unit gradients at momentum 0.9, lr 1:
        // v1 = 1, w1 = -1; v2 = 1.9, w2 = -2.9.
        let mut w = [0.0f64];
        let mut v = [0.0f64];
        sgd_update_slices(&mut w, &[1.0], &mut v, 1.0, 0.9);
        sgd_update_slices(&mut w, &[1.0], &mut v, 1.0, 0.9);
        assert!((w[0] + 2.9).abs() < 1e-12, "w = {}", w[0]);
    }

    #[test]
    fn converges_on_a_toy_quadratic() {
        // f(w) = 0.5 * sum (w - c)^2, gradient w - c, minimum at c.
        let c = [3.0f64, -1.5, 0.25];
        let mut w = [0.0f64; 3];
        let mut v = [0.0f64; 3];
        for _ in 0..200 {
            let g: Vec<f64> = w.iter().zip(&c).map(|(wi, ci)| wi - ci).collect();
            sgd_update_slices(&mut w, &g, &mut v, 0.1, 0.9);
        }
        for (wi, ci) in w.iter().zip(&c) {
            assert!((wi - ci).abs() < 1e-3, "{wi} vs {ci}");
        }
    }

    #[test]
    fn non_finite_gradient_rejects_step() {
        let cfg = EncoderConfig::tiny();
        let mut weights: meridian_encoder::ModelWeights<f32> =
            meridian_encoder::ModelWeights::init(cfg, 1);
        let before = weights.params.clone();
        let mut grads = ParamSet::<f32>::zeros(&cfg);
        grads.cls[0] = f32::NAN;
        let mut state = SgdState::new(&cfg);
        let err = sgd_step(&mut weights.params, &grads, &mut state, 0.1, 0.9);
        assert!(err.is_err());
        assert_eq!(weights.params, before);
    }
}
