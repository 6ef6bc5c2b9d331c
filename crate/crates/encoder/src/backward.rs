//! Backpropagation through the encoder, consuming forward traces.

use crate::error::EncoderError;
use crate::forward::ChunkTrace;
use crate::ops;
use crate::weights::{Gradients, ModelWeights, ParamSet, Real};
use ndarray::{s, Array2, Axis};
use rayon::prelude::*;

/// Gradients of a scalar loss with respect to every parameter, given the
/// loss gradient `d_z` with respect to the (unit-norm) output embeddings.
/// Rows of `d_z` line up with the batch order used in the traced forward.
/// Chunks are differentiated in parallel and summed in fixed order.
pub fn backward<F: Real>(
    weights: &ModelWeights<F>,
    traces: &[ChunkTrace<F>],
    d_z: &Array2<F>,
) -> Result<Gradients<F>, EncoderError> {
    let total: usize = traces.iter().map(|tr| tr.batch).sum();
    if d_z.nrows() != total || d_z.ncols() != weights.config.embed_dim {
        return Err(EncoderError::Shape {
            what: "loss gradient",
            expected: format!("({total}, {})", weights.config.embed_dim),
            got: format!("({}, {})", d_z.nrows(), d_z.ncols()),
        });
    }
    let mut offsets = Vec::with_capacity(traces.len());
    let mut acc = 0;
    for tr in traces {
        offsets.push(acc);
        acc += tr.batch;
    }
    let chunk_grads: Vec<Gradients<F>> = traces
        .par_iter()
        .zip(offsets.par_iter())
        .map(|(trace, &off)| {
            let dz = d_z.slice(s![off..off + trace.batch, ..]).to_owned();
            backward_chunk(weights, trace, &dz)
        })
        .collect();
    let mut grads = ParamSet::zeros(&weights.config);
    for g in &chunk_grads {
        grads.add_assign(g);
    }
    Ok(grads)
}

fn backward_chunk<F: Real>(
    weights: &ModelWeights<F>,
    trace: &ChunkTrace<F>,
    d_z: &Array2<F>,
) -> Gradients<F> {
    let cfg = &weights.config;
    let p = &weights.params;
    let mut g: Gradients<F> = ParamSet::zeros(cfg);
    let b = trace.batch;
    let t = cfg.padded_len();
    let h = cfg.hidden_dim;
    let heads = cfg.num_heads;
    let hd = cfg.head_dim();
    let scale = crate::weights::real::<F>(1.0 / (hd as f64).sqrt());

    // Projection head: unit-normalization, then the linear projection.
    let d_u = ops::normalize_rows_backward(&trace.z, &trace.norms, d_z);
    let (d_cls_rows, d_proj_w, d_proj_b) =
        ops::linear_backward(&trace.cls_rows, &p.proj_w, &d_u);
    g.proj_w += &d_proj_w;
    g.proj_b += &d_proj_b;

    // Scatter CLS-row gradients back into the full token grid.
    let mut d_y = Array2::<F>::zeros((b * t, h));
    for bi in 0..b {
        d_y.row_mut(bi * t).assign(&d_cls_rows.row(bi));
    }
    let (mut d_x, d_gf, d_bf) =
        ops::layer_norm_backward(&d_y, &trace.fln_xhat, &trace.fln_inv_std, &p.final_ln);
    g.final_ln.gamma += &d_gf;
    g.final_ln.beta += &d_bf;

    for (layer_index, layer) in p.layers.iter().enumerate().rev() {
        let lt = &trace.layers[layer_index];
        let lg = &mut g.layers[layer_index];

        // MLP block.
        let mut d_mlp_out = d_x.clone();
        if let Some(mask) = &lt.mask2 {
            d_mlp_out *= mask;
        }
        let (d_h_act, d_w2, d_b2) = ops::linear_backward(&lt.h_act, &layer.w2, &d_mlp_out);
        lg.w2 += &d_w2;
        lg.b2 += &d_b2;
        let d_h_pre = ops::gelu_backward_cached(&d_h_act, &lt.h_pre, &lt.h_tanh);
        let normed = ln_output(&lt.xhat2, &layer.ln2);
        let (d_normed, d_w1, d_b1) = ops::linear_backward(&normed, &layer.w1, &d_h_pre);
        lg.w1 += &d_w1;
        lg.b1 += &d_b1;
        let (d_x_mid_ln, d_g2, d_b2ln) =
            ops::layer_norm_backward(&d_normed, &lt.xhat2, &lt.inv_std2, &layer.ln2);
        lg.ln2.gamma += &d_g2;
        lg.ln2.beta += &d_b2ln;
        // Residual: d_x (from above) flows into x_mid directly as well.
        let d_x_mid = &d_x + &d_x_mid_ln;

        // Attention block.
        let mut d_attn_out = d_x_mid.clone();
        if let Some(mask) = &lt.mask1 {
            d_attn_out *= mask;
        }
        let (d_concat, d_wo, d_bo) =
            ops::linear_backward(&lt.attn_concat, &layer.wo, &d_attn_out);
        lg.wo += &d_wo;
        lg.bo += &d_bo;

        let mut d_q = Array2::<F>::zeros((b * t, h));
        let mut d_k = Array2::<F>::zeros((b * t, h));
        let mut d_v = Array2::<F>::zeros((b * t, h));
        for bi in 0..b {
            let rows = bi * t..(bi + 1) * t;
            for head in 0..heads {
                let cols = head * hd..(head + 1) * hd;
                let probs = lt
                    .probs
                    .slice(s![(bi * heads + head) * t..(bi * heads + head + 1) * t, ..]);
                let d_ov = d_concat.slice(s![rows.clone(), cols.clone()]);
                let vv = lt.v.slice(s![rows.clone(), cols.clone()]);
                let qv = lt.q.slice(s![rows.clone(), cols.clone()]);
                let kv = lt.k.slice(s![rows.clone(), cols.clone()]);

                let d_probs = d_ov.dot(&vv.t());
                let dvv = probs.t().dot(&d_ov);
                let mut d_scores = ops::softmax_backward(&probs, &d_probs);
                d_scores.mapv_inplace(|v| v * scale);
                let dqv = d_scores.dot(&kv);
                let dkv = d_scores.t().dot(&qv);

                d_q.slice_mut(s![rows.clone(), cols.clone()]).assign(&dqv);
                d_k.slice_mut(s![rows.clone(), cols.clone()]).assign(&dkv);
                d_v.slice_mut(s![rows.clone(), cols.clone()]).assign(&dvv);
            }
        }

        let a = ln_output(&lt.xhat1, &layer.ln1);
        let (d_a_q, d_wq, d_bq) = ops::linear_backward(&a, &layer.wq, &d_q);
        let (d_a_k, d_wk, d_bk) = ops::linear_backward(&a, &layer.wk, &d_k);
        let (d_a_v, d_wv, d_bv) = ops::linear_backward(&a, &layer.wv, &d_v);
        lg.wq += &d_wq;
        lg.bq += &d_bq;
        lg.wk += &d_wk;
        lg.bk += &d_bk;
        lg.wv += &d_wv;
        lg.bv += &d_bv;
        let d_a = &d_a_q + &d_a_k + &d_a_v;
        let (d_x_in_ln, d_g1, d_b1ln) =
            ops::layer_norm_backward(&d_a, &lt.xhat1, &lt.inv_std1, &layer.ln1);
        lg.ln1.gamma += &d_g1;
        lg.ln1.beta += &d_b1ln;

        d_x = &d_x_mid + &d_x_in_ln;
    }

    // Embedding gradients.
    for (bi, seq) in trace.ids.iter().enumerate() {
        let base = bi * t;
        {
            let row = d_x.row(base);
            g.cls += &row;
            g.pos_emb.row_mut(0).scaled_add(F::one(), &row);
        }
        for (ti, &id) in seq.ids().iter().enumerate() {
            let row = d_x.row(base + ti + 1);
            g.tok_emb.row_mut(id as usize).scaled_add(F::one(), &row);
            g.pos_emb.row_mut(ti + 1).scaled_add(F::one(), &row);
        }
    }
    g
}

/// Reconstruct a layer-norm output from its normalized activations.
fn ln_output<F: Real>(xhat: &Array2<F>, ln: &crate::weights::LnParams<F>) -> Array2<F> {
    let mut y = xhat * &ln.gamma.view().insert_axis(Axis(0));
    y += &ln.beta.view().insert_axis(Axis(0));
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EncoderConfig;
    use crate::forward::{forward_batch_traced, Mode};
    use crate::tokenizer::tokenize;
    use meridian_chess::playout::random_playout;

    #[test]
    fn zero_upstream_gradient_gives_zero_parameter_gradients() {
        let w: ModelWeights<f32> = ModelWeights::init(EncoderConfig::tiny(), 21);
        let seqs: Vec<_> = random_playout(3, 20).iter().map(tokenize).collect();
        let (z, traces) = forward_batch_traced(&w, &seqs, Mode::Eval).unwrap();
        let d_z = Array2::<f32>::zeros(z.dim());
        let grads = backward(&w, &traces, &d_z).unwrap();
        for (name, tensor) in grads.tensors() {
            assert!(
                tensor.as_slice().iter().all(|&v| v == 0.0),
                "nonzero gradient in {name}"
            );
        }
    }

    #[test]
    fn gradient_shape_mismatch_is_an_error() {
        let w: ModelWeights<f32> = ModelWeights::init(EncoderConfig::tiny(), 22);
        let seqs: Vec<_> = random_playout(4, 10).iter().map(tokenize).collect();
        let (_, traces) = forward_batch_traced(&w, &seqs, Mode::Eval).unwrap();
        let bad = Array2::<f32>::zeros((seqs.len() + 1, w.config.embed_dim));
        assert!(backward(&w, &traces, &bad).is_err());
    }
}
