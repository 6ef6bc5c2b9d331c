//! Batched encoder forward pass.
//!
//! Activations for a chunk of examples are packed as `(chunk * T, H)`
//! matrices (T = sequence length with the CLS slot) so the linear layers
//! run as single GEMMs. Batches are split into fixed-size chunks that are
//! processed in parallel; chunking is constant and per-example dropout
//! streams depend only on `(seed, example index)`, so results are bitwise
//! reproducible regardless of thread count.

use crate::error::EncoderError;
use crate::ops;
use crate::tokens::{TokenSeq, SEQ_LEN};
use crate::weights::{real, ModelWeights, Real};
use ndarray::{s, Array1, Array2, Axis};
use rayon::prelude::*;

/// Examples per parallel work unit.
pub const CHUNK: usize = 2;

/// The forward/backward passes allocate many short-lived buffers in the
/// hundreds-of-kilobytes range. glibc serves those with mmap by default,
/// which costs page faults on every reuse; raising the threshold keeps
/// them on the heap free lists.
fn tune_allocator() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        #[cfg(all(unix, target_env = "gnu"))]
        unsafe {
            libc::mallopt(libc::M_MMAP_THRESHOLD, 64 << 20);
        }
    });
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Deterministic; dropout disabled.
    Eval,
    /// Dropout enabled, masks derived from the seed.
    Train { dropout_seed: u64 },
}

pub(crate) struct LayerTrace<F> {
    pub xhat1: Array2<F>,
    pub inv_std1: Array1<F>,
    pub q: Array2<F>,
    pub k: Array2<F>,
    pub v: Array2<F>,
    /// Attention probabilities, `(batch * heads * T, T)` in blocks of T rows.
    pub probs: Array2<F>,
    pub attn_concat: Array2<F>,
    pub mask1: Option<Array2<F>>,
    pub xhat2: Array2<F>,
    pub inv_std2: Array1<F>,
    pub h_pre: Array2<F>,
    pub h_act: Array2<F>,
    pub h_tanh: Array2<F>,
    pub mask2: Option<Array2<F>>,
}

/// Everything the backward pass needs about one chunk's forward run.
pub struct ChunkTrace<F> {
    pub(crate) ids: Vec<TokenSeq>,
    pub(crate) batch: usize,
    pub(crate) layers: Vec<LayerTrace<F>>,
    pub(crate) fln_xhat: Array2<F>,
    pub(crate) fln_inv_std: Array1<F>,
    pub(crate) cls_rows: Array2<F>,
    pub(crate) z: Array2<F>,
    pub(crate) norms: Array1<F>,
}

/// Encode one sequence. Equivalent to a batch of one.
pub fn forward<F: Real>(
    weights: &ModelWeights<F>,
    seq: &TokenSeq,
    mode: Mode,
) -> Result<Array1<F>, EncoderError> {
    let z = forward_batch(weights, std::slice::from_ref(seq), mode)?;
    Ok(z.row(0).to_owned())
}

/// Encode a batch; rows of the result are unit-norm embeddings in input
/// order. Eval mode is elementwise identical to per-example calls.
pub fn forward_batch<F: Real>(
    weights: &ModelWeights<F>,
    seqs: &[TokenSeq],
    mode: Mode,
) -> Result<Array2<F>, EncoderError> {
    let d = weights.config.embed_dim;
    if seqs.is_empty() {
        return Ok(Array2::zeros((0, d)));
    }
    tune_allocator();
    check_inputs(weights, seqs)?;
    let chunks: Vec<(usize, &[TokenSeq])> = seqs
        .chunks(CHUNK)
        .enumerate()
        .map(|(i, c)| (i * CHUNK, c))
        .collect();
    let results: Vec<Result<Array2<F>, EncoderError>> = chunks
        .par_iter()
        .map(|&(offset, chunk)| run_chunk(weights, chunk, offset, mode, false).map(|(z, _)| z))
        .collect();
    let mut out = Array2::zeros((seqs.len(), d));
    for (&(offset, chunk), result) in chunks.iter().zip(results) {
        let z = result?;
        out.slice_mut(s![offset..offset + chunk.len(), ..]).assign(&z);
    }
    Ok(out)
}

/// Forward pass that records per-chunk traces for [`crate::backward`].
pub fn forward_batch_traced<F: Real>(
    weights: &ModelWeights<F>,
    seqs: &[TokenSeq],
    mode: Mode,
) -> Result<(Array2<F>, Vec<ChunkTrace<F>>), EncoderError> {
    let d = weights.config.embed_dim;
    if seqs.is_empty() {
        return Ok((Array2::zeros((0, d)), Vec::new()));
    }
    tune_allocator();
    check_inputs(weights, seqs)?;
    let chunks: Vec<(usize, &[TokenSeq])> = seqs
        .chunks(CHUNK)
        .enumerate()
        .map(|(i, c)| (i * CHUNK, c))
        .collect();
    let results: Vec<Result<(Array2<F>, Option<ChunkTrace<F>>), EncoderError>> = chunks
        .par_iter()
        .map(|&(offset, chunk)| run_chunk(weights, chunk, offset, mode, true))
        .collect();
    let mut out = Array2::zeros((seqs.len(), d));
    let mut traces = Vec::with_capacity(chunks.len());
    for (&(offset, chunk), result) in chunks.iter().zip(results) {
        let (z, trace) = result?;
        out.slice_mut(s![offset..offset + chunk.len(), ..]).assign(&z);
        traces.push(trace.expect("trace requested"));
    }
    Ok((out, traces))
}

fn check_inputs<F: Real>(
    weights: &ModelWeights<F>,
    seqs: &[TokenSeq],
) -> Result<(), EncoderError> {
    let cfg = &weights.config;
    if cfg.seq_len != SEQ_LEN {
        return Err(EncoderError::SeqLen {
            expected: cfg.seq_len,
            got: SEQ_LEN,
        });
    }
    for seq in seqs {
        for &id in seq.ids() {
            if id as usize >= cfg.vocab_size {
                return Err(EncoderError::TokenRange {
                    id,
                    vocab: cfg.vocab_size,
                });
            }
        }
    }
    Ok(())
}

fn all_finite<F: Real>(x: &Array2<F>) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Run the full stack on up to [`CHUNK`] examples.
fn run_chunk<F: Real>(
    weights: &ModelWeights<F>,
    seqs: &[TokenSeq],
    example_offset: usize,
    mode: Mode,
    want_trace: bool,
) -> Result<(Array2<F>, Option<ChunkTrace<F>>), EncoderError> {
    let cfg = &weights.config;
    let p = &weights.params;
    let b = seqs.len();
    let t = cfg.padded_len();
    let h = cfg.hidden_dim;
    let heads = cfg.num_heads;
    let hd = cfg.head_dim();
    let n = b * t;

    // Token + positional embedding, CLS prepended in slot 0.
    let mut x = Array2::<F>::zeros((n, h));
    for (bi, seq) in seqs.iter().enumerate() {
        let base = bi * t;
        {
            let mut row = x.row_mut(base);
            row.assign(&p.cls);
            row += &p.pos_emb.row(0);
        }
        for (ti, &id) in seq.ids().iter().enumerate() {
            let mut row = x.row_mut(base + ti + 1);
            row.assign(&p.tok_emb.row(id as usize));
            row += &p.pos_emb.row(ti + 1);
        }
    }

    // Per-example dropout streams, consumed in a fixed order.
    let mut dropout: Option<Vec<ops::DropoutRng>> = match mode {
        Mode::Train { dropout_seed } if cfg.dropout_rate > 0.0 => Some(
            (0..b)
                .map(|bi| {
                    ops::DropoutRng::for_example(
                        dropout_seed,
                        (example_offset + bi) as u64,
                        cfg.dropout_rate,
                    )
                })
                .collect(),
        ),
        _ => None,
    };

    let scale: F = real(1.0 / (hd as f64).sqrt());
    let mut layer_traces: Vec<LayerTrace<F>> = Vec::new();

    for (layer_index, layer) in p.layers.iter().enumerate() {
        let (xhat1, inv_std1, a) = ops::layer_norm(&x, &layer.ln1);
        let q = ops::linear(&a, &layer.wq, &layer.bq);
        let k = ops::linear(&a, &layer.wk, &layer.bk);
        let v = ops::linear(&a, &layer.wv, &layer.bv);

        let mut attn_concat = Array2::<F>::zeros((n, h));
        let mut probs_store = Array2::<F>::zeros((b * heads * t, t));
        for bi in 0..b {
            let rows = bi * t..(bi + 1) * t;
            for head in 0..heads {
                let cols = head * hd..(head + 1) * hd;
                let qv = q.slice(s![rows.clone(), cols.clone()]);
                let kv = k.slice(s![rows.clone(), cols.clone()]);
                let vv = v.slice(s![rows.clone(), cols.clone()]);
                let mut scores = qv.dot(&kv.t());
                scores.mapv_inplace(|s| s * scale);
                ops::softmax_rows_inplace(&mut scores);
                let ov = scores.dot(&vv);
                attn_concat
                    .slice_mut(s![rows.clone(), cols.clone()])
                    .assign(&ov);
                let pr = (bi * heads + head) * t;
                probs_store.slice_mut(s![pr..pr + t, ..]).assign(&scores);
            }
        }

        let mut attn_out = ops::linear(&attn_concat, &layer.wo, &layer.bo);
        let mask1 = apply_dropout(&mut attn_out, &mut dropout, b, t, h);
        let x_mid = &x + &attn_out;

        let (xhat2, inv_std2, normed) = ops::layer_norm(&x_mid, &layer.ln2);
        let h_pre = ops::linear(&normed, &layer.w1, &layer.b1);
        let (h_act, h_tanh) = ops::gelu_with_cache(&h_pre);
        let mut mlp_out = ops::linear(&h_act, &layer.w2, &layer.b2);
        let mask2 = apply_dropout(&mut mlp_out, &mut dropout, b, t, h);
        let x_out = &x_mid + &mlp_out;

        if !all_finite(&x_out) {
            return Err(EncoderError::NonFinite { layer: layer_index });
        }

        if want_trace {
            layer_traces.push(LayerTrace {
                xhat1,
                inv_std1,
                q,
                k,
                v,
                probs: probs_store,
                attn_concat,
                mask1,
                xhat2,
                inv_std2,
                h_pre,
                h_act,
                h_tanh,
                mask2,
            });
        }
        x = x_out;
    }

    let (fln_xhat, fln_inv_std, y) = ops::layer_norm(&x, &p.final_ln);
    let mut cls_rows = Array2::<F>::zeros((b, h));
    for bi in 0..b {
        cls_rows.row_mut(bi).assign(&y.row(bi * t));
    }
    let u = ops::linear(&cls_rows, &p.proj_w, &p.proj_b);
    let (z, norms) = ops::normalize_rows(&u);
    if !all_finite(&z) {
        return Err(EncoderError::NonFinite {
            layer: p.layers.len(),
        });
    }

    let trace = want_trace.then(|| ChunkTrace {
        ids: seqs.to_vec(),
        batch: b,
        layers: layer_traces,
        fln_xhat,
        fln_inv_std,
        cls_rows,
        z: z.clone(),
        norms,
    });
    Ok((z, trace))
}

/// Multiply per-example dropout masks into `activations`; returns the mask
/// when dropout is active so backward can reuse it.
fn apply_dropout<F: Real>(
    activations: &mut Array2<F>,
    dropout: &mut Option<Vec<ops::DropoutRng>>,
    b: usize,
    t: usize,
    width: usize,
) -> Option<Array2<F>> {
    let rngs = dropout.as_mut()?;
    let mut mask = Array2::<F>::zeros((b * t, width));
    for (bi, rng) in rngs.iter_mut().enumerate() {
        let flat: Array1<F> = rng.mask(t * width);
        let block = flat
            .into_shape_with_order((t, width))
            .expect("mask reshape");
        mask.slice_mut(s![bi * t..(bi + 1) * t, ..]).assign(&block);
    }
    *activations *= &mask;
    Some(mask)
}

/// Mean embedding over the rows of `z` (used for advantage-axis math).
pub fn mean_rows<F: Real>(z: &Array2<F>) -> Array1<F> {
    let n: F = real(z.nrows() as f64);
    z.sum_axis(Axis(0)) / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EncoderConfig;
    use crate::tokenizer::tokenize;
    use meridian_chess::playout::random_playout;
    use meridian_chess::Position;

    fn tiny_weights() -> ModelWeights<f32> {
        ModelWeights::init(EncoderConfig::tiny(), 11)
    }

    #[test]
    fn outputs_are_unit_norm() {
        let w = tiny_weights();
        let positions = random_playout(5, 40);
        let seqs: Vec<TokenSeq> = positions.iter().map(tokenize).collect();
        let z = forward_batch(&w, &seqs, Mode::Eval).unwrap();
        for row in z.rows() {
            let norm: f32 = row.dot(&row).sqrt();
            assert!((norm - 1.0).abs() < 1e-5, "norm {norm}");
        }
    }

    #[test]
    fn eval_is_deterministic_bitwise() {
        let w = tiny_weights();
        let seq = tokenize(&Position::start());
        let a = forward(&w, &seq, Mode::Eval).unwrap();
        let b = forward(&w, &seq, Mode::Eval).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_matches_single_calls_in_eval() {
        let w = tiny_weights();
        let positions = random_playout(6, 40);
        let seqs: Vec<TokenSeq> = positions.iter().take(32).map(tokenize).collect();
        let batched = forward_batch(&w, &seqs, Mode::Eval).unwrap();
        for (i, seq) in seqs.iter().enumerate() {
            let single = forward(&w, seq, Mode::Eval).unwrap();
            for (a, b) in batched.row(i).iter().zip(single.iter()) {
                assert!((a - b).abs() < 1e-6, "row {i}");
            }
        }
    }

    #[test]
    fn batch_of_one_equals_forward() {
        let w = tiny_weights();
        let seq = tokenize(&Position::start());
        let batched = forward_batch(&w, std::slice::from_ref(&seq), Mode::Eval).unwrap();
        let single = forward(&w, &seq, Mode::Eval).unwrap();
        assert_eq!(batched.row(0).to_owned(), single);
    }

    #[test]
    fn train_mode_differs_but_is_seed_reproducible() {
        let w = tiny_weights();
        let seq = tokenize(&Position::start());
        let e = forward(&w, &seq, Mode::Eval).unwrap();
        let t1 = forward(&w, &seq, Mode::Train { dropout_seed: 5 }).unwrap();
        let t2 = forward(&w, &seq, Mode::Train { dropout_seed: 5 }).unwrap();
        let t3 = forward(&w, &seq, Mode::Train { dropout_seed: 6 }).unwrap();
        assert_eq!(t1, t2);
        assert_ne!(t1, e);
        assert_ne!(t1, t3);
    }

    #[test]
    fn permuting_batch_permutes_outputs() {
        let w = tiny_weights();
        let positions = random_playout(9, 30);
        let seqs: Vec<TokenSeq> = positions.iter().take(8).map(tokenize).collect();
        let forwardorder = forward_batch(&w, &seqs, Mode::Eval).unwrap();
        let reversed: Vec<TokenSeq> = seqs.iter().rev().copied().collect();
        let reverseorder = forward_batch(&w, &reversed, Mode::Eval).unwrap();
        for i in 0..seqs.len() {
            assert_eq!(
                forwardorder.row(i).to_owned(),
                reverseorder.row(seqs.len() - 1 - i).to_owned(),
                "cross-example leakage at {i}"
            );
        }
    }
}
