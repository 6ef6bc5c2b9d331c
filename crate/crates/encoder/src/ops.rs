//! Neural net primitives: forward and backward for layer norm, GELU,
//! softmax, linear maps, dropout masks, and row normalization.
//!
//! Hot paths work on contiguous row slices; everything here sits inside
//! the training loop.

use crate::weights::{real, LnParams, Real};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LN_EPS: f64 = 1e-5;

fn row<F: Real>(a: &Array2<F>, r: usize) -> &[F] {
    let cols = a.ncols();
    &a.as_slice().expect("standard layout")[r * cols..(r + 1) * cols]
}

fn row_mut<F: Real>(a: &mut Array2<F>, r: usize) -> &mut [F] {
    let cols = a.ncols();
    &mut a.as_slice_mut().expect("standard layout")[r * cols..(r + 1) * cols]
}

/// Row-wise layer normalization. Returns `(xhat, inv_std, y)`.
pub fn layer_norm<F: Real>(
    x: &Array2<F>,
    ln: &LnParams<F>,
) -> (Array2<F>, Array1<F>, Array2<F>) {
    let (rows, cols) = x.dim();
    let eps: F = real(LN_EPS);
    let n: F = real(cols as f64);
    let mut xhat = Array2::zeros((rows, cols));
    let mut inv_std = Array1::zeros(rows);
    let mut y = Array2::zeros((rows, cols));
    let gamma = ln.gamma.as_slice().expect("standard layout");
    let beta = ln.beta.as_slice().expect("standard layout");
    for r in 0..rows {
        let xr = row(x, r);
        let mut mean = F::zero();
        for &v in xr {
            mean = mean + v;
        }
        mean = mean / n;
        let mut var = F::zero();
        for &v in xr {
            let d = v - mean;
            var = var + d * d;
        }
        let inv = F::one() / (var / n + eps).sqrt();
        inv_std[r] = inv;
        let hr = row_mut(&mut xhat, r);
        let yr = row_mut(&mut y, r);
        for c in 0..cols {
            let h = (xr[c] - mean) * inv;
            hr[c] = h;
            yr[c] = h * gamma[c] + beta[c];
        }
    }
    (xhat, inv_std, y)
}

/// Backward of [`layer_norm`]. Returns `(dx, dgamma, dbeta)`.
pub fn layer_norm_backward<F: Real>(
    dy: &Array2<F>,
    xhat: &Array2<F>,
    inv_std: &Array1<F>,
    ln: &LnParams<F>,
) -> (Array2<F>, Array1<F>, Array1<F>) {
    let (rows, cols) = dy.dim();
    let n: F = real(cols as f64);
    let mut dx = Array2::zeros((rows, cols));
    let mut dgamma = Array1::<F>::zeros(cols);
    let mut dbeta = Array1::<F>::zeros(cols);
    let gamma = ln.gamma.as_slice().expect("standard layout");
    let dg = dgamma.as_slice_mut().expect("standard layout");
    let db = dbeta.as_slice_mut().expect("standard layout");
    for r in 0..rows {
        let dyr = row(dy, r);
        let hr = row(xhat, r);
        let mut sum_dxhat = F::zero();
        let mut sum_dxhat_xhat = F::zero();
        for c in 0..cols {
            let d = dyr[c];
            dg[c] = dg[c] + d * hr[c];
            db[c] = db[c] + d;
            let dxhat = d * gamma[c];
            sum_dxhat = sum_dxhat + dxhat;
            sum_dxhat_xhat = sum_dxhat_xhat + dxhat * hr[c];
        }
        let mean_dxhat = sum_dxhat / n;
        let mean_dxhat_xhat = sum_dxhat_xhat / n;
        let inv = inv_std[r];
        let dxr = row_mut(&mut dx, r);
        for c in 0..cols {
            let dxhat = dyr[c] * gamma[c];
            dxr[c] = inv * (dxhat - mean_dxhat - hr[c] * mean_dxhat_xhat);
        }
    }
    (dx, dgamma, dbeta)
}

/// GELU with the tanh approximation used throughout the encoder.
#[inline]
pub fn gelu_scalar<F: Real>(x: F) -> F {
    let c: F = real(0.797_884_560_802_865_4); // sqrt(2/pi)
    let a: F = real(0.044715);
    let half: F = real(0.5);
    let inner = c * (x + a * x * x * x);
    half * x * (F::one() + inner.tanh())
}

#[inline]
pub fn gelu_grad_scalar<F: Real>(x: F) -> F {
    let c: F = real(0.797_884_560_802_865_4);
    let a: F = real(0.044715);
    let half: F = real(0.5);
    let three: F = real(3.0);
    let inner = c * (x + a * x * x * x);
    let t = inner.tanh();
    gelu_grad_from_tanh(x, t, c, a, half, three)
}

#[inline]
fn gelu_grad_from_tanh<F: Real>(x: F, t: F, c: F, a: F, half: F, three: F) -> F {
    let sech2 = F::one() - t * t;
    half * (F::one() + t) + half * x * sech2 * c * (F::one() + three * a * x * x)
}

pub fn gelu<F: Real>(x: &Array2<F>) -> Array2<F> {
    x.mapv(gelu_scalar)
}

/// GELU that also returns the tanh values so backward can skip
/// recomputing them.
pub fn gelu_with_cache<F: Real>(x: &Array2<F>) -> (Array2<F>, Array2<F>) {
    let c: F = real(0.797_884_560_802_865_4);
    let a: F = real(0.044715);
    let half: F = real(0.5);
    let mut y = Array2::zeros(x.dim());
    let mut cache = Array2::zeros(x.dim());
    let xs = x.as_slice().expect("standard layout");
    let ys = y.as_slice_mut().expect("standard layout");
    let ts = cache.as_slice_mut().expect("standard layout");
    for i in 0..xs.len() {
        let v = xs[i];
        let t = (c * (v + a * v * v * v)).tanh();
        ts[i] = t;
        ys[i] = half * v * (F::one() + t);
    }
    (y, cache)
}

pub fn gelu_backward<F: Real>(dy: &Array2<F>, x_pre: &Array2<F>) -> Array2<F> {
    let mut dx = dy.clone();
    dx.zip_mut_with(x_pre, |d, &x| *d = *d * gelu_grad_scalar(x));
    dx
}

/// Backward of GELU using the cached tanh values from
/// [`gelu_with_cache`].
pub fn gelu_backward_cached<F: Real>(
    dy: &Array2<F>,
    x_pre: &Array2<F>,
    tanh_cache: &Array2<F>,
) -> Array2<F> {
    let c: F = real(0.797_884_560_802_865_4);
    let a: F = real(0.044715);
    let half: F = real(0.5);
    let three: F = real(3.0);
    let mut dx = Array2::zeros(dy.dim());
    let ds = dx.as_slice_mut().expect("standard layout");
    let dys = dy.as_slice().expect("standard layout");
    let xs = x_pre.as_slice().expect("standard layout");
    let ts = tanh_cache.as_slice().expect("standard layout");
    for i in 0..ds.len() {
        ds[i] = dys[i] * gelu_grad_from_tanh(xs[i], ts[i], c, a, half, three);
    }
    dx
}

/// Row-wise softmax with max subtraction, in place.
pub fn softmax_rows_inplace<F: Real>(scores: &mut Array2<F>) {
    let cols = scores.ncols();
    let data = scores.as_slice_mut().expect("standard layout");
    for chunk in data.chunks_mut(cols) {
        let mut max = F::neg_infinity();
        for &v in chunk.iter() {
            if v > max {
                max = v;
            }
        }
        let mut sum = F::zero();
        for v in chunk.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        let inv = F::one() / sum;
        for v in chunk.iter_mut() {
            *v = *v * inv;
        }
    }
}

/// Backward of row softmax: `ds = (dp - rowsum(dp * p)) * p`.
pub fn softmax_backward<F: Real>(probs: &ArrayView2<F>, dprobs: &Array2<F>) -> Array2<F> {
    let (rows, cols) = probs.dim();
    let mut ds = Array2::zeros((rows, cols));
    let dss = ds.as_slice_mut().expect("standard layout");
    let dps = dprobs.as_slice().expect("standard layout");
    for r in 0..rows {
        let pr = probs.row(r);
        let pr = pr.as_slice().expect("row view contiguous");
        let dpr = &dps[r * cols..(r + 1) * cols];
        let out = &mut dss[r * cols..(r + 1) * cols];
        let mut dot = F::zero();
        for c in 0..cols {
            dot = dot + dpr[c] * pr[c];
        }
        for c in 0..cols {
            out[c] = (dpr[c] - dot) * pr[c];
        }
    }
    ds
}

/// `x (N,I) @ w (I,O) + b`, row-broadcast bias.
pub fn linear<F: Real>(x: &Array2<F>, w: &Array2<F>, b: &Array1<F>) -> Array2<F> {
    let mut y = x.dot(w);
    y += &b.view().insert_axis(Axis(0));
    y
}

/// Backward of [`linear`]: returns `(dx, dw, db)`.
pub fn linear_backward<F: Real>(
    x: &Array2<F>,
    w: &Array2<F>,
    dy: &Array2<F>,
) -> (Array2<F>, Array2<F>, Array1<F>) {
    let dx = dy.dot(&w.t());
    let dw = x.t().dot(dy);
    let db = dy.sum_axis(Axis(0));
    (dx, dw, db)
}

/// Normalize each row to unit length. Returns `(z, norms)`.
pub fn normalize_rows<F: Real>(u: &Array2<F>) -> (Array2<F>, Array1<F>) {
    let (rows, _) = u.dim();
    let mut z = u.clone();
    let mut norms = Array1::zeros(rows);
    for r in 0..rows {
        let zr = row_mut(&mut z, r);
        let mut sq = F::zero();
        for &v in zr.iter() {
            sq = sq + v * v;
        }
        let norm = sq.sqrt();
        norms[r] = norm;
        let inv = F::one() / norm;
        for v in zr.iter_mut() {
            *v = *v * inv;
        }
    }
    (z, norms)
}

/// Backward of row normalization: `du = (dz - z * (z . dz)) / norm`.
pub fn normalize_rows_backward<F: Real>(
    z: &Array2<F>,
    norms: &Array1<F>,
    dz: &Array2<F>,
) -> Array2<F> {
    let (rows, cols) = z.dim();
    let mut du = Array2::zeros((rows, cols));
    for r in 0..rows {
        let zr = row(z, r);
        let dzr = row(dz, r);
        let mut dot = F::zero();
        for c in 0..cols {
            dot = dot + zr[c] * dzr[c];
        }
        let inv = F::one() / norms[r];
        let dur = row_mut(&mut du, r);
        for c in 0..cols {
            dur[c] = (dzr[c] - zr[c] * dot) * inv;
        }
    }
    du
}

/// Inverted dropout mask for one example: entries are `0` (dropped) or
/// `1/(1-rate)` (kept, pre-scaled). The stream of masks an example sees is
/// a pure function of `(seed, example_index)`, so results are independent
/// of batch chunking or thread count.
pub struct DropoutRng {
    rng: ChaCha8Rng,
    rate: f64,
}

impl DropoutRng {
    pub fn for_example(seed: u64, example_index: u64, rate: f64) -> DropoutRng {
        // Mix the example index into the seed with a splitmix-style hash.
        let mut z = seed ^ example_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        DropoutRng {
            rng: ChaCha8Rng::seed_from_u64(z ^ (z >> 31)),
            rate,
        }
    }

    /// Next mask of `len` entries.
    pub fn mask<F: Real>(&mut self, len: usize) -> Array1<F> {
        let keep_scale: F = real(1.0 / (1.0 - self.rate));
        Array1::from_iter((0..len).map(|_| {
            let u = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            if u < self.rate {
                F::zero()
            } else {
                keep_scale
            }
        }))
    }
}
