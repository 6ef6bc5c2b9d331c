//! Model parameters: layout, initialization, and uniform tensor access
//! for the optimizer, checkpoints, and gradient checks.

use crate::config::EncoderConfig;
use ndarray::{Array1, Array2};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar type the math runs in. Production uses `f32`; tests instantiate
/// `f64` for sharp finite-difference checks.
pub trait Real:
    ndarray::NdFloat + num_traits::Float + num_traits::FromPrimitive + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting a literal into the generic scalar type.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("finite literal")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LnParams<F> {
    pub gamma: Array1<F>,
    pub beta: Array1<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<F> {
    pub ln1: LnParams<F>,
    pub wq: Array2<F>,
    pub bq: Array1<F>,
    pub wk: Array2<F>,
    pub bk: Array1<F>,
    pub wv: Array2<F>,
    pub bv: Array1<F>,
    pub wo: Array2<F>,
    pub bo: Array1<F>,
    pub ln2: LnParams<F>,
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
}

/// Every trainable tensor. Doubles as the gradient container.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet<F> {
    pub tok_emb: Array2<F>,
    pub pos_emb: Array2<F>,
    pub cls: Array1<F>,
    pub layers: Vec<LayerParams<F>>,
    pub final_ln: LnParams<F>,
    pub proj_w: Array2<F>,
    pub proj_b: Array1<F>,
}

pub type Gradients<F> = ParamSet<F>;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights<F> {
    pub config: EncoderConfig,
    pub params: ParamSet<F>,
}

pub enum TensorView<'a, F> {
    D1(&'a Array1<F>),
    D2(&'a Array2<F>),
}

pub enum TensorViewMut<'a, F> {
    D1(&'a mut Array1<F>),
    D2(&'a mut Array2<F>),
}

impl<'a, F: Real> TensorView<'a, F> {
    pub fn len(&self) -> usize {
        match self {
            TensorView::D1(a) => a.len(),
            TensorView::D2(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Contiguous element view (all tensors are standard layout).
    pub fn as_slice(&self) -> &'a [F] {
        match self {
            TensorView::D1(a) => a.as_slice().expect("standard layout"),
            TensorView::D2(a) => a.as_slice().expect("standard layout"),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            TensorView::D1(a) => a.shape().to_vec(),
            TensorView::D2(a) => a.shape().to_vec(),
        }
    }
}

impl<'a, F: Real> TensorViewMut<'a, F> {
    pub fn as_slice_mut(&mut self) -> &mut [F] {
        match self {
            TensorViewMut::D1(a) => a.as_slice_mut().expect("standard layout"),
            TensorViewMut::D2(a) => a.as_slice_mut().expect("standard layout"),
        }
    }
}

impl<F: Real> ParamSet<F> {
    pub fn zeros(config: &EncoderConfig) -> ParamSet<F> {
        let h = config.hidden_dim;
        let d = config.embed_dim;
        let m = config.mlp_size;
        let ln = || LnParams {
            gamma: Array1::zeros(h),
            beta: Array1::zeros(h),
        };
        ParamSet {
            tok_emb: Array2::zeros((config.vocab_size, h)),
            pos_emb: Array2::zeros((config.padded_len(), h)),
            cls: Array1::zeros(h),
            layers: (0..config.num_layers)
                .map(|_| LayerParams {
                    ln1: ln(),
                    wq: Array2::zeros((h, h)),
                    bq: Array1::zeros(h),
                    wk: Array2::zeros((h, h)),
                    bk: Array1::zeros(h),
                    wv: Array2::zeros((h, h)),
                    bv: Array1::zeros(h),
                    wo: Array2::zeros((h, h)),
                    bo: Array1::zeros(h),
                    ln2: ln(),
                    w1: Array2::zeros((h, m)),
                    b1: Array1::zeros(m),
                    w2: Array2::zeros((m, h)),
                    b2: Array1::zeros(h),
                })
                .collect(),
            final_ln: ln(),
            proj_w: Array2::zeros((h, d)),
            proj_b: Array1::zeros(d),
        }
    }

    /// Named tensors in canonical order. Initialization, checkpoints, the
    /// optimizer, and finite-difference sampling all rely on this order
    /// being stable.
    pub fn tensors(&self) -> Vec<(String, TensorView<'_, F>)> {
        let mut out: Vec<(String, TensorView<'_, F>)> = vec![
            ("tok_emb".into(), TensorView::D2(&self.tok_emb)),
            ("pos_emb".into(), TensorView::D2(&self.pos_emb)),
            ("cls".into(), TensorView::D1(&self.cls)),
        ];
        for (i, layer) in self.layers.iter().enumerate() {
            let name = |field: &str| format!("layer{i}.{field}");
            out.push((name("ln1.gamma"), TensorView::D1(&layer.ln1.gamma)));
            out.push((name("ln1.beta"), TensorView::D1(&layer.ln1.beta)));
            out.push((name("wq"), TensorView::D2(&layer.wq)));
            out.push((name("bq"), TensorView::D1(&layer.bq)));
            out.push((name("wk"), TensorView::D2(&layer.wk)));
            out.push((name("bk"), TensorView::D1(&layer.bk)));
            out.push((name("wv"), TensorView::D2(&layer.wv)));
            out.push((name("bv"), TensorView::D1(&layer.bv)));
            out.push((name("wo"), TensorView::D2(&layer.wo)));
            out.push((name("bo"), TensorView::D1(&layer.bo)));
            out.push((name("ln2.gamma"), TensorView::D1(&layer.ln2.gamma)));
            out.push((name("ln2.beta"), TensorView::D1(&layer.ln2.beta)));
            out.push((name("w1"), TensorView::D2(&layer.w1)));
            out.push((name("b1"), TensorView::D1(&layer.b1)));
            out.push((name("w2"), TensorView::D2(&layer.w2)));
            out.push((name("b2"), TensorView::D1(&layer.b2)));
        }
        out.push(("final_ln.gamma".into(), TensorView::D1(&self.final_ln.gamma)));
        out.push(("final_ln.beta".into(), TensorView::D1(&self.final_ln.beta)));
        out.push(("proj_w".into(), TensorView::D2(&self.proj_w)));
        out.push(("proj_b".into(), TensorView::D1(&self.proj_b)));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, TensorViewMut<'_, F>)> {
        let mut out: Vec<(String, TensorViewMut<'_, F>)> = vec![
            ("tok_emb".into(), TensorViewMut::D2(&mut self.tok_emb)),
            ("pos_emb".into(), TensorViewMut::D2(&mut self.pos_emb)),
            ("cls".into(), TensorViewMut::D1(&mut self.cls)),
        ];
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let name = |field: &str| format!("layer{i}.{field}");
            out.push((name("ln1.gamma"), TensorViewMut::D1(&mut layer.ln1.gamma)));
            out.push((name("ln1.beta"), TensorViewMut::D1(&mut layer.ln1.beta)));
            out.push((name("wq"), TensorViewMut::D2(&mut layer.wq)));
            out.push((name("bq"), TensorViewMut::D1(&mut layer.bq)));
            out.push((name("wk"), TensorViewMut::D2(&mut layer.wk)));
            out.push((name("bk"), TensorViewMut::D1(&mut layer.bk)));
            out.push((name("wv"), TensorViewMut::D2(&mut layer.wv)));
            out.push((name("bv"), TensorViewMut::D1(&mut layer.bv)));
            out.push((name("wo"), TensorViewMut::D2(&mut layer.wo)));
            out.push((name("bo"), TensorViewMut::D1(&mut layer.bo)));
            out.push((name("ln2.gamma"), TensorViewMut::D1(&mut layer.ln2.gamma)));
            out.push((name("ln2.beta"), TensorViewMut::D1(&mut layer.ln2.beta)));
            out.push((name("w1"), TensorViewMut::D2(&mut layer.w1)));
            out.push((name("b1"), TensorViewMut::D1(&mut layer.b1)));
            out.push((name("w2"), TensorViewMut::D2(&mut layer.w2)));
            out.push((name("b2"), TensorViewMut::D1(&mut layer.b2)));
        }
        out.push((
            "final_ln.gamma".into(),
            TensorViewMut::D1(&mut self.final_ln.gamma),
        ));
        out.push((
            "final_ln.beta".into(),
            TensorViewMut::D1(&mut self.final_ln.beta),
        ));
        out.push(("proj_w".into(), TensorViewMut::D2(&mut self.proj_w)));
        out.push(("proj_b".into(), TensorViewMut::D1(&mut self.proj_b)));
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Elementwise accumulate: `self += other`.
    pub fn add_assign(&mut self, other: &ParamSet<F>) {
        let mut mine = self.tensors_mut();
        let theirs = other.tensors();
        debug_assert_eq!(mine.len(), theirs.len());
        for ((_, dst), (_, src)) in mine.iter_mut().zip(theirs.iter()) {
            let d = dst.as_slice_mut();
            let s = src.as_slice();
            for (a, &b) in d.iter_mut().zip(s.iter()) {
                *a = *a + b;
            }
        }
    }

    /// True when every element of every tensor is finite.
    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.as_slice().iter().all(|v| v.is_finite()))
    }

    /// Convert element type (f32 <-> f64), preserving structure.
    pub fn cast<G: Real>(&self) -> ParamSet<G> {
        fn conv1<F: Real, G: Real>(a: &Array1<F>) -> Array1<G> {
            a.mapv(|v| G::from_f64(v.to_f64().unwrap()).unwrap())
        }
        fn conv2<F: Real, G: Real>(a: &Array2<F>) -> Array2<G> {
            a.mapv(|v| G::from_f64(v.to_f64().unwrap()).unwrap())
        }
        ParamSet {
            tok_emb: conv2(&self.tok_emb),
            pos_emb: conv2(&self.pos_emb),
            cls: conv1(&self.cls),
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    ln1: LnParams {
                        gamma: conv1(&l.ln1.gamma),
                        beta: conv1(&l.ln1.beta),
                    },
                    wq: conv2(&l.wq),
                    bq: conv1(&l.bq),
                    wk: conv2(&l.wk),
                    bk: conv1(&l.bk),
                    wv: conv2(&l.wv),
                    bv: conv1(&l.bv),
                    wo: conv2(&l.wo),
                    bo: conv1(&l.bo),
                    ln2: LnParams {
                        gamma: conv1(&l.ln2.gamma),
                        beta: conv1(&l.ln2.beta),
                    },
                    w1: conv2(&l.w1),
                    b1: conv1(&l.b1),
                    w2: conv2(&l.w2),
                    b2: conv1(&l.b2),
                })
                .collect(),
            final_ln: LnParams {
                gamma: conv1(&self.final_ln.gamma),
                beta: conv1(&self.final_ln.beta),
            },
            proj_w: conv2(&self.proj_w),
            proj_b: conv1(&self.proj_b),
        }
    }
}

impl<F: Real> ModelWeights<F> {
    /// Fresh weights: truncated normal (std 0.02, cut at two sigma) for
    /// embeddings and weight matrices, zeros for biases, ones/zeros for
    /// layer norms. Deterministic in `seed`.
    pub fn init(config: EncoderConfig, seed: u64) -> ModelWeights<F> {
        config.validate().expect("config must be valid");
        let mut params: ParamSet<F> = ParamSet::zeros(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampler = TruncNormal::new(0.02);
        for (name, mut tensor) in params.tensors_mut() {
            let leaf = name.rsplit('.').next().unwrap_or(&name);
            let fill = match leaf {
                "gamma" => Some(F::one()),
                "beta" | "bq" | "bk" | "bv" | "bo" | "b1" | "b2" | "proj_b" => Some(F::zero()),
                _ => None,
            };
            let slice = tensor.as_slice_mut();
            match fill {
                Some(value) => slice.fill(value),
                None => {
                    for v in slice.iter_mut() {
                        *v = real(sampler.sample(&mut rng));
                    }
                }
            }
        }
        ModelWeights { config, params }
    }

    pub fn param_count(&self) -> usize {
        self.params.param_count()
    }

    pub fn cast<G: Real>(&self) -> ModelWeights<G> {
        ModelWeights {
            config: self.config,
            params: self.params.cast(),
        }
    }
}

/// Box-Muller normal sampler truncated at two standard deviations.
struct TruncNormal {
    std: f64,
    spare: Option<f64>,
}

impl TruncNormal {
    fn new(std: f64) -> TruncNormal {
        TruncNormal { std, spare: None }
    }

    fn sample(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        loop {
            let z = match self.spare.take() {
                Some(z) => z,
                None => {
                    let u1 = uniform_open(rng);
                    let u2 = uniform_open(rng);
                    let radius = (-2.0 * u1.ln()).sqrt();
                    let angle = 2.0 * std::f64::consts::PI * u2;
                    self.spare = Some(radius * angle.sin());
                    radius * angle.cos()
                }
            };
            if z.abs() <= 2.0 {
                return z * self.std;
            }
        }
    }
}

/// Uniform in (0, 1]; avoids ln(0).
fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) / (1u64 << 53) as f64
}
