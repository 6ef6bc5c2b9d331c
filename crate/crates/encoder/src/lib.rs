//! Position tokenizer and transformer encoder.
//!
//! A position becomes a fixed-length sequence of 77 character-level tokens,
//! which the encoder maps to a unit-norm embedding: CLS token prepended,
//! learned positional encodings, pre-norm transformer layers with GELU and
//! dropout, then the final CLS state is projected and l2-normalized.
//!
//! The math is generic over `f32`/`f64`: production and checkpoints use
//! `f32`, while gradient tests instantiate `f64` for sharp
//! finite-difference comparisons.

pub mod backward;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod forward;
pub mod ops;
pub mod tokenizer;
pub mod tokens;
pub mod vocab;
pub mod weights;

pub use backward::backward;
pub use config::EncoderConfig;
pub use error::{CheckpointError, EncoderError, TokenizerError};
pub use forward::{forward, forward_batch, forward_batch_traced, ChunkTrace, Mode};
pub use tokenizer::{detokenize, fen_to_tokens, tokenize, tokens_to_fen};
pub use tokens::{TokenSeq, SEQ_LEN};
pub use weights::{Gradients, ModelWeights, ParamSet, Real};

/// Production scalar type.
pub type Scalar = f32;
