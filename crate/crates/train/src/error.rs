//! Error types for ingestion, loss computation, and training.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

#[derive(Debug, Error)]
pub enum LossError {
    #[error("temperature must be positive, got {0}")]
    BadTau(f64),
    #[error("mask is {rows}x{cols} but the batch has {batch} rows")]
    MaskShape {
        rows: usize,
        cols: usize,
        batch: usize,
    },
    #[error("mask diagonal must be false (row {0})")]
    MaskDiagonal(usize),
    #[error("mask must be symmetric (rows {0} and {1} disagree)")]
    MaskAsymmetric(usize, usize),
    #[error("embeddings contain non-finite values")]
    NonFiniteEmbedding,
    #[error("loss evaluated to a non-finite value")]
    NonFiniteLoss,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid train config: {0}")]
    Config(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("no anchor has enough positives (need {needed})")]
    NoEligibleAnchors { needed: usize },
    #[error("gradient contains non-finite values at step {step}")]
    NonFiniteGradient { step: usize },
    #[error("loss failure at step {step}: {source}")]
    Loss {
        step: usize,
        #[source]
        source: LossError,
    },
    #[error("encoder failure at step {step}: {source}")]
    Encoder {
        step: usize,
        #[source]
        source: meridian_encoder::EncoderError,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] meridian_encoder::CheckpointError),
}
