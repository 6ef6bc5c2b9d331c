//! Dataset handling and contrastive training for the encoder.

pub mod batch;
pub mod dataset;
pub mod error;
pub mod loss;
pub mod scan;
pub mod sgd;
pub mod synth;
pub mod trainer;

pub use batch::{mask_from_probs, Sampler, TrainBatch, POSITIVES_PER_ANCHOR};
pub use dataset::{
    build_positive_index, ingest, ingest_reader, AnnotatedPosition, Dataset, PositiveIndex,
    ProbPerspective,
};
pub use error::{IngestError, LossError, TrainError};
pub use loss::{supcon_loss, LossReport};
pub use sgd::{sgd_step, SgdState};
pub use trainer::{train, StepRecord, TrainConfig, TrainOutcome};
