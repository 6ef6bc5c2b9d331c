use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("cannot build an axis from an empty {0} set")]
    EmptySet(&'static str),
    #[error("advantage axis is degenerate (norm {norm:e})")]
    DegenerateAxis { norm: f64 },
    #[error("no legal moves at the search root")]
    NoLegalMoves,
    #[error("scoring failed: {0}")]
    Scorer(String),
    #[error("invalid plan config: {0}")]
    Config(String),
    #[error("axis file io: {0}")]
    Io(#[from] std::io::Error),
    #[error("axis file corrupt: {0}")]
    CorruptAxisFile(String),
    #[error(transparent)]
    Encoder(#[from] meridian_encoder::EncoderError),
}
