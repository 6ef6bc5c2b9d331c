//! Error types for tokenization, encoding, and checkpoint I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("board field: {0}")]
    Board(String),
    #[error("side field: {0}")]
    Side(String),
    #[error("castling field: {0}")]
    Castling(String),
    #[error("en-passant field: {0}")]
    EnPassant(String),
    #[error("clock field: {0}")]
    Clock(String),
    #[error("token sequence must have length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("token id {id} at index {index} is outside the vocabulary")]
    TokenRange { index: usize, id: u8 },
    #[error("character '{0}' is not in the vocabulary")]
    UnknownChar(char),
    #[error("decoded position is invalid: {0}")]
    InvalidPosition(#[from] meridian_chess::FenError),
}

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("invalid encoder config: {0}")]
    Config(String),
    #[error("sequence length {got} does not match configured {expected}")]
    SeqLen { expected: usize, got: usize },
    #[error("token id {id} exceeds vocab size {vocab}")]
    TokenRange { id: u8, vocab: usize },
    #[error("non-finite values produced in layer {layer}")]
    NonFinite { layer: usize },
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: String,
        got: String,
    },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("config: {0}")]
    Config(String),
}
