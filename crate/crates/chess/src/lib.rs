//! Chess rules substrate: board representation, FEN parsing and
//! serialization, fully legal move generation, and game-termination
//! detection.
//!
//! Everything here is a pure value type. `Position` is immutable once
//! built; applying a move produces a fresh position. That keeps the
//! search, the match harness, and the training pipeline free to share
//! positions across threads without locks.

pub mod attacks;
pub mod bitboard;
pub mod fen;
pub mod material;
pub mod movegen;
pub mod moves;
pub mod perft;
pub mod playout;
pub mod position;
pub mod san;
pub mod square;
pub mod status;
pub mod types;
pub mod zobrist;

pub use bitboard::Bitboard;
pub use fen::{FenError, START_FEN};
pub use material::{material_balance, piece_value};
pub use movegen::legal_moves;
pub use moves::{Move, MoveParseError};
pub use perft::{perft, perft_by_apply};
pub use playout::SplitMix64;
pub use position::{IllegalMoveError, Position};
pub use san::san;
pub use square::Square;
pub use status::{status, GameStatus};
pub use types::{CastlingRights, Color, Piece, PieceKind};
