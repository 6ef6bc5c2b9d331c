//! Game termination detection.

use crate::bitboard::Bitboard;
use crate::movegen::legal_moves;
use crate::position::Position;
use crate::types::{Color, PieceKind};

/// Terminal classification of a position within its game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameStatus {
    Ongoing,
    Checkmate { winner: Color },
    Stalemate,
    DrawByFiftyMove,
    DrawByRepetition,
    DrawByInsufficientMaterial,
}

impl GameStatus {
    pub fn is_terminal(self) -> bool {
        self != GameStatus::Ongoing
    }
}

/// Classify `pos` given every earlier position of the game (`history`,
/// oldest first, not including `pos` itself).
pub fn status(pos: &Position, history: &[Position]) -> GameStatus {
    let base = status_ignoring_repetition(pos);
    if base != GameStatus::Ongoing {
        return base;
    }
    let repeats = 1 + history
        .iter()
        .filter(|earlier| earlier.same_repetition_state(pos))
        .count();
    if repeats >= 3 {
        return GameStatus::DrawByRepetition;
    }
    GameStatus::Ongoing
}

/// History-free classification: mate, stalemate, the fifty-move rule, and
/// insufficient material. Used by search, where no game history exists.
pub fn status_ignoring_repetition(pos: &Position) -> GameStatus {
    if legal_moves(pos).is_empty() {
        return if pos.in_check(pos.side_to_move()) {
            GameStatus::Checkmate {
                winner: pos.side_to_move().opponent(),
            }
        } else {
            GameStatus::Stalemate
        };
    }
    if pos.halfmove_clock() >= 100 {
        return GameStatus::DrawByFiftyMove;
    }
    if insufficient_material(pos) {
        return GameStatus::DrawByInsufficientMaterial;
    }
    GameStatus::Ongoing
}

/// Neither side can possibly deliver mate: bare kings, a single minor
/// piece, or bishops all confined to one square color.
fn insufficient_material(pos: &Position) -> bool {
    const LIGHT_SQUARES: Bitboard = Bitboard(0x55aa_55aa_55aa_55aa);

    let mut minors = Bitboard::EMPTY;
    let mut bishops = Bitboard::EMPTY;
    for color in [Color::White, Color::Black] {
        if !(pos.pieces(color, PieceKind::Pawn).is_empty()
            && pos.pieces(color, PieceKind::Rook).is_empty()
            && pos.pieces(color, PieceKind::Queen).is_empty())
        {
            return false;
        }
        minors |= pos.pieces(color, PieceKind::Knight) | pos.pieces(color, PieceKind::Bishop);
        bishops |= pos.pieces(color, PieceKind::Bishop);
    }
    if minors.count() <= 1 {
        return true;
    }
    if minors == bishops {
        let on_light = (bishops & LIGHT_SQUARES).count();
        return on_light == 0 || on_light == bishops.count();
    }
    false
}
