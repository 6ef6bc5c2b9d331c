//! Classic material accounting, used by baseline opponents, stub scorers,
//! and synthetic annotation.

use crate::position::Position;
use crate::types::{Color, PieceKind};

/// Standard piece values in pawn units (king excluded).
pub const fn piece_value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 1,
        PieceKind::Knight => 3,
        PieceKind::Bishop => 3,
        PieceKind::Rook => 5,
        PieceKind::Queen => 9,
        PieceKind::King => 0,
    }
}

/// White material minus Black material, in pawn units.
pub fn material_balance(pos: &Position) -> i32 {
    let mut balance = 0;
    for kind in PieceKind::ALL {
        let value = piece_value(kind);
        balance += value * pos.pieces(Color::White, kind).count() as i32;
        balance -= value * pos.pieces(Color::Black, kind).count() as i32;
    }
    balance
}
