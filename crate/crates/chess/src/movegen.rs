//! Fully legal move generation.
//!
//! Moves are legal by construction: check evasion, pins, and castling
//! transit rules are resolved here rather than by a make/unmake filter.
//! The lone exception is en passant, whose discovered-check geometry is
//! rare enough that candidates are verified by applying them.

use crate::attacks;
use crate::bitboard::Bitboard;
use crate::moves::Move;
use crate::position::Position;
use crate::square::Square;
use crate::types::{CastlingRights, Color, PieceKind};

/// All legal moves in `pos`. Terminal positions yield an empty list.
pub fn legal_moves(pos: &Position) -> Vec<Move> {
    let mut moves = Vec::with_capacity(48);
    legal_moves_into(pos, &mut moves);
    moves
}

/// As [`legal_moves`], reusing the caller's buffer (cleared first).
pub fn legal_moves_into(pos: &Position, moves: &mut Vec<Move>) {
    moves.clear();
    let us = pos.side_to_move();
    let them = us.opponent();
    let ksq = pos.king_square(us);
    let occ = pos.occupied();
    let ours = pos.occupied_by(us);
    let theirs = pos.occupied_by(them);

    // Squares the king may not enter. Our king is removed from occupancy so
    // stepping away along a checking ray is still recognized as illegal.
    let occ_without_king = occ ^ Bitboard::from_square(ksq);
    let danger = pos.attacked_squares(them, occ_without_king);

    for to in attacks::king_attacks(ksq) & !ours & !danger {
        moves.push(Move::new(ksq, to));
    }

    let checkers = pos.attackers_to(ksq, them, occ);
    if checkers.count() >= 2 {
        return;
    }

    // In single check, non-king moves must capture the checker or block a
    // sliding check; otherwise every square is permitted.
    let check_mask = if checkers.is_empty() {
        Bitboard::FULL
    } else {
        checkers | attacks::between(ksq, checkers.first())
    };

    // Pinned pieces: the first enemy slider behind exactly one of our
    // pieces along a king ray pins it to that line.
    let rook_sliders = pos.pieces(them, PieceKind::Rook) | pos.pieces(them, PieceKind::Queen);
    let bishop_sliders =
        pos.pieces(them, PieceKind::Bishop) | pos.pieces(them, PieceKind::Queen);
    let snipers = (attacks::rook_attacks(ksq, theirs) & rook_sliders)
        | (attacks::bishop_attacks(ksq, theirs) & bishop_sliders);
    let mut pinned = Bitboard::EMPTY;
    for sniper in snipers {
        let blockers = attacks::between(ksq, sniper) & occ;
        if blockers.count() == 1 {
            pinned |= blockers;
        }
    }
    let pin_allowed = |from: Square| -> Bitboard {
        if pinned.contains(from) {
            attacks::line(ksq, from)
        } else {
            Bitboard::FULL
        }
    };

    // Knights: a pinned knight can never move.
    for from in pos.pieces(us, PieceKind::Knight) & !pinned {
        for to in attacks::knight_attacks(from) & !ours & check_mask {
            moves.push(Move::new(from, to));
        }
    }

    for from in pos.pieces(us, PieceKind::Bishop) | pos.pieces(us, PieceKind::Queen) {
        let targets =
            attacks::bishop_attacks(from, occ) & !ours & check_mask & pin_allowed(from);
        for to in targets {
            moves.push(Move::new(from, to));
        }
    }

    for from in pos.pieces(us, PieceKind::Rook) | pos.pieces(us, PieceKind::Queen) {
        let targets = attacks::rook_attacks(from, occ) & !ours & check_mask & pin_allowed(from);
        for to in targets {
            moves.push(Move::new(from, to));
        }
    }

    let start_rank = match us {
        Color::White => 1,
        Color::Black => 6,
    };
    let promo_rank = match us {
        Color::White => 7,
        Color::Black => 0,
    };
    for from in pos.pieces(us, PieceKind::Pawn) {
        let allowed = check_mask & pin_allowed(from);

        if let Some(step) = from.offset(0, us.forward()) {
            if !occ.contains(step) {
                if allowed.contains(step) {
                    push_pawn_move(moves, from, step, promo_rank);
                }
                if from.rank() == start_rank {
                    let double = from.offset(0, 2 * us.forward()).unwrap();
                    if !occ.contains(double) && allowed.contains(double) {
                        moves.push(Move::new(from, double));
                    }
                }
            }
        }

        for to in attacks::pawn_attacks(us, from) & theirs & allowed {
            push_pawn_move(moves, from, to, promo_rank);
        }

        // En passant: validated by applying, which also covers the case
        // where the capture resolves a check by removing the checker.
        if let Some(ep) = pos.en_passant_target() {
            if attacks::pawn_attacks(us, from).contains(ep) {
                let candidate = Move::new(from, ep);
                let after = pos.apply_move_unchecked(candidate);
                if !after.in_check(us) {
                    moves.push(candidate);
                }
            }
        }
    }

    if checkers.is_empty() {
        push_castling(pos, moves, us, ksq, occ, danger);
    }
}

fn push_pawn_move(moves: &mut Vec<Move>, from: Square, to: Square, promo_rank: u8) {
    if to.rank() == promo_rank {
        for kind in [
            PieceKind::Queen,
            PieceKind::Rook,
            PieceKind::Bishop,
            PieceKind::Knight,
        ] {
            moves.push(Move::promoting(from, to, kind));
        }
    } else {
        moves.push(Move::new(from, to));
    }
}

fn push_castling(
    pos: &Position,
    moves: &mut Vec<Move>,
    us: Color,
    ksq: Square,
    occ: Bitboard,
    danger: Bitboard,
) {
    let home = match us {
        Color::White => Square::E1,
        Color::Black => Square::E8,
    };
    // Rights can survive in hand-written FENs even when the pieces are
    // displaced; require the actual castling geometry before generating.
    if ksq != home {
        return;
    }
    let rank = home.rank();
    let rook = crate::types::Piece::new(us, PieceKind::Rook);

    if pos.castling_rights().has(CastlingRights::kingside_bit(us)) {
        let rook_home = Square::from_file_rank(7, rank);
        let f = Square::from_file_rank(5, rank);
        let g = Square::from_file_rank(6, rank);
        if pos.piece_at(rook_home) == Some(rook)
            && !occ.contains(f)
            && !occ.contains(g)
            && !danger.contains(f)
            && !danger.contains(g)
        {
            moves.push(Move::new(ksq, g));
        }
    }
    if pos.castling_rights().has(CastlingRights::queenside_bit(us)) {
        let rook_home = Square::from_file_rank(0, rank);
        let b = Square::from_file_rank(1, rank);
        let c = Square::from_file_rank(2, rank);
        let d = Square::from_file_rank(3, rank);
        if pos.piece_at(rook_home) == Some(rook)
            && !occ.contains(b)
            && !occ.contains(c)
            && !occ.contains(d)
            && !danger.contains(c)
            && !danger.contains(d)
        {
            moves.push(Move::new(ksq, c));
        }
    }
}
