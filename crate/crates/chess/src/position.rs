//! The `Position` value type and move application.

use crate::attacks;
use crate::bitboard::Bitboard;
use crate::movegen;
use crate::moves::Move;
use crate::square::Square;
use crate::types::{CastlingRights, Color, Piece, PieceKind};
use crate::zobrist;
use std::fmt;
use std::sync::OnceLock;

/// Clock fields are bounded so positions stay representable in fixed-width
/// serial formats. Games reach these bounds only in pathological play; the
/// fifty-move rule ends real games long before.
pub const MAX_CLOCK: u16 = 999;

/// A complete chess game state. Immutable by construction: applying a move
/// returns a new position.
#[derive(Clone, PartialEq, Eq)]
pub struct Position {
    piece_bb: [[Bitboard; PieceKind::COUNT]; 2],
    occupancy: [Bitboard; 2],
    mailbox: [Option<Piece>; 64],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u16,
    fullmove_number: u16,
    hash: u64,
}

/// Ways a board state can violate the position invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidPosition {
    KingCount { color: Color, count: u32 },
    PawnOnBackRank(Square),
    EnPassantRank(Square),
    EnPassantNoPawn(Square),
    EnPassantBlocked(Square),
    HalfmoveClockRange(u32),
    FullmoveNumberRange(u32),
    NonMoverInCheck,
}

impl fmt::Display for InvalidPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidPosition::KingCount { color, count } => {
                write!(f, "{color} must have exactly one king, found {count}")
            }
            InvalidPosition::PawnOnBackRank(sq) => write!(f, "pawn on back rank at {sq}"),
            InvalidPosition::EnPassantRank(sq) => {
                write!(f, "en passant target {sq} not on rank 3 or 6")
            }
            InvalidPosition::EnPassantNoPawn(sq) => {
                write!(f, "en passant target {sq} has no double-pushed pawn")
            }
            InvalidPosition::EnPassantBlocked(sq) => {
                write!(f, "en passant target {sq} is not behind an empty square")
            }
            InvalidPosition::HalfmoveClockRange(v) => {
                write!(f, "halfmove clock {v} out of range 0..={MAX_CLOCK}")
            }
            InvalidPosition::FullmoveNumberRange(v) => {
                write!(f, "fullmove number {v} out of range 1..={MAX_CLOCK}")
            }
            InvalidPosition::NonMoverInCheck => {
                write!(f, "side not to move is in check")
            }
        }
    }
}

impl std::error::Error for InvalidPosition {}

/// Returned by [`Position::apply_move`] when the move is not legal here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IllegalMoveError {
    pub mv: Move,
}

impl fmt::Display for IllegalMoveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "illegal move {}", self.mv)
    }
}

impl std::error::Error for IllegalMoveError {}

impl Position {
    pub(crate) fn empty() -> Position {
        Position {
            piece_bb: [[Bitboard::EMPTY; PieceKind::COUNT]; 2],
            occupancy: [Bitboard::EMPTY; 2],
            mailbox: [None; 64],
            side_to_move: Color::White,
            castling: CastlingRights::NONE,
            en_passant: None,
            halfmove_clock: 0,
            fullmove_number: 1,
            hash: 0,
        }
    }

    /// Standard starting position.
    pub fn start() -> Position {
        static START: OnceLock<Position> = OnceLock::new();
        START
            .get_or_init(|| {
                crate::fen::parse_fen(crate::fen::START_FEN).expect("start FEN is valid")
            })
            .clone()
    }

    // -- accessors ----------------------------------------------------------

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.mailbox[sq.index()]
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn castling_rights(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn en_passant_target(&self) -> Option<Square> {
        self.en_passant
    }

    #[inline]
    pub fn halfmove_clock(&self) -> u16 {
        self.halfmove_clock
    }

    #[inline]
    pub fn fullmove_number(&self) -> u16 {
        self.fullmove_number
    }

    /// Zobrist hash over placement, side to move, castling rights, and the
    /// en passant target. Clocks are excluded.
    #[inline]
    pub fn hash(&self) -> u64 {
        self.hash
    }

    #[inline]
    pub fn pieces(&self, color: Color, kind: PieceKind) -> Bitboard {
        self.piece_bb[color.index()][kind.index()]
    }

    #[inline]
    pub fn occupied_by(&self, color: Color) -> Bitboard {
        self.occupancy[color.index()]
    }

    #[inline]
    pub fn occupied(&self) -> Bitboard {
        self.occupancy[0] | self.occupancy[1]
    }

    #[inline]
    pub fn king_square(&self, color: Color) -> Square {
        self.pieces(color, PieceKind::King).first()
    }

    // -- mutation helpers (crate-internal) -----------------------------------

    pub(crate) fn set_piece(&mut self, sq: Square, piece: Piece) {
        debug_assert!(self.mailbox[sq.index()].is_none());
        self.mailbox[sq.index()] = Some(piece);
        self.piece_bb[piece.color.index()][piece.kind.index()].insert(sq);
        self.occupancy[piece.color.index()].insert(sq);
        self.hash ^= zobrist::piece_key(piece, sq);
    }

    pub(crate) fn remove_piece(&mut self, sq: Square) -> Piece {
        let piece = self.mailbox[sq.index()].expect("remove_piece on empty square");
        self.mailbox[sq.index()] = None;
        self.piece_bb[piece.color.index()][piece.kind.index()].remove(sq);
        self.occupancy[piece.color.index()].remove(sq);
        self.hash ^= zobrist::piece_key(piece, sq);
        piece
    }

    pub(crate) fn set_side_to_move(&mut self, side: Color) {
        self.side_to_move = side;
    }

    pub(crate) fn set_castling(&mut self, rights: CastlingRights) {
        self.castling = rights;
    }

    pub(crate) fn set_en_passant(&mut self, target: Option<Square>) {
        self.en_passant = target;
    }

    pub(crate) fn set_clocks(&mut self, halfmove: u16, fullmove: u16) {
        self.halfmove_clock = halfmove;
        self.fullmove_number = fullmove;
    }

    /// Recompute the hash from scratch (parsing and tests).
    pub(crate) fn rebuild_hash(&mut self) {
        let mut h = 0u64;
        for sq in Square::all() {
            if let Some(piece) = self.mailbox[sq.index()] {
                h ^= zobrist::piece_key(piece, sq);
            }
        }
        h ^= zobrist::castling_key(self.castling);
        h ^= zobrist::en_passant_key(self.en_passant);
        h ^= zobrist::side_key(self.side_to_move);
        self.hash = h;
    }

    #[cfg(test)]
    pub(crate) fn recomputed_hash(&self) -> u64 {
        let mut copy = self.clone();
        copy.rebuild_hash();
        copy.hash
    }

    // -- attack queries -------------------------------------------------------

    /// All pieces of `by` that attack `sq`, computed over occupancy `occ`.
    pub fn attackers_to(&self, sq: Square, by: Color, occ: Bitboard) -> Bitboard {
        let rooks = self.pieces(by, PieceKind::Rook) | self.pieces(by, PieceKind::Queen);
        let bishops = self.pieces(by, PieceKind::Bishop) | self.pieces(by, PieceKind::Queen);
        (attacks::pawn_attacks(by.opponent(), sq) & self.pieces(by, PieceKind::Pawn))
            | (attacks::knight_attacks(sq) & self.pieces(by, PieceKind::Knight))
            | (attacks::king_attacks(sq) & self.pieces(by, PieceKind::King))
            | (attacks::rook_attacks(sq, occ) & rooks)
            | (attacks::bishop_attacks(sq, occ) & bishops)
    }

    /// Every square attacked by `color`, over occupancy `occ`.
    pub fn attacked_squares(&self, color: Color, occ: Bitboard) -> Bitboard {
        let mut att = Bitboard::EMPTY;
        for sq in self.pieces(color, PieceKind::Pawn) {
            att |= attacks::pawn_attacks(color, sq);
        }
        for sq in self.pieces(color, PieceKind::Knight) {
            att |= attacks::knight_attacks(sq);
        }
        for sq in self.pieces(color, PieceKind::King) {
            att |= attacks::king_attacks(sq);
        }
        for sq in self.pieces(color, PieceKind::Bishop) | self.pieces(color, PieceKind::Queen) {
            att |= attacks::bishop_attacks(sq, occ);
        }
        for sq in self.pieces(color, PieceKind::Rook) | self.pieces(color, PieceKind::Queen) {
            att |= attacks::rook_attacks(sq, occ);
        }
        att
    }

    #[inline]
    pub fn in_check(&self, color: Color) -> bool {
        let ksq = self.king_square(color);
        !self
            .attackers_to(ksq, color.opponent(), self.occupied())
            .is_empty()
    }

    // -- validation ----------------------------------------------------------

    /// Check every structural invariant. Called after parsing or decoding.
    pub fn validate(&self) -> Result<(), InvalidPosition> {
        for color in [Color::White, Color::Black] {
            let kings = self.pieces(color, PieceKind::King).count();
            if kings != 1 {
                return Err(InvalidPosition::KingCount {
                    color,
                    count: kings,
                });
            }
        }
        let back_ranks = Bitboard(0xff00_0000_0000_00ff);
        let pawns = self.pieces(Color::White, PieceKind::Pawn)
            | self.pieces(Color::Black, PieceKind::Pawn);
        if let Some(sq) = (pawns & back_ranks).iter().next() {
            return Err(InvalidPosition::PawnOnBackRank(sq));
        }
        if self.halfmove_clock > MAX_CLOCK {
            return Err(InvalidPosition::HalfmoveClockRange(
                self.halfmove_clock as u32,
            ));
        }
        if self.fullmove_number == 0 || self.fullmove_number > MAX_CLOCK {
            return Err(InvalidPosition::FullmoveNumberRange(
                self.fullmove_number as u32,
            ));
        }
        if let Some(target) = self.en_passant {
            // The target sits behind a pawn that just double-pushed, so the
            // mover's opponent owns that pawn and the two vacated squares
            // must be empty.
            let (pusher, expected_rank) = match self.side_to_move {
                Color::White => (Color::Black, 5),
                Color::Black => (Color::White, 2),
            };
            if target.rank() != expected_rank {
                return Err(InvalidPosition::EnPassantRank(target));
            }
            // The double-pushed pawn sits one step past the target (in the
            // pusher's direction); the vacated origin is one step behind it.
            let pawn_sq = Square::from_file_rank(
                target.file(),
                (target.rank() as i8 + pusher.forward()) as u8,
            );
            let origin_sq = Square::from_file_rank(
                target.file(),
                (target.rank() as i8 - pusher.forward()) as u8,
            );
            if self.piece_at(pawn_sq) != Some(Piece::new(pusher, PieceKind::Pawn)) {
                return Err(InvalidPosition::EnPassantNoPawn(target));
            }
            if self.piece_at(target).is_some() || self.piece_at(origin_sq).is_some() {
                return Err(InvalidPosition::EnPassantBlocked(target));
            }
        }
        if self.in_check(self.side_to_move.opponent()) {
            return Err(InvalidPosition::NonMoverInCheck);
        }
        Ok(())
    }

    // -- move application ------------------------------------------------------

    /// Apply a move after checking it is legal here. The original position
    /// is untouched; errors never leave a corrupted state behind.
    pub fn apply_move(&self, mv: Move) -> Result<Position, IllegalMoveError> {
        if movegen::legal_moves(self).contains(&mv) {
            Ok(self.apply_move_unchecked(mv))
        } else {
            Err(IllegalMoveError { mv })
        }
    }

    /// Apply a move that is already known to be legal (e.g. it came from
    /// [`crate::legal_moves`] on this very position). Passing an illegal
    /// move is a logic error and produces an unspecified board.
    pub fn apply_move_unchecked(&self, mv: Move) -> Position {
        let mut next = self.clone();
        let us = next.side_to_move;

        // Remove state-dependent hash components; re-added after mutation.
        next.hash ^= zobrist::castling_key(next.castling)
            ^ zobrist::en_passant_key(next.en_passant)
            ^ zobrist::side_key(next.side_to_move);

        let moving = next.mailbox[mv.from.index()].expect("move from empty square");
        debug_assert_eq!(moving.color, us);

        let mut is_capture = next.piece_at(mv.to).is_some();
        if is_capture {
            next.remove_piece(mv.to);
        }

        // En passant capture: pawn moves diagonally onto the empty target.
        if moving.kind == PieceKind::Pawn && Some(mv.to) == next.en_passant && !is_capture {
            let victim = Square::from_file_rank(
                mv.to.file(),
                (mv.to.rank() as i8 - us.forward()) as u8,
            );
            next.remove_piece(victim);
            is_capture = true;
        }

        next.remove_piece(mv.from);
        let placed = match mv.promotion {
            Some(kind) => Piece::new(us, kind),
            None => moving,
        };
        next.set_piece(mv.to, placed);

        // Castling: the king moves two files; bring the rook across.
        if moving.kind == PieceKind::King && mv.from.file().abs_diff(mv.to.file()) == 2 {
            let rank = mv.from.rank();
            let (rook_from, rook_to) = if mv.to.file() == 6 {
                (Square::from_file_rank(7, rank), Square::from_file_rank(5, rank))
            } else {
                (Square::from_file_rank(0, rank), Square::from_file_rank(3, rank))
            };
            let rook = next.remove_piece(rook_from);
            next.set_piece(rook_to, rook);
        }

        // Castling rights: king moves clear both; touching a rook home
        // square (by moving from it or capturing on it) clears that side.
        if moving.kind == PieceKind::King {
            next.castling.clear(
                CastlingRights::kingside_bit(us) | CastlingRights::queenside_bit(us),
            );
        }
        for sq in [mv.from, mv.to] {
            let bit = match sq {
                Square::A1 => CastlingRights::WHITE_QUEENSIDE,
                Square::H1 => CastlingRights::WHITE_KINGSIDE,
                Square::A8 => CastlingRights::BLACK_QUEENSIDE,
                Square::H8 => CastlingRights::BLACK_KINGSIDE,
                _ => continue,
            };
            next.castling.clear(bit);
        }

        // New en passant target only after a double pawn push.
        next.en_passant = if moving.kind == PieceKind::Pawn
            && mv.from.rank().abs_diff(mv.to.rank()) == 2
        {
            Some(Square::from_file_rank(
                mv.from.file(),
                (mv.from.rank() as i8 + us.forward()) as u8,
            ))
        } else {
            None
        };

        if moving.kind == PieceKind::Pawn || is_capture {
            next.halfmove_clock = 0;
        } else {
            next.halfmove_clock = next.halfmove_clock.saturating_add(1);
        }
        if us == Color::Black {
            next.fullmove_number = next.fullmove_number.saturating_add(1);
        }
        next.side_to_move = us.opponent();

        next.hash ^= zobrist::castling_key(next.castling)
            ^ zobrist::en_passant_key(next.en_passant)
            ^ zobrist::side_key(next.side_to_move);
        next
    }

    // -- identity & symmetry ----------------------------------------------------

    /// Repetition identity: placement, side to move, castling rights, and
    /// en passant target. Clocks are deliberately excluded.
    pub fn same_repetition_state(&self, other: &Position) -> bool {
        self.hash == other.hash
            && self.side_to_move == other.side_to_move
            && self.castling == other.castling
            && self.en_passant == other.en_passant
            && self.mailbox == other.mailbox
    }

    /// Color-mirrored position: ranks flipped, piece colors swapped, side,
    /// castling, and en passant adjusted to match. Clocks carry over.
    pub fn mirrored(&self) -> Position {
        let mut m = Position::empty();
        for sq in Square::all() {
            if let Some(piece) = self.piece_at(sq) {
                m.set_piece(
                    sq.mirrored(),
                    Piece::new(piece.color.opponent(), piece.kind),
                );
            }
        }
        m.side_to_move = self.side_to_move.opponent();
        m.castling = self.castling.color_swapped();
        m.en_passant = self.en_passant.map(Square::mirrored);
        m.halfmove_clock = self.halfmove_clock;
        m.fullmove_number = self.fullmove_number;
        m.rebuild_hash();
        m
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", crate::fen::emit_fen(self))?;
        for rank in (0..8).rev() {
            for file in 0..8 {
                let sq = Square::from_file_rank(file, rank);
                let c = self.piece_at(sq).map_or('.', |p| p.fen_char());
                write!(f, " {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fen::parse_fen;

    #[test]
    fn start_position_shape() {
        let pos = Position::start();
        assert_eq!(pos.side_to_move(), Color::White);
        assert_eq!(pos.occupied().count(), 32);
        assert_eq!(pos.castling_rights(), CastlingRights::ALL);
        assert_eq!(pos.king_square(Color::White), Square::E1);
    }

    #[test]
    fn apply_move_is_value_semantics() {
        let pos = Position::start();
        let e2e4 = Move::parse("e2e4").unwrap();
        let next = pos.apply_move(e2e4).unwrap();
        assert_eq!(pos, Position::start(), "original must be unmodified");
        assert_eq!(next.side_to_move(), Color::Black);
        assert_eq!(
            next.en_passant_target(),
            Some(Square::parse("e3").unwrap())
        );
    }

    #[test]
    fn illegal_move_is_rejected() {
        let pos = Position::start();
        let err = pos.apply_move(Move::parse("e2e5").unwrap()).unwrap_err();
        assert_eq!(err.mv, Move::parse("e2e5").unwrap());
    }

    #[test]
    fn halfmove_clock_resets_on_pawn_move_and_capture() {
        let pos = parse_fen("rnbqkbnr/ppp1pppp/8/3p4/4P3/7N/PPPP1PPP/RNBQKB1R w KQkq - 4 3")
            .unwrap();
        let after_capture = pos.apply_move(Move::parse("e4d5").unwrap()).unwrap();
        assert_eq!(after_capture.halfmove_clock(), 0);
        let after_knight = pos.apply_move(Move::parse("h3g5").unwrap()).unwrap();
        assert_eq!(after_knight.halfmove_clock(), 5);
    }

    #[test]
    fn castling_moves_rook_and_clears_rights() {
        let pos =
            parse_fen("r3k2r/pppppppp/8/8/8/8/PPPPPPPP/R3K2R w KQkq - 0 1").unwrap();
        let next = pos.apply_move(Move::parse("e1g1").unwrap()).unwrap();
        assert_eq!(
            next.piece_at(Square::F1),
            Some(Piece::new(Color::White, PieceKind::Rook))
        );
        assert_eq!(
            next.piece_at(Square::G1),
            Some(Piece::new(Color::White, PieceKind::King))
        );
        assert!(next.piece_at(Square::H1).is_none());
        assert!(!next.castling_rights().has(CastlingRights::WHITE_KINGSIDE));
        assert!(!next.castling_rights().has(CastlingRights::WHITE_QUEENSIDE));
        assert!(next.castling_rights().has(CastlingRights::BLACK_KINGSIDE));
    }

    #[test]
    fn en_passant_capture_removes_victim() {
        let pos =
            parse_fen("rnbqkbnr/ppp1p1pp/8/3pPp2/8/8/PPPP1PPP/RNBQKBNR w KQkq f6 0 3").unwrap();
        let next = pos.apply_move(Move::parse("e5f6").unwrap()).unwrap();
        assert!(next.piece_at(Square::parse("f5").unwrap()).is_none());
        assert_eq!(
            next.piece_at(Square::parse("f6").unwrap()),
            Some(Piece::new(Color::White, PieceKind::Pawn))
        );
    }

    #[test]
    fn incremental_hash_matches_recompute() {
        let mut pos = Position::start();
        for text in ["e2e4", "d7d5", "e4d5", "d8d5", "b1c3", "d5a5", "e1e2"] {
            pos = pos.apply_move(Move::parse(text).unwrap()).unwrap();
            assert_eq!(pos.hash(), pos.recomputed_hash(), "after {text}");
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        let pos =
            parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1")
                .unwrap();
        assert_eq!(pos.mirrored().mirrored(), pos);
        assert_eq!(pos.mirrored().side_to_move(), Color::Black);
    }

    #[test]
    fn validate_rejects_missing_king() {
        assert!(parse_fen("8/8/8/8/8/8/8/8 w - - 0 1").is_err());
    }
}
