//! FEN parsing and serialization.
//!
//! `emit_fen(parse_fen(t))` yields the canonical form of `t`: piece
//! placement uses maximal run lengths, castling rights appear in KQkq
//! order, and clocks print without leading zeros.

use crate::position::{InvalidPosition, Position};
use crate::square::Square;
use crate::types::{CastlingRights, Color, Piece};
use std::fmt;

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// Parse failures, naming the field at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FenError {
    FieldCount(usize),
    Placement(String),
    SideToMove(String),
    Castling(String),
    EnPassant(String),
    HalfmoveClock(String),
    FullmoveNumber(String),
    Invalid(InvalidPosition),
}

impl fmt::Display for FenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FenError::FieldCount(n) => write!(f, "expected 6 FEN fields, found {n}"),
            FenError::Placement(s) => write!(f, "bad placement field: {s}"),
            FenError::SideToMove(s) => write!(f, "bad side-to-move field: {s}"),
            FenError::Castling(s) => write!(f, "bad castling field: {s}"),
            FenError::EnPassant(s) => write!(f, "bad en-passant field: {s}"),
            FenError::HalfmoveClock(s) => write!(f, "bad halfmove clock: {s}"),
            FenError::FullmoveNumber(s) => write!(f, "bad fullmove number: {s}"),
            FenError::Invalid(e) => write!(f, "invalid position: {e}"),
        }
    }
}

impl std::error::Error for FenError {}

impl From<InvalidPosition> for FenError {
    fn from(e: InvalidPosition) -> FenError {
        FenError::Invalid(e)
    }
}

/// Parse a 6-field FEN string into a validated [`Position`].
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let mut pos = Position::empty();

    // Field 1: piece placement, rank 8 down to rank 1.
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::Placement(format!(
            "expected 8 ranks, found {}",
            ranks.len()
        )));
    }
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file: u8 = 0;
        for c in rank_text.chars() {
            if let Some(run) = c.to_digit(10) {
                if !(1..=8).contains(&run) {
                    return Err(FenError::Placement(format!("bad run length '{c}'")));
                }
                file += run as u8;
            } else if let Some(piece) = Piece::from_fen_char(c) {
                if file >= 8 {
                    return Err(FenError::Placement(format!(
                        "rank {} overflows 8 files",
                        rank + 1
                    )));
                }
                pos.set_piece(Square::from_file_rank(file, rank), piece);
                file += 1;
            } else {
                return Err(FenError::Placement(format!("unexpected character '{c}'")));
            }
        }
        if file != 8 {
            return Err(FenError::Placement(format!(
                "rank {} sums to {} files",
                rank + 1,
                file
            )));
        }
    }

    // Field 2: side to move.
    pos.set_side_to_move(match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_string())),
    });

    // Field 3: castling rights. Any order accepted, duplicates rejected.
    let mut rights = CastlingRights::NONE;
    if fields[2] != "-" {
        let mut bits = 0u8;
        for c in fields[2].chars() {
            let bit = match c {
                'K' => CastlingRights::WHITE_KINGSIDE,
                'Q' => CastlingRights::WHITE_QUEENSIDE,
                'k' => CastlingRights::BLACK_KINGSIDE,
                'q' => CastlingRights::BLACK_QUEENSIDE,
                _ => return Err(FenError::Castling(fields[2].to_string())),
            };
            if bits & bit != 0 {
                return Err(FenError::Castling(format!("duplicate '{c}'")));
            }
            bits |= bit;
        }
        rights = CastlingRights::new(bits);
    }
    pos.set_castling(rights);

    // Field 4: en passant target.
    let en_passant = match fields[3] {
        "-" => None,
        square_text => Some(
            Square::parse(square_text)
                .ok_or_else(|| FenError::EnPassant(square_text.to_string()))?,
        ),
    };
    pos.set_en_passant(en_passant);

    // Fields 5 and 6: clocks. Range checks live in `Position::validate`.
    let halfmove: u32 = fields[4]
        .parse()
        .map_err(|_| FenError::HalfmoveClock(fields[4].to_string()))?;
    let fullmove: u32 = fields[5]
        .parse()
        .map_err(|_| FenError::FullmoveNumber(fields[5].to_string()))?;
    if halfmove > u16::MAX as u32 {
        return Err(FenError::Invalid(InvalidPosition::HalfmoveClockRange(
            halfmove,
        )));
    }
    if fullmove > u16::MAX as u32 {
        return Err(FenError::Invalid(InvalidPosition::FullmoveNumberRange(
            fullmove,
        )));
    }
    pos.set_clocks(halfmove as u16, fullmove as u16);

    pos.validate()?;
    pos.rebuild_hash();
    Ok(pos)
}

/// Serialize to canonical FEN.
pub fn emit_fen(pos: &Position) -> String {
    let mut out = String::with_capacity(80);
    for rank in (0..8).rev() {
        let mut empty_run = 0;
        for file in 0..8 {
            match pos.piece_at(Square::from_file_rank(file, rank)) {
                Some(piece) => {
                    if empty_run > 0 {
                        out.push(char::from_digit(empty_run, 10).unwrap());
                        empty_run = 0;
                    }
                    out.push(piece.fen_char());
                }
                None => empty_run += 1,
            }
        }
        if empty_run > 0 {
            out.push(char::from_digit(empty_run, 10).unwrap());
        }
        if rank > 0 {
            out.push('/');
        }
    }
    out.push(' ');
    out.push(match pos.side_to_move() {
        Color::White => 'w',
        Color::Black => 'b',
    });
    out.push(' ');
    out.push_str(&pos.castling_rights().to_fen_field());
    out.push(' ');
    match pos.en_passant_target() {
        Some(sq) => out.push_str(&sq.to_string()),
        None => out.push('-'),
    }
    out.push_str(&format!(
        " {} {}",
        pos.halfmove_clock(),
        pos.fullmove_number()
    ));
    out
}
