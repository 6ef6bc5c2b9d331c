//! Moves and their coordinate ("UCI") notation.

use crate::square::Square;
use crate::types::PieceKind;
use std::fmt;

/// A move described by its endpoints plus an optional promotion piece.
/// Flags such as capture, castle, or en passant are derivable from the
/// position the move is applied to, so they are not stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveParseError(pub String);

impl fmt::Display for MoveParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid move notation: {}", self.0)
    }
}

impl std::error::Error for MoveParseError {}

impl Move {
    pub const fn new(from: Square, to: Square) -> Move {
        Move {
            from,
            to,
            promotion: None,
        }
    }

    pub const fn promoting(from: Square, to: Square, kind: PieceKind) -> Move {
        Move {
            from,
            to,
            promotion: Some(kind),
        }
    }

    /// Parse coordinate notation: "e2e4", "e7e8q".
    pub fn parse(s: &str) -> Result<Move, MoveParseError> {
        let err = || MoveParseError(s.to_string());
        if s.len() != 4 && s.len() != 5 {
            return Err(err());
        }
        let from = Square::parse(&s[0..2]).ok_or_else(err)?;
        let to = Square::parse(&s[2..4]).ok_or_else(err)?;
        let promotion = match s.len() {
            5 => {
                let c = s.chars().nth(4).unwrap();
                Some(PieceKind::from_promotion_char(c).ok_or_else(err)?)
            }
            _ => None,
        };
        Ok(Move {
            from,
            to,
            promotion,
        })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.from, self.to)?;
        if let Some(kind) = self.promotion {
            write!(f, "{}", kind.promotion_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_round_trip() {
        for text in ["e2e4", "g8f6", "e7e8q", "a2a1n"] {
            let m = Move::parse(text).unwrap();
            assert_eq!(m.to_string(), text);
        }
    }

    #[test]
    fn rejects_malformed() {
        for text in ["", "e2", "e2e9", "e7e8k", "e7e8x", "e2e4e5"] {
            assert!(Move::parse(text).is_err(), "accepted {text:?}");
        }
    }
}
