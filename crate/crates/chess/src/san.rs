//! Standard algebraic notation output (for PGN export). Coordinate
//! notation remains the authoritative move format everywhere else.

use crate::movegen::legal_moves;
use crate::moves::Move;
use crate::position::Position;
use crate::types::PieceKind;

/// Render a legal move in SAN. The caller guarantees legality; the result
/// for an illegal move is unspecified text.
pub fn san(pos: &Position, mv: Move) -> String {
    let piece = match pos.piece_at(mv.from) {
        Some(p) => p,
        None => return mv.to_string(),
    };
    let is_en_passant =
        piece.kind == PieceKind::Pawn && Some(mv.to) == pos.en_passant_target();
    let is_capture = pos.piece_at(mv.to).is_some() || is_en_passant;

    let mut text = String::new();
    if piece.kind == PieceKind::King && mv.from.file().abs_diff(mv.to.file()) == 2 {
        text.push_str(if mv.to.file() == 6 { "O-O" } else { "O-O-O" });
    } else if piece.kind == PieceKind::Pawn {
        if is_capture {
            text.push((b'a' + mv.from.file()) as char);
            text.push('x');
        }
        text.push_str(&mv.to.to_string());
        if let Some(kind) = mv.promotion {
            text.push('=');
            text.push(kind.promotion_char().to_ascii_uppercase());
        }
    } else {
        text.push(piece.kind.promotion_char().to_ascii_uppercase());
        // Disambiguate among same-kind pieces that can also reach the target.
        let rivals: Vec<_> = legal_moves(pos)
            .into_iter()
            .filter(|other| {
                other.to == mv.to
                    && other.from != mv.from
                    && pos.piece_at(other.from).map(|p| p.kind) == Some(piece.kind)
            })
            .map(|other| other.from)
            .collect();
        if !rivals.is_empty() {
            let file_clashes = rivals.iter().any(|sq| sq.file() == mv.from.file());
            let rank_clashes = rivals.iter().any(|sq| sq.rank() == mv.from.rank());
            if !file_clashes {
                text.push((b'a' + mv.from.file()) as char);
            } else if !rank_clashes {
                text.push((b'1' + mv.from.rank()) as char);
            } else {
                text.push_str(&mv.from.to_string());
            }
        }
        if is_capture {
            text.push('x');
        }
        text.push_str(&mv.to.to_string());
    }

    let after = pos.apply_move_unchecked(mv);
    if after.in_check(after.side_to_move()) {
        text.push(if legal_moves(&after).is_empty() {
            '#'
        } else {
            '+'
        });
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fen::parse_fen;

    fn san_of(fen: &str, mv: &str) -> String {
        san(&parse_fen(fen).unwrap(), Move::parse(mv).unwrap())
    }

    #[test]
    fn basic_piece_and_pawn_moves() {
        let start = crate::fen::START_FEN;
        assert_eq!(san_of(start, "e2e4"), "e4");
        assert_eq!(san_of(start, "g1f3"), "Nf3");
    }

    #[test]
    fn captures_and_en_passant() {
        assert_eq!(
            san_of(
                "rnbqkbnr/ppp1pppp/8/3p4/4P3/8/PPPP1PPP/RNBQKBNR w KQkq - 0 2",
                "e4d5"
            ),
            "exd5"
        );
        assert_eq!(
            san_of(
                "rnbqkbnr/ppp1p1pp/8/3pPp2/8/8/PPPP1PPP/RNBQKBNR w KQkq f6 0 3",
                "e5f6"
            ),
            "exf6"
        );
    }

    #[test]
    fn disambiguation_by_file_rank_or_both() {
        // Two knights on the same rank reach d2: file disambiguates.
        assert_eq!(san_of("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1", "b1d2"), "Nbd2");
        // Two rooks on the same file reach a5: rank disambiguates.
        assert_eq!(san_of("R7/7k/8/8/8/8/8/R3K3 w - - 0 1", "a1a5"), "R1a5");
    }

    #[test]
    fn castling_check_and_mate_suffixes() {
        assert_eq!(
            san_of("r3k2r/pppppppp/8/8/8/8/PPPPPPPP/R3K2R w KQkq - 0 1", "e1g1"),
            "O-O"
        );
        assert_eq!(
            san_of("r3k2r/pppppppp/8/8/8/8/PPPPPPPP/R3K2R b KQkq - 0 1", "e8c8"),
            "O-O-O"
        );
        assert_eq!(san_of("4k3/8/8/8/8/8/8/R3K3 w - - 0 1", "a1a8"), "Ra8+");
        // Back-rank mate.
        assert_eq!(
            san_of("6k1/5ppp/8/8/8/8/8/R3K3 w - - 0 1", "a1a8"),
            "Ra8#"
        );
        // Promotion with mate.
        assert_eq!(
            san_of("6k1/4P1pp/5K2/8/8/8/8/8 w - - 0 1", "e7e8q"),
            "e8=Q#"
        );
    }
}
