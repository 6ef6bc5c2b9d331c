//! Perft: exhaustive legal-move counting for move-generator verification.

use crate::movegen::{legal_moves, legal_moves_into};
use crate::position::Position;

/// Count leaf nodes of the legal-move tree to `depth`, using bulk counting
/// at the final level (the move list length stands in for applying each
/// move).
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let mut buf = Vec::with_capacity(64);
    legal_moves_into(pos, &mut buf);
    if depth == 1 {
        return buf.len() as u64;
    }
    buf.iter()
        .map(|&m| perft(&pos.apply_move_unchecked(m), depth - 1))
        .sum()
}

/// Perft without the bulk-counting shortcut: every move down to the leaves
/// is actually applied. Slower; exists as an internal cross-check of
/// `apply_move` against the specialized counting path.
pub fn perft_by_apply(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    legal_moves(pos)
        .iter()
        .map(|&m| perft_by_apply(&pos.apply_move_unchecked(m), depth - 1))
        .sum()
}

/// Per-root-move breakdown ("divide"), handy when hunting discrepancies.
pub fn perft_divide(pos: &Position, depth: u32) -> Vec<(String, u64)> {
    let mut rows: Vec<(String, u64)> = legal_moves(pos)
        .iter()
        .map(|&m| {
            let nodes = if depth <= 1 {
                1
            } else {
                perft(&pos.apply_move_unchecked(m), depth - 1)
            };
            (m.to_string(), nodes)
        })
        .collect();
    rows.sort();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fen::parse_fen;

    #[test]
    fn start_position_shallow() {
        let pos = Position::start();
        assert_eq!(perft(&pos, 1), 20);
        assert_eq!(perft(&pos, 2), 400);
        assert_eq!(perft(&pos, 3), 8_902);
        assert_eq!(perft(&pos, 4), 197_281);
    }

    #[test]
    fn kiwipete_shallow() {
        let pos =
            parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1")
                .unwrap();
        assert_eq!(perft(&pos, 1), 48);
        assert_eq!(perft(&pos, 2), 2_039);
        assert_eq!(perft(&pos, 3), 97_862);
    }

    #[test]
    fn tricky_positions_shallow() {
        let cases: [(&str, &[u64]); 3] = [
            ("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1", &[14, 191, 2_812, 43_238]),
            (
                "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1",
                &[6, 264, 9_467, 422_333],
            ),
            (
                "rnbq1k1r/pp1Pbppp/2p5/8/2B5/8/PPP1NnPP/RNBQK2R w KQ - 1 8",
                &[44, 1_486, 62_379],
            ),
        ];
        for (fen, expected) in cases {
            let pos = parse_fen(fen).unwrap();
            for (i, &nodes) in expected.iter().enumerate() {
                assert_eq!(perft(&pos, i as u32 + 1), nodes, "{fen} depth {}", i + 1);
            }
        }
    }

    #[test]
    fn bulk_and_apply_paths_agree() {
        let fens = [
            crate::fen::START_FEN,
            "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1",
            "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
        ];
        for fen in fens {
            let pos = parse_fen(fen).unwrap();
            for depth in 1..=3 {
                assert_eq!(
                    perft(&pos, depth),
                    perft_by_apply(&pos, depth),
                    "{fen} depth {depth}"
                );
            }
        }
    }
}
