//! Synthetic annotated corpora.
//!
//! There is no bundled engine-annotated dataset, so training data is
//! produced by seeded playouts annotated with a material-logistic win
//! probability. Forced outcomes are labeled exactly: a checkmated board
//! and any position whose mover has a mate in one get probability 1.0/0.0,
//! which also supplies the decisive examples the advantage axis needs.

use meridian_chess::playout::SplitMix64;
use meridian_chess::status::{status, GameStatus};
use meridian_chess::{legal_moves, material_balance, Color, Position};
use std::io::Write;
use std::path::Path;

/// Logistic slope per pawn of material.
const SLOPE: f64 = 0.5;
/// Probability the generator plays the best material-greedy move instead
/// of a uniformly random one.
const GREEDY_BIAS: f64 = 0.65;

/// Mover-relative win probability for `pos` (matching the default ingest
/// perspective).
pub fn annotate_mover_relative(pos: &Position, history: &[Position]) -> f64 {
    let p_white = annotate_white_perspective(pos, history);
    match pos.side_to_move() {
        Color::White => p_white,
        Color::Black => 1.0 - p_white,
    }
}

/// White-perspective win probability: exact values for decided or
/// mate-in-one positions, material logistic otherwise.
pub fn annotate_white_perspective(pos: &Position, history: &[Position]) -> f64 {
    match status(pos, history) {
        GameStatus::Checkmate { winner: Color::White } => return 1.0,
        GameStatus::Checkmate { winner: Color::Black } => return 0.0,
        GameStatus::Stalemate
        | GameStatus::DrawByFiftyMove
        | GameStatus::DrawByRepetition
        | GameStatus::DrawByInsufficientMaterial => return 0.5,
        GameStatus::Ongoing => {}
    }
    if mate_in_one(pos).is_some() {
        return match pos.side_to_move() {
            Color::White => 1.0,
            Color::Black => 0.0,
        };
    }
    let m = material_balance(pos) as f64;
    1.0 / (1.0 + (-SLOPE * m).exp())
}

/// A move that checkmates immediately, if any.
pub fn mate_in_one(pos: &Position) -> Option<meridian_chess::Move> {
    legal_moves(pos).into_iter().find(|&m| {
        let after = pos.apply_move_unchecked(m);
        after.in_check(after.side_to_move()) && legal_moves(&after).is_empty()
    })
}

/// Generate at least `target_rows` annotated positions from seeded
/// playouts (mover-relative probabilities), truncated to the target.
pub fn generate_corpus(target_rows: usize, seed: u64) -> Vec<(Position, f64)> {
    let mut rows = Vec::with_capacity(target_rows + 256);
    let mut game = 0u64;
    while rows.len() < target_rows {
        play_annotated_game(seed.wrapping_add(game), 400, &mut rows);
        game += 1;
    }
    rows.truncate(target_rows);
    rows
}

fn play_annotated_game(seed: u64, max_plies: usize, out: &mut Vec<(Position, f64)>) {
    let mut rng = SplitMix64::new(seed);
    let mut history: Vec<Position> = Vec::new();
    let mut pos = Position::start();
    for _ in 0..max_plies {
        out.push((pos.clone(), annotate_mover_relative(&pos, &history)));
        if status(&pos, &history).is_terminal() {
            return;
        }
        let mv = choose_move(&pos, &mut rng);
        history.push(pos.clone());
        pos = pos.apply_move_unchecked(mv);
    }
    out.push((pos.clone(), annotate_mover_relative(&pos, &history)));
}

/// Playout policy: always mate in one when available, otherwise mostly
/// the best immediate material swing with some uniform noise. Decisive,
/// material-imbalanced games make for a usable evaluation signal.
fn choose_move(pos: &Position, rng: &mut SplitMix64) -> meridian_chess::Move {
    if let Some(mate) = mate_in_one(pos) {
        return mate;
    }
    let moves = legal_moves(pos);
    if rng.next_f64() < GREEDY_BIAS {
        let mover = pos.side_to_move();
        let gain = |m: &meridian_chess::Move| {
            let after = pos.apply_move_unchecked(*m);
            let balance = material_balance(&after);
            match mover {
                Color::White => balance,
                Color::Black => -balance,
            }
        };
        let best = moves.iter().map(gain).max().unwrap();
        let candidates: Vec<_> = moves.iter().copied().filter(|m| gain(m) == best).collect();
        candidates[rng.below(candidates.len())]
    } else {
        moves[rng.below(moves.len())]
    }
}

/// One `FEN<TAB>probability` row per line.
pub fn write_corpus_tsv(path: &Path, rows: &[(Position, f64)]) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (pos, p) in rows {
        writeln!(w, "{}\t{:.6}", meridian_chess::fen::emit_fen(pos), p)?;
    }
    w.flush()
}
