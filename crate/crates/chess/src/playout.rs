//! Seeded random playouts. Test corpora and synthetic data generation both
//! need reproducible streams of plausible positions, so the generator and a
//! small dependency-free RNG live here.

use crate::movegen::legal_moves;
use crate::position::Position;
use crate::status::status;

/// SplitMix64: tiny, fast, and stable across platforms. Not for
/// cryptography; for reproducible sampling.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, bound)`; `bound` must be nonzero.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        // Widening-multiply rejection-free mapping; bias is < 2^-32 for the
        // small bounds used here.
        ((self.next_u64() >> 32).wrapping_mul(bound as u64) >> 32) as usize
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Play uniformly random legal moves from the start position until the
/// game ends or `max_plies` is reached. Returns every position visited,
/// starting position included.
pub fn random_playout(seed: u64, max_plies: usize) -> Vec<Position> {
    let mut rng = SplitMix64::new(seed);
    let mut positions = vec![Position::start()];
    for _ in 0..max_plies {
        let current = positions.last().unwrap();
        if status(current, &positions[..positions.len() - 1]).is_terminal() {
            break;
        }
        let moves = legal_moves(current);
        let mv = moves[rng.below(moves.len())];
        let next = current.apply_move_unchecked(mv);
        positions.push(next);
    }
    positions
}

/// Positions from `games` independent playouts, concatenated.
pub fn random_position_corpus(games: usize, max_plies: usize, seed: u64) -> Vec<Position> {
    let mut corpus = Vec::new();
    for game in 0..games {
        corpus.extend(random_playout(seed.wrapping_add(game as u64), max_plies));
    }
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn playouts_are_reproducible() {
        let a = random_playout(7, 60);
        let b = random_playout(7, 60);
        assert_eq!(a.len(), b.len());
        assert_eq!(a.last(), b.last());
        let c = random_playout(8, 60);
        assert!(a.last() != c.last() || a.len() != c.len());
    }

    #[test]
    fn playout_positions_are_valid() {
        for pos in random_playout(42, 120) {
            pos.validate().expect("playout produced invalid position");
        }
    }

    #[test]
    fn terminal_playouts_stop() {
        // Long budget: most random games end well before 600 plies, and a
        // finished game must not grow further.
        let positions = random_playout(3, 600);
        if positions.len() < 601 {
            let last = positions.last().unwrap();
            assert!(status(last, &positions[..positions.len() - 1]).is_terminal());
        }
    }
}
