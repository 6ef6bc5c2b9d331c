//! Annotated positions: ingestion, White-perspective normalization, and
//! the margin-based positive index.

use crate::error::IngestError;
use meridian_chess::fen::parse_fen;
use meridian_chess::{Color, Position};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::BufRead;
use std::path::Path;

/// A position plus its win probability from White's perspective.
#[derive(Clone, Debug)]
pub struct AnnotatedPosition {
    pub position: Position,
    pub p_white: f64,
}

/// How probabilities are oriented in the source file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbPerspective {
    /// Values favor the player to move (the default for engine-annotated
    /// corpora).
    Mover,
    /// Values already favor White.
    White,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub rows: Vec<AnnotatedPosition>,
    pub skipped: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Seed-reproducible shuffle-and-split into (train, holdout).
    pub fn split(mut self, holdout_fraction: f64, seed: u64) -> (Dataset, Dataset) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.rows.shuffle(&mut rng);
        let holdout = (self.rows.len() as f64 * holdout_fraction).round() as usize;
        let holdout = holdout.min(self.rows.len());
        let tail = self.rows.split_off(self.rows.len() - holdout);
        (
            Dataset {
                rows: self.rows,
                skipped: self.skipped,
            },
            Dataset {
                rows: tail,
                skipped: 0,
            },
        )
    }
}

/// Read a `FEN<TAB>probability` file. Invalid rows are counted and
/// skipped, never fatal. Row order is preserved.
pub fn ingest(path: &Path, perspective: ProbPerspective) -> Result<Dataset, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::Io(path.into(), e))?;
    ingest_reader(std::io::BufReader::new(file), perspective)
}

pub fn ingest_reader(
    reader: impl BufRead,
    perspective: ProbPerspective,
) -> Result<Dataset, IngestError> {
    let mut ds = Dataset::default();
    for line in reader.lines() {
        let line = line.map_err(|e| IngestError::Io("<reader>".into(), e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_row(line, perspective) {
            Some(row) => ds.rows.push(row),
            None => ds.skipped += 1,
        }
    }
    Ok(ds)
}

fn parse_row(line: &str, perspective: ProbPerspective) -> Option<AnnotatedPosition> {
    let (fen, prob_text) = line.rsplit_once('\t')?;
    let p: f64 = prob_text.trim().parse().ok()?;
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return None;
    }
    let position = parse_fen(fen.trim()).ok()?;
    let p_white = match perspective {
        ProbPerspective::White => p,
        ProbPerspective::Mover => match position.side_to_move() {
            Color::White => p,
            Color::Black => 1.0 - p,
        },
    };
    Some(AnnotatedPosition { position, p_white })
}

/// Positive sets under margin delta, built over p-sorted ranks so each
/// anchor's neighbors form a contiguous rank window. Memory stays linear
/// even when the sets themselves are quadratic.
#[derive(Clone, Debug)]
pub struct PositiveIndex {
    delta: f64,
    /// Dataset ids in ascending p order (ties broken by id).
    sorted_ids: Vec<u32>,
    /// Dataset id -> rank in `sorted_ids`.
    rank_of: Vec<u32>,
    /// Per dataset id: half-open rank window of its delta-neighbors
    /// (window includes the anchor's own rank).
    windows: Vec<(u32, u32)>,
}

pub fn build_positive_index(ds: &Dataset, delta: f64) -> PositiveIndex {
    assert!(delta >= 0.0, "delta must be nonnegative");
    let n = ds.rows.len();
    let mut sorted_ids: Vec<u32> = (0..n as u32).collect();
    sorted_ids.sort_by(|&a, &b| {
        ds.rows[a as usize]
            .p_white
            .partial_cmp(&ds.rows[b as usize].p_white)
            .unwrap()
            .then(a.cmp(&b))
    });
    let sorted_p: Vec<f64> = sorted_ids
        .iter()
        .map(|&id| ds.rows[id as usize].p_white)
        .collect();
    let mut rank_of = vec![0u32; n];
    for (rank, &id) in sorted_ids.iter().enumerate() {
        rank_of[id as usize] = rank as u32;
    }
    let mut windows = vec![(0u32, 0u32); n];
    let mut lo = 0usize;
    let mut hi = 0usize;
    for rank in 0..n {
        let p = sorted_p[rank];
        while lo < n && sorted_p[lo] <= p - delta {
            lo += 1;
        }
        if hi < rank + 1 {
            hi = rank + 1;
        }
        while hi < n && sorted_p[hi] < p + delta {
            hi += 1;
        }
        // Strict inequality: with delta = 0 the window is empty.
        let (lo, hi) = if delta == 0.0 { (rank, rank) } else { (lo, hi) };
        windows[sorted_ids[rank] as usize] = (lo as u32, hi as u32);
    }
    PositiveIndex {
        delta,
        sorted_ids,
        rank_of,
        windows,
    }
}

impl PositiveIndex {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of positives for this anchor (itself excluded).
    pub fn neighbor_count(&self, id: u32) -> usize {
        let (lo, hi) = self.windows[id as usize];
        (hi - lo).saturating_sub(if lo == hi { 0 } else { 1 }) as usize
    }

    /// All positive ids for the anchor, ascending by p.
    pub fn neighbors(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        let (lo, hi) = self.windows[id as usize];
        self.sorted_ids[lo as usize..hi as usize]
            .iter()
            .copied()
            .filter(move |&other| other != id)
    }

    /// Symmetric membership test.
    pub fn are_positive(&self, a: u32, b: u32) -> bool {
        if a == b {
            return false;
        }
        let (lo, hi) = self.windows[a as usize];
        let rank_b = self.rank_of[b as usize];
        (lo..hi).contains(&rank_b)
    }

    /// Draw `k` distinct positives for `id`, uniformly. Requires
    /// `neighbor_count(id) >= k`.
    pub fn sample_neighbors(&self, id: u32, k: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
        use rand::Rng;
        let (lo, hi) = self.windows[id as usize];
        let own = self.rank_of[id as usize];
        debug_assert!(self.neighbor_count(id) >= k);
        let mut picked: Vec<u32> = Vec::with_capacity(k);
        while picked.len() < k {
            let rank = rng.gen_range(lo..hi);
            if rank == own {
                continue;
            }
            let candidate = self.sorted_ids[rank as usize];
            if !picked.contains(&candidate) {
                picked.push(candidate);
            }
        }
        picked
    }

    /// Ids eligible to serve as anchors (at least `k` positives).
    pub fn eligible_anchors(&self, k: usize) -> Vec<u32> {
        (0..self.windows.len() as u32)
            .filter(|&id| self.neighbor_count(id) >= k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meridian_chess::START_FEN;
    use std::io::Cursor;

    fn tiny_dataset(ps: &[f64]) -> Dataset {
        // All rows share a position; only p matters for index tests.
        let pos = Position::start();
        Dataset {
            rows: ps
                .iter()
                .map(|&p_white| AnnotatedPosition {
                    position: pos.clone(),
                    p_white,
                })
                .collect(),
            skipped: 0,
        }
    }

    #[test]
    fn white_to_move_probability_passes_through() {
        let line = format!("{START_FEN}\t0.52");
        let ds = ingest_reader(Cursor::new(line), ProbPerspective::Mover).unwrap();
        assert_eq!(ds.len(), 1);
        assert!((ds.rows[0].p_white - 0.52).abs() < 1e-12);
    }

    #[test]
    fn black_to_move_probability_is_complemented() {
        let fen = "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1";
        let line = format!("{fen}\t0.7");
        let ds = ingest_reader(Cursor::new(line), ProbPerspective::Mover).unwrap();
        assert!((ds.rows[0].p_white - 0.3).abs() < 1e-12);
        // With White-perspective input the value is taken as-is.
        let line = format!("{fen}\t0.7");
        let ds = ingest_reader(Cursor::new(line), ProbPerspective::White).unwrap();
        assert!((ds.rows[0].p_white - 0.7).abs() < 1e-12);
    }

    #[test]
    fn malformed_rows_are_skipped_with_count() {
        let text = format!(
            "{START_FEN}\t0.5\nnot a fen\t0.5\n{START_FEN}\t1.5\n{START_FEN}\t0.9\n"
        );
        let ds = ingest_reader(Cursor::new(text), ProbPerspective::Mover).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.skipped, 2);
    }

    #[test]
    fn positive_index_small_example() {
        let ds = tiny_dataset(&[0.10, 0.12, 0.30]);
        let index = build_positive_index(&ds, 0.05);
        assert_eq!(index.neighbor_count(0), 1);
        assert_eq!(index.neighbor_count(1), 1);
        assert_eq!(index.neighbor_count(2), 0);
        assert!(index.are_positive(0, 1));
        assert!(index.are_positive(1, 0));
        assert!(!index.are_positive(0, 2));
        assert!(!index.are_positive(0, 0));
    }

    #[test]
    fn zero_delta_gives_empty_index() {
        let ds = tiny_dataset(&[0.4, 0.4, 0.4]);
        let index = build_positive_index(&ds, 0.0);
        for id in 0..3 {
            assert_eq!(index.neighbor_count(id), 0);
        }
    }

    #[test]
    fn boundary_is_strict() {
        let ds = tiny_dataset(&[0.40, 0.45, 0.449999]);
        let index = build_positive_index(&ds, 0.05);
        // |0.40 - 0.45| is exactly delta: not positive.
        assert!(!index.are_positive(0, 1));
        assert!(index.are_positive(0, 2));
    }

    #[test]
    fn split_is_seed_reproducible() {
        let ds = tiny_dataset(&(0..100).map(|i| i as f64 / 100.0).collect::<Vec<_>>());
        let (a_train, a_hold) = ds.clone().split(0.2, 9);
        let (b_train, b_hold) = ds.clone().split(0.2, 9);
        let (c_train, _) = ds.split(0.2, 10);
        assert_eq!(a_hold.len(), 20);
        assert_eq!(a_train.len(), 80);
        let key = |d: &Dataset| d.rows.iter().map(|r| r.p_white).collect::<Vec<_>>();
        assert_eq!(key(&a_train), key(&b_train));
        assert_eq!(key(&a_hold), key(&b_hold));
        assert_ne!(key(&a_train), key(&c_train));
    }
}
