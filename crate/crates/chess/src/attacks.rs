//! Precomputed attack tables. Everything is built at compile time so the
//! move generator has no lazy-init cost and no global state.

use crate::bitboard::Bitboard;
use crate::square::Square;
use crate::types::Color;

// Direction indices into `RAYS`. "Positive" directions increase the square
// index, which determines whether the first blocker is found from the low
// or the high end of the ray.
const NORTH: usize = 0;
const SOUTH: usize = 1;
const EAST: usize = 2;
const WEST: usize = 3;
const NORTH_EAST: usize = 4;
const NORTH_WEST: usize = 5;
const SOUTH_EAST: usize = 6;
const SOUTH_WEST: usize = 7;

const DIR_DELTAS: [(i8, i8); 8] = [
    (0, 1),
    (0, -1),
    (1, 0),
    (-1, 0),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

const fn is_positive(dir: usize) -> bool {
    matches!(dir, NORTH | EAST | NORTH_EAST | NORTH_WEST)
}

const fn walk_ray(sq: usize, df: i8, dr: i8) -> u64 {
    let mut bb = 0u64;
    let mut f = (sq % 8) as i8 + df;
    let mut r = (sq / 8) as i8 + dr;
    while f >= 0 && f < 8 && r >= 0 && r < 8 {
        bb |= 1u64 << (r * 8 + f);
        f += df;
        r += dr;
    }
    bb
}

const fn build_rays() -> [[u64; 64]; 8] {
    let mut rays = [[0u64; 64]; 8];
    let mut dir = 0;
    while dir < 8 {
        let (df, dr) = DIR_DELTAS[dir];
        let mut sq = 0;
        while sq < 64 {
            rays[dir][sq] = walk_ray(sq, df, dr);
            sq += 1;
        }
        dir += 1;
    }
    rays
}

const fn leaper_attacks(sq: usize, deltas: &[(i8, i8)]) -> u64 {
    let mut bb = 0u64;
    let mut i = 0;
    while i < deltas.len() {
        let (df, dr) = deltas[i];
        let f = (sq % 8) as i8 + df;
        let r = (sq / 8) as i8 + dr;
        if f >= 0 && f < 8 && r >= 0 && r < 8 {
            bb |= 1u64 << (r * 8 + f);
        }
        i += 1;
    }
    bb
}

const fn build_leaper_table(deltas: &[(i8, i8)]) -> [u64; 64] {
    let mut table = [0u64; 64];
    let mut sq = 0;
    while sq < 64 {
        table[sq] = leaper_attacks(sq, deltas);
        sq += 1;
    }
    table
}

const KNIGHT_DELTAS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];

const KING_DELTAS: [(i8, i8); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

const fn build_pawn_attacks() -> [[u64; 64]; 2] {
    let mut table = [[0u64; 64]; 2];
    let mut sq = 0;
    while sq < 64 {
        table[0][sq] = leaper_attacks(sq, &[(-1, 1), (1, 1)]);
        table[1][sq] = leaper_attacks(sq, &[(-1, -1), (1, -1)]);
        sq += 1;
    }
    table
}

const fn sign(x: i8) -> i8 {
    if x > 0 {
        1
    } else if x < 0 {
        -1
    } else {
        0
    }
}

const fn build_between() -> [[u64; 64]; 64] {
    let mut table = [[0u64; 64]; 64];
    let mut a = 0;
    while a < 64 {
        let mut b = 0;
        while b < 64 {
            let fd = (b % 8) as i8 - (a % 8) as i8;
            let rd = (b / 8) as i8 - (a / 8) as i8;
            let aligned = a != b && (fd == 0 || rd == 0 || fd == rd || fd == -rd);
            if aligned {
                let df = sign(fd);
                let dr = sign(rd);
                let mut bb = 0u64;
                let mut f = (a % 8) as i8 + df;
                let mut r = (a / 8) as i8 + dr;
                while (r * 8 + f) as usize != b {
                    bb |= 1u64 << (r * 8 + f);
                    f += df;
                    r += dr;
                }
                table[a][b] = bb;
            }
            b += 1;
        }
        a += 1;
    }
    table
}

const fn build_lines() -> [[u64; 64]; 64] {
    let mut table = [[0u64; 64]; 64];
    let mut a = 0;
    while a < 64 {
        let mut b = 0;
        while b < 64 {
            let fd = (b % 8) as i8 - (a % 8) as i8;
            let rd = (b / 8) as i8 - (a / 8) as i8;
            let aligned = a != b && (fd == 0 || rd == 0 || fd == rd || fd == -rd);
            if aligned {
                let df = sign(fd);
                let dr = sign(rd);
                table[a][b] = (1u64 << a)
                    | (1u64 << b)
                    | walk_ray(a, df, dr)
                    | walk_ray(a, -df, -dr);
            }
            b += 1;
        }
        a += 1;
    }
    table
}

static RAYS: [[u64; 64]; 8] = build_rays();
static KNIGHT_TABLE: [u64; 64] = build_leaper_table(&KNIGHT_DELTAS);
static KING_TABLE: [u64; 64] = build_leaper_table(&KING_DELTAS);
static PAWN_TABLE: [[u64; 64]; 2] = build_pawn_attacks();
static BETWEEN_TABLE: [[u64; 64]; 64] = build_between();
static LINE_TABLE: [[u64; 64]; 64] = build_lines();

#[inline]
pub fn knight_attacks(sq: Square) -> Bitboard {
    Bitboard(KNIGHT_TABLE[sq.index()])
}

#[inline]
pub fn king_attacks(sq: Square) -> Bitboard {
    Bitboard(KING_TABLE[sq.index()])
}

/// Squares a pawn of `color` on `sq` attacks (captures only).
#[inline]
pub fn pawn_attacks(color: Color, sq: Square) -> Bitboard {
    Bitboard(PAWN_TABLE[color.index()][sq.index()])
}

#[inline]
fn slider_attacks(sq: Square, occ: Bitboard, dirs: [usize; 4]) -> Bitboard {
    let mut attacks = 0u64;
    for dir in dirs {
        let ray = RAYS[dir][sq.index()];
        let blockers = ray & occ.0;
        let reachable = if blockers == 0 {
            ray
        } else {
            let first = if is_positive(dir) {
                blockers.trailing_zeros() as usize
            } else {
                63 - blockers.leading_zeros() as usize
            };
            ray ^ RAYS[dir][first]
        };
        attacks |= reachable;
    }
    Bitboard(attacks)
}

#[inline]
pub fn rook_attacks(sq: Square, occ: Bitboard) -> Bitboard {
    slider_attacks(sq, occ, [NORTH, SOUTH, EAST, WEST])
}

#[inline]
pub fn bishop_attacks(sq: Square, occ: Bitboard) -> Bitboard {
    slider_attacks(sq, occ, [NORTH_EAST, NORTH_WEST, SOUTH_EAST, SOUTH_WEST])
}

#[inline]
pub fn queen_attacks(sq: Square, occ: Bitboard) -> Bitboard {
    rook_attacks(sq, occ) | bishop_attacks(sq, occ)
}

/// Squares strictly between two aligned squares (empty when unaligned).
#[inline]
pub fn between(a: Square, b: Square) -> Bitboard {
    Bitboard(BETWEEN_TABLE[a.index()][b.index()])
}

/// The full board line through two aligned squares, endpoints included
/// (empty when unaligned).
#[inline]
pub fn line(a: Square, b: Square) -> Bitboard {
    Bitboard(LINE_TABLE[a.index()][b.index()])
}
