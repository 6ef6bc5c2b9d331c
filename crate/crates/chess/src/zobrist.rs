//! Zobrist keys for position hashing. Clocks are excluded so the hash can
//! double as the repetition-detection key.

use crate::square::Square;
use crate::types::{CastlingRights, Color, Piece};

const fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Keys {
    pieces: [[u64; 64]; 12],
    castling: [u64; 16],
    en_passant_file: [u64; 8],
    black_to_move: u64,
}

const fn build_keys() -> Keys {
    let mut state = 0x5eed_c0de_0451_7e55u64;
    let mut pieces = [[0u64; 64]; 12];
    let mut i = 0;
    while i < 12 {
        let mut sq = 0;
        while sq < 64 {
            pieces[i][sq] = splitmix64(&mut state);
            sq += 1;
        }
        i += 1;
    }
    let mut castling = [0u64; 16];
    let mut c = 0;
    while c < 16 {
        castling[c] = splitmix64(&mut state);
        c += 1;
    }
    let mut en_passant_file = [0u64; 8];
    let mut f = 0;
    while f < 8 {
        en_passant_file[f] = splitmix64(&mut state);
        f += 1;
    }
    let black_to_move = splitmix64(&mut state);
    Keys {
        pieces,
        castling,
        en_passant_file,
        black_to_move,
    }
}

static KEYS: Keys = build_keys();

#[inline]
pub fn piece_key(piece: Piece, sq: Square) -> u64 {
    KEYS.pieces[piece.color.index() * 6 + piece.kind.index()][sq.index()]
}

#[inline]
pub fn castling_key(rights: CastlingRights) -> u64 {
    KEYS.castling[rights.bits() as usize]
}

#[inline]
pub fn en_passant_key(target: Option<Square>) -> u64 {
    match target {
        Some(sq) => KEYS.en_passant_file[sq.file() as usize],
        None => 0,
    }
}

#[inline]
pub fn side_key(side: Color) -> u64 {
    match side {
        Color::White => 0,
        Color::Black => KEYS.black_to_move,
    }
}
