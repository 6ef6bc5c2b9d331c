//! FEN <-> token-sequence conversion.
//!
//! Layout (77 tokens): 64 board squares (rank 8 to rank 1, file a to h,
//! run lengths expanded to '1' per empty square), 1 side-to-move token,
//! 4 castling tokens, 2 en-passant tokens, 3 halfmove tokens, 3 fullmove
//! tokens. Short fields are padded on the right with '.'.

use crate::error::TokenizerError;
use crate::tokens::{TokenSeq, SEQ_LEN};
use crate::vocab;
use meridian_chess::fen::{emit_fen, parse_fen};
use meridian_chess::position::MAX_CLOCK;
use meridian_chess::Position;

const BOARD_TOKENS: usize = 64;
const CASTLING_TOKENS: usize = 4;
const EN_PASSANT_TOKENS: usize = 2;
const CLOCK_TOKENS: usize = 3;

/// Tokenize a position. Total for any valid [`Position`]: clock fields
/// saturate at [`MAX_CLOCK`], which ordinary games never reach.
pub fn tokenize(pos: &Position) -> TokenSeq {
    let fen = emit_fen(&clamp_clocks(pos));
    fen_to_tokens(&fen).expect("canonical FEN of a valid position always tokenizes")
}

fn clamp_clocks(pos: &Position) -> Position {
    if pos.halfmove_clock() <= MAX_CLOCK && pos.fullmove_number() <= MAX_CLOCK {
        return pos.clone();
    }
    let mut fields: Vec<String> = emit_fen(pos).split(' ').map(str::to_string).collect();
    fields[4] = pos.halfmove_clock().min(MAX_CLOCK).to_string();
    fields[5] = pos.fullmove_number().min(MAX_CLOCK).to_string();
    parse_fen(&fields.join(" ")).expect("clamping clocks preserves validity")
}

/// Recover the position encoded by `seq`. Inverse of [`tokenize`].
pub fn detokenize(seq: &TokenSeq) -> Result<Position, TokenizerError> {
    let fen = tokens_to_fen(seq)?;
    Ok(parse_fen(&fen)?)
}

/// String-level tokenization of a syntactically complete FEN. Does not
/// validate position invariants, so test fixtures such as an empty board
/// can be tokenized.
pub fn fen_to_tokens(fen: &str) -> Result<TokenSeq, TokenizerError> {
    let fields: Vec<&str> = fen.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(TokenizerError::Board(format!(
            "expected 6 FEN fields, found {}",
            fields.len()
        )));
    }
    let mut ids: Vec<u8> = Vec::with_capacity(SEQ_LEN);

    // Board: expand run lengths so placement is exactly 64 tokens.
    let empty_square = vocab::id_of('1').unwrap();
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(TokenizerError::Board(format!(
            "expected 8 ranks, found {}",
            ranks.len()
        )));
    }
    for rank_text in ranks {
        let mut files = 0usize;
        for c in rank_text.chars() {
            if let Some(run) = c.to_digit(10) {
                if !(1..=8).contains(&run) {
                    return Err(TokenizerError::Board(format!("bad run length '{c}'")));
                }
                for _ in 0..run {
                    ids.push(empty_square);
                }
                files += run as usize;
            } else if "PNBRQKpnbrqk".contains(c) {
                ids.push(vocab::id_of(c)?);
                files += 1;
            } else {
                return Err(TokenizerError::Board(format!("unexpected character '{c}'")));
            }
        }
        if files != 8 {
            return Err(TokenizerError::Board(format!(
                "rank '{rank_text}' covers {files} files"
            )));
        }
    }

    // Side to move.
    match fields[1] {
        "w" | "b" => ids.push(vocab::id_of(fields[1].chars().next().unwrap())?),
        other => return Err(TokenizerError::Side(other.to_string())),
    }

    push_padded_field(&mut ids, fields[2], CASTLING_TOKENS, "KQkq-", |msg| {
        TokenizerError::Castling(msg)
    })?;
    push_padded_field(&mut ids, fields[3], EN_PASSANT_TOKENS, "abcdefgh36-", |msg| {
        TokenizerError::EnPassant(msg)
    })?;
    push_clock_field(&mut ids, fields[4])?;
    push_clock_field(&mut ids, fields[5])?;

    TokenSeq::from_ids(&ids)
}

fn push_padded_field(
    ids: &mut Vec<u8>,
    field: &str,
    width: usize,
    allowed: &str,
    err: impl Fn(String) -> TokenizerError,
) -> Result<(), TokenizerError> {
    if field.is_empty() || field.len() > width {
        return Err(err(format!("field '{field}' does not fit {width} tokens")));
    }
    for c in field.chars() {
        if !allowed.contains(c) {
            return Err(err(format!("unexpected character '{c}'")));
        }
        ids.push(vocab::id_of(c)?);
    }
    for _ in field.len()..width {
        ids.push(vocab::PAD);
    }
    Ok(())
}

fn push_clock_field(ids: &mut Vec<u8>, field: &str) -> Result<(), TokenizerError> {
    if field.is_empty()
        || field.len() > CLOCK_TOKENS
        || !field.chars().all(|c| c.is_ascii_digit())
    {
        return Err(TokenizerError::Clock(format!(
            "'{field}' is not a 1-3 digit number"
        )));
    }
    for c in field.chars() {
        ids.push(vocab::id_of(c)?);
    }
    for _ in field.len()..CLOCK_TOKENS {
        ids.push(vocab::PAD);
    }
    Ok(())
}

/// Reassemble the FEN encoded by `seq`.
pub fn tokens_to_fen(seq: &TokenSeq) -> Result<String, TokenizerError> {
    let symbols: Vec<char> = seq.symbols().chars().collect();
    let mut fen = String::with_capacity(90);

    // Board: re-compress empty squares into run lengths.
    for rank in 0..8 {
        let mut run = 0u32;
        for file in 0..8 {
            let c = symbols[rank * 8 + file];
            if c == '1' {
                run += 1;
            } else if "PNBRQKpnbrqk".contains(c) {
                if run > 0 {
                    fen.push(char::from_digit(run, 10).unwrap());
                    run = 0;
                }
                fen.push(c);
            } else {
                return Err(TokenizerError::Board(format!(
                    "unexpected board token '{c}' at square index {}",
                    rank * 8 + file
                )));
            }
        }
        if run > 0 {
            fen.push(char::from_digit(run, 10).unwrap());
        }
        if rank < 7 {
            fen.push('/');
        }
    }

    fen.push(' ');
    let side = symbols[BOARD_TOKENS];
    if side != 'w' && side != 'b' {
        return Err(TokenizerError::Side(format!("unexpected token '{side}'")));
    }
    fen.push(side);

    fen.push(' ');
    fen.push_str(&unpad_field(
        &symbols[BOARD_TOKENS + 1..BOARD_TOKENS + 1 + CASTLING_TOKENS],
        |msg| TokenizerError::Castling(msg),
    )?);

    fen.push(' ');
    let ep_start = BOARD_TOKENS + 1 + CASTLING_TOKENS;
    fen.push_str(&unpad_field(
        &symbols[ep_start..ep_start + EN_PASSANT_TOKENS],
        |msg| TokenizerError::EnPassant(msg),
    )?);

    let clocks_start = ep_start + EN_PASSANT_TOKENS;
    for (i, field_err) in [TokenizerError::Clock, TokenizerError::Clock]
        .into_iter()
        .enumerate()
    {
        let begin = clocks_start + i * CLOCK_TOKENS;
        let text = unpad_field(&symbols[begin..begin + CLOCK_TOKENS], |msg| field_err(msg))?;
        if !text.chars().all(|c| c.is_ascii_digit()) {
            return Err(TokenizerError::Clock(format!("'{text}' is not a number")));
        }
        fen.push(' ');
        fen.push_str(&text);
    }
    Ok(fen)
}

/// Strip '.' padding, insisting it only appears as a suffix.
fn unpad_field(
    symbols: &[char],
    err: impl Fn(String) -> TokenizerError,
) -> Result<String, TokenizerError> {
    let content_len = symbols
        .iter()
        .position(|&c| c == '.')
        .unwrap_or(symbols.len());
    if symbols[content_len..].iter().any(|&c| c != '.') {
        return Err(err(format!(
            "padding interleaved with content in '{}'",
            symbols.iter().collect::<String>()
        )));
    }
    if content_len == 0 {
        return Err(err("empty field".to_string()));
    }
    Ok(symbols[..content_len].iter().collect())
}
