//! The fixed character vocabulary.
//!
//! Token ids must never drift between runs or checkpoints, so the table is
//! a compile-time constant. `vocab.txt` in this crate is the export format
//! (one symbol per line, line number = id) and is verified against the
//! builtin table by a test.

use crate::error::TokenizerError;

/// Every symbol a tokenized position can contain: the padding symbol '.',
/// the empty-field marker '-', digits (clock fields; '1' is also the
/// expanded empty square), piece letters, the side letter 'w' ('b' doubles
/// as the black bishop), and the en-passant file letters not already
/// covered by piece letters.
pub const VOCAB: [char; 32] = [
    '.', '-', '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', 'P', 'N', 'B', 'R', 'Q', 'K',
    'p', 'n', 'b', 'r', 'q', 'k', 'w', 'a', 'c', 'd', 'e', 'f', 'g', 'h',
];

pub const VOCAB_SIZE: usize = VOCAB.len();

/// Id of the padding symbol '.'.
pub const PAD: u8 = 0;

pub fn id_of(c: char) -> Result<u8, TokenizerError> {
    VOCAB
        .iter()
        .position(|&v| v == c)
        .map(|i| i as u8)
        .ok_or(TokenizerError::UnknownChar(c))
}

pub fn char_of(id: u8) -> Option<char> {
    VOCAB.get(id as usize).copied()
}

/// The vocabulary file format: one symbol per line, line number = id.
pub fn vocab_file_text() -> String {
    let mut s = String::with_capacity(VOCAB_SIZE * 2);
    for c in VOCAB {
        s.push(c);
        s.push('\n');
    }
    s
}

/// Check that external vocabulary text (from a file or a checkpoint)
/// matches the builtin table exactly.
pub fn verify_vocab_text(text: &str) -> Result<(), String> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() != VOCAB_SIZE {
        return Err(format!(
            "vocabulary has {} entries, expected {VOCAB_SIZE}",
            lines.len()
        ));
    }
    for (i, line) in lines.iter().enumerate() {
        let mut chars = line.chars();
        let c = chars.next().ok_or(format!("empty vocabulary line {i}"))?;
        if chars.next().is_some() {
            return Err(format!("vocabulary line {i} has more than one symbol"));
        }
        if c != VOCAB[i] {
            return Err(format!(
                "vocabulary mismatch at id {i}: file has '{c}', builtin has '{}'",
                VOCAB[i]
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_unique() {
        for (i, &c) in VOCAB.iter().enumerate() {
            assert_eq!(id_of(c).unwrap(), i as u8);
            assert_eq!(char_of(i as u8), Some(c));
        }
        assert!(id_of('x').is_err());
        assert_eq!(char_of(VOCAB_SIZE as u8), None);
    }

    #[test]
    fn committed_vocab_file_matches_builtin() {
        let committed = include_str!("../vocab.txt");
        verify_vocab_text(committed).expect("vocab.txt out of sync with builtin table");
        assert_eq!(committed, vocab_file_text());
    }
}
