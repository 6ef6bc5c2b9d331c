//! Fixed-length token sequences.

use crate::error::TokenizerError;
use crate::vocab;
use std::fmt;

/// Number of tokens in every encoded position.
pub const SEQ_LEN: usize = 77;

/// Exactly [`SEQ_LEN`] token ids, each inside the vocabulary.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenSeq([u8; SEQ_LEN]);

impl TokenSeq {
    /// Build from raw ids, checking length and range.
    pub fn from_ids(ids: &[u8]) -> Result<TokenSeq, TokenizerError> {
        if ids.len() != SEQ_LEN {
            return Err(TokenizerError::Length {
                expected: SEQ_LEN,
                got: ids.len(),
            });
        }
        for (index, &id) in ids.iter().enumerate() {
            if id as usize >= vocab::VOCAB_SIZE {
                return Err(TokenizerError::TokenRange { index, id });
            }
        }
        let mut buf = [0u8; SEQ_LEN];
        buf.copy_from_slice(ids);
        Ok(TokenSeq(buf))
    }

    #[inline]
    pub fn ids(&self) -> &[u8; SEQ_LEN] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        SEQ_LEN
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The sequence rendered as vocabulary symbols (lossless).
    pub fn symbols(&self) -> String {
        self.0
            .iter()
            .map(|&id| vocab::char_of(id).expect("TokenSeq ids are always in range"))
            .collect()
    }
}

impl fmt::Debug for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TokenSeq({})", self.symbols())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_range() {
        assert!(matches!(
            TokenSeq::from_ids(&[0u8; 76]),
            Err(TokenizerError::Length { got: 76, .. })
        ));
        let mut ids = [0u8; SEQ_LEN];
        ids[13] = vocab::VOCAB_SIZE as u8;
        assert!(matches!(
            TokenSeq::from_ids(&ids),
            Err(TokenizerError::TokenRange { index: 13, .. })
        ));
    }
}
