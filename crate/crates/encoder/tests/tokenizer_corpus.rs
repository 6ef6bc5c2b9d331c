//! Tokenizer properties over playout corpora.

use meridian_encoder::{detokenize, tokenize, SEQ_LEN};
use meridian_chess::playout::random_position_corpus;
use std::collections::HashMap;

#[test]
fn corpus_round_trips_and_never_collides() {
    let corpus = random_position_corpus(60, 80, 500);
    assert!(corpus.len() > 2000, "corpus too small: {}", corpus.len());
    let mut seen: HashMap<_, usize> = HashMap::new();
    for (i, pos) in corpus.iter().enumerate() {
        let seq = tokenize(pos);
        assert_eq!(seq.len(), SEQ_LEN);
        let back = detokenize(&seq).unwrap_or_else(|e| panic!("decode failed at {i}: {e}"));
        assert_eq!(&back, pos, "round trip mismatch at {i}");
        // Injectivity: equal token sequences must come from equal positions.
        if let Some(&j) = seen.get(seq.ids()) {
            assert_eq!(&corpus[j], pos, "collision between {j} and {i}");
        } else {
            seen.insert(*seq.ids(), i);
        }
    }
}
