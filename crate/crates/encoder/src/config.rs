//! Encoder hyperparameters and their human-readable serialization.

use crate::error::EncoderError;
use crate::tokens::SEQ_LEN;
use crate::vocab::VOCAB_SIZE;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub num_heads: usize,
    pub mlp_size: usize,
    pub dropout_rate: f64,
    pub vocab_size: usize,
    pub seq_len: usize,
}

impl EncoderConfig {
    /// Desk-scale configuration used by tests and local training.
    pub fn tiny() -> EncoderConfig {
        EncoderConfig {
            num_layers: 2,
            hidden_dim: 128,
            embed_dim: 128,
            num_heads: 4,
            mlp_size: 128,
            ..EncoderConfig::defaults()
        }
    }

    pub fn small() -> EncoderConfig {
        EncoderConfig {
            num_layers: 6,
            hidden_dim: 512,
            embed_dim: 512,
            num_heads: 16,
            mlp_size: 512,
            ..EncoderConfig::defaults()
        }
    }

    pub fn base() -> EncoderConfig {
        EncoderConfig {
            num_layers: 6,
            hidden_dim: 1024,
            embed_dim: 1024,
            num_heads: 16,
            mlp_size: 1024,
            ..EncoderConfig::defaults()
        }
    }

    fn defaults() -> EncoderConfig {
        EncoderConfig {
            num_layers: 2,
            hidden_dim: 128,
            embed_dim: 128,
            num_heads: 4,
            mlp_size: 128,
            dropout_rate: 0.1,
            vocab_size: VOCAB_SIZE,
            seq_len: SEQ_LEN,
        }
    }

    pub fn by_name(name: &str) -> Option<EncoderConfig> {
        match name {
            "tiny" => Some(EncoderConfig::tiny()),
            "small" => Some(EncoderConfig::small()),
            "base" => Some(EncoderConfig::base()),
            _ => None,
        }
    }

    /// Internal sequence length including the prepended CLS slot.
    pub fn padded_len(&self) -> usize {
        self.seq_len + 1
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.num_heads
    }

    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.num_layers == 0
            || self.hidden_dim == 0
            || self.embed_dim == 0
            || self.num_heads == 0
            || self.mlp_size == 0
            || self.vocab_size == 0
            || self.seq_len == 0
        {
            return Err(EncoderError::Config("all dimensions must be >= 1".into()));
        }
        if self.hidden_dim % self.num_heads != 0 {
            return Err(EncoderError::Config(format!(
                "hidden_dim {} not divisible by num_heads {}",
                self.hidden_dim, self.num_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(EncoderError::Config(format!(
                "dropout_rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        Ok(())
    }

    /// Key-value text form, one `key=value` per line.
    pub fn to_kv_text(&self) -> String {
        format!(
            "num_layers={}\nhidden_dim={}\nembed_dim={}\nnum_heads={}\nmlp_size={}\n\
             dropout_rate={}\nvocab_size={}\nseq_len={}\n",
            self.num_layers,
            self.hidden_dim,
            self.embed_dim,
            self.num_heads,
            self.mlp_size,
            self.dropout_rate,
            self.vocab_size,
            self.seq_len
        )
    }

    pub fn from_kv_text(text: &str) -> Result<EncoderConfig, EncoderError> {
        let mut cfg = EncoderConfig::defaults();
        let mut seen = 0;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| EncoderError::Config(format!("bad config line '{line}'")))?;
            let parse_usize = || {
                value
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| EncoderError::Config(format!("bad value for {key}: '{value}'")))
            };
            match key.trim() {
                "num_layers" => cfg.num_layers = parse_usize()?,
                "hidden_dim" => cfg.hidden_dim = parse_usize()?,
                "embed_dim" => cfg.embed_dim = parse_usize()?,
                "num_heads" => cfg.num_heads = parse_usize()?,
                "mlp_size" => cfg.mlp_size = parse_usize()?,
                "vocab_size" => cfg.vocab_size = parse_usize()?,
                "seq_len" => cfg.seq_len = parse_usize()?,
                "dropout_rate" => {
                    cfg.dropout_rate = value.trim().parse::<f64>().map_err(|_| {
                        EncoderError::Config(format!("bad value for {key}: '{value}'"))
                    })?
                }
                other => {
                    return Err(EncoderError::Config(format!("unknown config key '{other}'")))
                }
            }
            seen += 1;
        }
        if seen == 0 {
            return Err(EncoderError::Config("empty config text".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_text_round_trip() {
        for cfg in [EncoderConfig::tiny(), EncoderConfig::small(), EncoderConfig::base()] {
            let text = cfg.to_kv_text();
            assert_eq!(EncoderConfig::from_kv_text(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn validation_catches_bad_dims() {
        let mut cfg = EncoderConfig::tiny();
        cfg.num_heads = 5;
        assert!(cfg.validate().is_err());
        cfg = EncoderConfig::tiny();
        cfg.dropout_rate = 1.0;
        assert!(cfg.validate().is_err());
        cfg = EncoderConfig::tiny();
        cfg.num_layers = 0;
        assert!(cfg.validate().is_err());
    }
}
