//! Self-describing binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!   magic "MERIDCK1" | version u32 | config text (u32 len + utf8)
//!   | vocabulary text (u32 len + utf8) | tensor count u32
//!   | per tensor: name (u16 len + utf8), ndim u8, dims (u32 each),
//!     f32 data in row-major order.

use crate::config::EncoderConfig;
use crate::error::CheckpointError;
use crate::vocab;
use crate::weights::{ModelWeights, ParamSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"MERIDCK1";
const VERSION: u32 = 1;

pub fn save(weights: &ModelWeights<f32>, path: &Path) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    write_block(&mut w, weights.config.to_kv_text().as_bytes())?;
    write_block(&mut w, vocab::vocab_file_text().as_bytes())?;

    let tensors = weights.params.tensors();
    w.write_all(&(tensors.len() as u32).to_le_bytes())?;
    for (name, tensor) in tensors {
        let name_bytes = name.as_bytes();
        w.write_all(&(name_bytes.len() as u16).to_le_bytes())?;
        w.write_all(name_bytes)?;
        let shape = tensor.shape();
        w.write_all(&[shape.len() as u8])?;
        for dim in &shape {
            w.write_all(&(*dim as u32).to_le_bytes())?;
        }
        for &v in tensor.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelWeights<f32>, CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let config_text = String::from_utf8(read_block(&mut r)?)
        .map_err(|e| CheckpointError::Corrupt(format!("config not utf8: {e}")))?;
    let config = EncoderConfig::from_kv_text(&config_text)
        .map_err(|e| CheckpointError::Config(e.to_string()))?;
    let vocab_text = String::from_utf8(read_block(&mut r)?)
        .map_err(|e| CheckpointError::Corrupt(format!("vocab not utf8: {e}")))?;
    vocab::verify_vocab_text(&vocab_text).map_err(CheckpointError::Corrupt)?;

    let mut params: ParamSet<f32> = ParamSet::zeros(&config);
    let count = read_u32(&mut r)? as usize;
    let expected = params.tensors().len();
    if count != expected {
        return Err(CheckpointError::Corrupt(format!(
            "tensor count {count} != expected {expected}"
        )));
    }
    for (expected_name, mut tensor) in params.tensors_mut() {
        let name_len = read_u16(&mut r)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|e| CheckpointError::Corrupt(format!("tensor name not utf8: {e}")))?;
        if name != expected_name {
            return Err(CheckpointError::Corrupt(format!(
                "tensor order mismatch: found '{name}', expected '{expected_name}'"
            )));
        }
        let mut ndim = [0u8; 1];
        r.read_exact(&mut ndim)?;
        let mut dims = Vec::with_capacity(ndim[0] as usize);
        for _ in 0..ndim[0] {
            dims.push(read_u32(&mut r)? as usize);
        }
        let slice = tensor.as_slice_mut();
        let len: usize = dims.iter().product();
        if len != slice.len() {
            return Err(CheckpointError::Corrupt(format!(
                "tensor '{name}' has {len} elements, expected {}",
                slice.len()
            )));
        }
        let mut buf = [0u8; 4];
        for v in slice.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f32::from_le_bytes(buf);
        }
    }
    // Trailing garbage means the file is not what we wrote.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    let weights = ModelWeights { config, params };
    if !weights.params.all_finite() {
        return Err(CheckpointError::Corrupt("non-finite parameters".into()));
    }
    Ok(weights)
}

fn write_block<W: Write>(w: &mut W, bytes: &[u8]) -> Result<(), CheckpointError> {
    w.write_all(&(bytes.len() as u32).to_le_bytes())?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_block<R: Read>(r: &mut R) -> Result<Vec<u8>, CheckpointError> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(CheckpointError::Corrupt(format!("text block of {len} bytes")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16, CheckpointError> {
    let mut buf = [0u8; 2];
    r.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EncoderConfig;

    #[test]
    fn save_load_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("meridian-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tiny.ckpt");
        let w: ModelWeights<f32> = ModelWeights::init(EncoderConfig::tiny(), 77);
        save(&w, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.config, w.config);
        assert_eq!(loaded.params, w.params);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn truncated_and_corrupt_files_are_rejected() {
        let dir = std::env::temp_dir().join("meridian-ckpt-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.ckpt");
        let w: ModelWeights<f32> = ModelWeights::init(EncoderConfig::tiny(), 78);
        save(&w, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        // Truncate.
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load(&path).is_err());
        // Bad magic.
        let mut garbled = bytes.clone();
        garbled[0] ^= 0xff;
        std::fs::write(&path, &garbled).unwrap();
        assert!(matches!(load(&path), Err(CheckpointError::BadMagic)));
        std::fs::remove_file(&path).unwrap();
    }
}
