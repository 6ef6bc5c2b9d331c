//! The advantage axis: mean embeddings of decisively winning positions
//! for each side, and their difference.

use crate::error::PlanError;
use meridian_chess::Position;
use meridian_encoder::{forward_batch, tokenize, Mode, ModelWeights, TokenSeq};
use ndarray::{Array1, Array2};
use std::io::{Read, Write};
use std::path::Path;

/// Direction in embedding space from Black-winning toward White-winning
/// regions: `axis = mu_white - mu_black`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdvantageAxis {
    pub mu_white: Array1<f32>,
    pub mu_black: Array1<f32>,
    pub axis: Array1<f32>,
    pub n_white: usize,
    pub n_black: usize,
}

impl AdvantageAxis {
    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn norm(&self) -> f64 {
        self.axis.dot(&self.axis).sqrt() as f64
    }

    /// Unit vector along the axis.
    pub fn unit(&self) -> Array1<f32> {
        let norm = self.norm() as f32;
        self.axis.mapv(|v| v / norm)
    }

    /// Build from precomputed mean embeddings.
    pub fn from_means(
        mu_white: Array1<f32>,
        mu_black: Array1<f32>,
        n_white: usize,
        n_black: usize,
    ) -> Result<AdvantageAxis, PlanError> {
        let axis = &mu_white - &mu_black;
        let norm = axis.dot(&axis).sqrt() as f64;
        if norm < 1e-8 {
            return Err(PlanError::DegenerateAxis { norm });
        }
        Ok(AdvantageAxis {
            mu_white,
            mu_black,
            axis,
            n_white,
            n_black,
        })
    }
}

/// Mean eval-mode embeddings of the two decisive sets, and their
/// difference. `whites` holds positions annotated as certain White wins
/// (p = 1.0), `blacks` as certain Black wins (p = 0.0).
pub fn compute_axis(
    weights: &ModelWeights<f32>,
    whites: &[Position],
    blacks: &[Position],
) -> Result<AdvantageAxis, PlanError> {
    if whites.is_empty() {
        return Err(PlanError::EmptySet("white"));
    }
    if blacks.is_empty() {
        return Err(PlanError::EmptySet("black"));
    }
    let mu_white = mean_embedding(weights, whites)?;
    let mu_black = mean_embedding(weights, blacks)?;
    AdvantageAxis::from_means(mu_white, mu_black, whites.len(), blacks.len())
}

fn mean_embedding(
    weights: &ModelWeights<f32>,
    positions: &[Position],
) -> Result<Array1<f32>, PlanError> {
    let seqs: Vec<TokenSeq> = positions.iter().map(tokenize).collect();
    let z: Array2<f32> = forward_batch(weights, &seqs, Mode::Eval)?;
    Ok(meridian_encoder::forward::mean_rows(&z))
}

/// Cosine of a position's embedding with the advantage axis, in [-1, 1]
/// from White's perspective.
pub fn score_position(
    weights: &ModelWeights<f32>,
    axis: &AdvantageAxis,
    pos: &Position,
) -> Result<f32, PlanError> {
    let z = meridian_encoder::forward(weights, &tokenize(pos), Mode::Eval)?;
    // Embeddings are unit norm, so cos(z, a) = z . a / |a|.
    Ok(z.dot(&axis.axis) / axis.norm() as f32)
}

// -- binary axis file -------------------------------------------------------

const MAGIC: &[u8; 8] = b"MERIDAX1";

/// Serialize as `magic | D | n_white | n_black | mu_white | mu_black |
/// axis | crc32(payload)`, all little-endian f32/u32.
pub fn save_axis(axis: &AdvantageAxis, path: &Path) -> Result<(), PlanError> {
    let mut payload = Vec::with_capacity(12 + axis.dim() * 12);
    payload.extend_from_slice(&(axis.dim() as u32).to_le_bytes());
    payload.extend_from_slice(&(axis.n_white as u32).to_le_bytes());
    payload.extend_from_slice(&(axis.n_black as u32).to_le_bytes());
    for arr in [&axis.mu_white, &axis.mu_black, &axis.axis] {
        for &v in arr {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(MAGIC)?;
    file.write_all(&payload)?;
    file.write_all(&crc32(&payload).to_le_bytes())?;
    file.flush()?;
    Ok(())
}

pub fn load_axis(path: &Path) -> Result<AdvantageAxis, PlanError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 + 12 + 4 || &bytes[..8] != MAGIC {
        return Err(PlanError::CorruptAxisFile("bad magic or truncated".into()));
    }
    let payload = &bytes[8..bytes.len() - 4];
    let stored_crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    if crc32(payload) != stored_crc {
        return Err(PlanError::CorruptAxisFile("checksum mismatch".into()));
    }
    let dim = u32::from_le_bytes(payload[0..4].try_into().unwrap()) as usize;
    let n_white = u32::from_le_bytes(payload[4..8].try_into().unwrap()) as usize;
    let n_black = u32::from_le_bytes(payload[8..12].try_into().unwrap()) as usize;
    let expected = 12 + dim * 3 * 4;
    if payload.len() != expected {
        return Err(PlanError::CorruptAxisFile(format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let mut read_vec = |offset: usize| -> Array1<f32> {
        Array1::from_iter((0..dim).map(|i| {
            let at = 12 + (offset * dim + i) * 4;
            f32::from_le_bytes(payload[at..at + 4].try_into().unwrap())
        }))
    };
    let mu_white = read_vec(0);
    let mu_black = read_vec(1);
    let axis = read_vec(2);
    let rebuilt = &mu_white - &mu_black;
    if rebuilt
        .iter()
        .zip(axis.iter())
        .any(|(a, b)| (a - b).abs() > 1e-6)
    {
        return Err(PlanError::CorruptAxisFile(
            "axis does not equal mu_white - mu_black".into(),
        ));
    }
    Ok(AdvantageAxis {
        mu_white,
        mu_black,
        axis,
        n_white,
        n_black,
    })
}

/// CRC-32 (IEEE), bitwise implementation; inputs are tiny.
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xedb8_8320 & mask);
        }
    }
    !crc
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn axis_is_difference_of_means() {
        let axis = AdvantageAxis::from_means(
            array![1.0f32, 0.0, 0.0],
            array![0.0f32, 1.0, 0.0],
            10,
            12,
        )
        .unwrap();
        assert_eq!(axis.axis, array![1.0f32, -1.0, 0.0]);
        assert_eq!(axis.n_white, 10);
    }

    #[test]
    fn identical_means_are_degenerate() {
        let err = AdvantageAxis::from_means(
            array![0.5f32, 0.5],
            array![0.5f32, 0.5],
            3,
            3,
        )
        .unwrap_err();
        assert!(matches!(err, PlanError::DegenerateAxis { .. }));
    }

    #[test]
    fn axis_file_round_trip_and_corruption_detection() {
        let axis = AdvantageAxis::from_means(
            array![0.25f32, -0.5, 0.125, 0.0],
            array![-0.75f32, 0.5, 0.0, 1.0],
            100,
            200,
        )
        .unwrap();
        let dir = std::env::temp_dir().join("meridian-axis-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("axis.bin");
        save_axis(&axis, &path).unwrap();
        let loaded = load_axis(&path).unwrap();
        assert_eq!(loaded, axis);

        let mut bytes = std::fs::read(&path).unwrap();
        let len = bytes.len();
        bytes[len - 10] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_axis(&path),
            Err(PlanError::CorruptAxisFile(_))
        ));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn crc32_known_value() {
        // Standard IEEE CRC-32 of "123456789".
        assert_eq!(crc32(b"123456789"), 0xcbf4_3926);
    }
}
