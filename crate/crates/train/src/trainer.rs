//! The training loop: sample, encode, SupCon, backprop, momentum step.

use crate::batch::Sampler;
use crate::dataset::{build_positive_index, Dataset};
use crate::error::TrainError;
use crate::loss::supcon_loss;
use crate::sgd::{sgd_step, SgdState};
use meridian_encoder::{
    checkpoint, forward_batch_traced, tokenize, EncoderConfig, Mode, ModelWeights, TokenSeq,
};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub delta: f64,
    pub tau: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            delta: 0.05,
            tau: 0.07,
            learning_rate: 0.05,
            momentum: 0.9,
            steps: 20_000,
            batch_size: 128,
            checkpoint_every: 5_000,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.tau <= 0.0 {
            return Err(TrainError::Config(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TrainError::Config(format!(
                "momentum must be in [0,1), got {}",
                self.momentum
            )));
        }
        if self.steps == 0 {
            return Err(TrainError::Config("steps must be >= 1".into()));
        }
        if self.delta <= 0.0 {
            return Err(TrainError::Config(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
    pub positive_sim: f64,
    pub negative_sim: f64,
    pub anchors: usize,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub final_checkpoint: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub loss_log: PathBuf,
    pub first_window_mean_loss: f64,
    pub last_window_mean_loss: f64,
}

/// Train an encoder from scratch. Writes `loss_log.tsv`, periodic
/// checkpoints, and `final.ckpt` into `out_dir`. Deterministic in the
/// config seed, independent of thread count.
pub fn train(
    dataset: &Dataset,
    encoder_config: EncoderConfig,
    config: &TrainConfig,
    out_dir: &Path,
    mut on_step: impl FnMut(&StepRecord),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    std::fs::create_dir_all(out_dir)?;

    let index = build_positive_index(dataset, config.delta);
    let sampler = Sampler::new(dataset, &index, config.batch_size)?;
    let seqs: Vec<TokenSeq> = dataset.rows.iter().map(|r| tokenize(&r.position)).collect();

    let mut weights: ModelWeights<f32> = ModelWeights::init(encoder_config, config.seed);
    let mut sgd = SgdState::new(&encoder_config);
    let lr = config.learning_rate as f32;
    let momentum = config.momentum as f32;

    let log_path = out_dir.join("loss_log.tsv");
    let mut log = std::io::BufWriter::new(std::fs::File::create(&log_path)?);
    writeln!(log, "step\tloss\tpositive_sim\tnegative_sim\tanchors")?;

    let mut checkpoints = Vec::new();
    let mut losses: Vec<f64> = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, step as u64, 0x5a));
        let batch = sampler.sample(&mut rng);
        let batch_seqs: Vec<TokenSeq> =
            batch.ids.iter().map(|&id| seqs[id as usize]).collect();

        let dropout_seed = mix(config.seed, step as u64, 0xd0);
        let (z, traces) =
            forward_batch_traced(&weights, &batch_seqs, Mode::Train { dropout_seed })
                .map_err(|source| TrainError::Encoder { step, source })?;
        let (report, d_z) = supcon_loss(&z, &batch.mask, config.tau)
            .map_err(|source| TrainError::Loss { step, source })?;
        let grads = meridian_encoder::backward(&weights, &traces, &d_z)
            .map_err(|source| TrainError::Encoder { step, source })?;
        sgd_step(&mut weights.params, &grads, &mut sgd, lr, momentum)
            .map_err(|_| TrainError::NonFiniteGradient { step })?;

        let record = StepRecord {
            step,
            loss: report.loss,
            positive_sim: report.mean_positive_sim,
            negative_sim: report.mean_negative_sim,
            anchors: report.anchors_with_positives,
        };
        writeln!(
            log,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{}",
            record.step, record.loss, record.positive_sim, record.negative_sim, record.anchors
        )?;
        if step % 200 == 0 {
            log.flush()?;
        }
        losses.push(report.loss);
        on_step(&record);

        let step_number = step + 1;
        if config.checkpoint_every > 0
            && step_number % config.checkpoint_every == 0
            && step_number < config.steps
        {
            let path = out_dir.join(format!("checkpoint_step{step_number}.ckpt"));
            checkpoint::save(&weights, &path)?;
            checkpoints.push(path);
        }
    }
    log.flush()?;

    let final_path = out_dir.join("final.ckpt");
    checkpoint::save(&weights, &final_path)?;
    checkpoints.push(final_path.clone());

    let window = (config.steps / 10).clamp(1, 100);
    let first_window_mean_loss = losses[..window].iter().sum::<f64>() / window as f64;
    let last_window_mean_loss =
        losses[losses.len() - window..].iter().sum::<f64>() / window as f64;

    Ok(TrainOutcome {
        final_checkpoint: final_path,
        checkpoints,
        loss_log: log_path,
        first_window_mean_loss,
        last_window_mean_loss,
    })
}

/// Derive independent per-step seeds from the master seed.
fn mix(seed: u64, step: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0xa076_1d64_78bd_642f))
        .wrapping_add(step.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
