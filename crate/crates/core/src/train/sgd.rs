use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MiningConfig, MsLossConfig, PositivePair, mine_hard_triplets_for_anchors, ms_loss};
use crate::encoder::{Activation, EncodeError, EncoderParams, Gradients};
use crate::ids::Cui;
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Pairs per batch; each batch encodes twice as many strings.
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 1e-4, weight_decay: 0.01, batch_size: 512, epochs: 1, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config("learning_rate must be a finite non-negative number"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(TrainError::Config("weight_decay must be a finite non-negative number"));
        }
        if self.batch_size < 2 {
            return Err(TrainError::Config("batch_size must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pretrain,
    Finetune,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("no training pairs")]
    NoPairs,
    #[error("invalid training configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_loss: f64,
    pub batches: usize,
    /// Batches in which no triplet violated the margin.
    pub empty_batches: usize,
    pub mined_triplets: usize,
}

impl EpochReport {
    pub fn nothing_mined(&self) -> bool {
        self.empty_batches == self.batches
    }
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64);
    rng
}

/// One pass over `pairs` in a seed-and-epoch determined order.
///
/// Each batch encodes both sides of its pairs, mines hard triplets on the
/// embeddings, takes the Multi-Similarity loss over cosine similarities and
/// applies `w ← w − lr·(g + weight_decay·w)`.
pub fn train_epoch(
    pairs: &[PositivePair],
    params: &mut EncoderParams,
    cfg: &TrainConfig,
    mining: &MiningConfig,
    loss_cfg: &MsLossConfig,
    epoch: usize,
) -> Result<EpochReport, TrainError> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(TrainError::NoPairs);
    }
    let mut rng = epoch_rng(cfg.seed, epoch);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);

    let mut grads = Gradients::zeros(&params.config);
    let mut report = EpochReport { epoch, mean_loss: 0.0, batches: 0, empty_batches: 0, mined_triplets: 0 };
    let mut loss_sum = 0.0;

    for chunk in order.chunks(cfg.batch_size) {
        let batch: Vec<&PositivePair> = chunk.iter().map(|&i| &pairs[i]).collect();
        let texts = batch.iter().map(|p| p.term_a.as_str()).chain(batch.iter().map(|p| p.term_b.as_str()));
        let labels: Vec<&Cui> = batch.iter().map(|p| &p.cui).chain(batch.iter().map(|p| &p.cui)).collect();
        let acts: Vec<Activation> = texts.map(|t| params.forward(t)).collect::<Result<_, _>>()?;
        let emb: Vec<Vec<f64>> = acts.iter().map(|a| a.output.clone()).collect();

        let anchors: Vec<usize> = if mining.sample_anchors {
            let mut members: BTreeMap<&Cui, Vec<usize>> = BTreeMap::new();
            for (i, l) in labels.iter().enumerate() {
                members.entry(*l).or_default().push(i);
            }
            let mut a: Vec<usize> =
                members.values().map(|m| m[rng.random_range(0..m.len())]).collect();
            a.sort_unstable();
            a
        } else {
            (0..emb.len()).collect()
        };
        let mined = mine_hard_triplets_for_anchors(&emb, &labels, mining.margin, &anchors);

        report.batches += 1;
        report.mined_triplets += mined.len();
        grads.clear();
        if mined.is_empty() {
            report.empty_batches += 1;
        } else {
            let e = Matrix::from_rows(&emb).expect("embeddings share a dimension");
            let sim = e.matmul(&e.transpose());
            let (loss, d_sim) = ms_loss(&sim, &labels, &mined, loss_cfg);
            loss_sum += loss;
            // S = E·Eᵀ, so dL/dE = (G + Gᵀ)·E
            let g_sym = {
                let gt = d_sim.transpose();
                let mut g = d_sim;
                for (x, y) in g.as_mut_slice().iter_mut().zip(gt.as_slice()) {
                    *x += y;
                }
                g
            };
            let d_emb = g_sym.matmul(&e);
            for (k, act) in acts.iter().enumerate() {
                let up = d_emb.row(k);
                if up.iter().any(|&x| x != 0.0) {
                    params.backward_into(act, up, 1.0, &mut grads);
                }
            }
        }
        params.apply_update(&grads, cfg.learning_rate, cfg.weight_decay);
    }
    report.mean_loss = loss_sum / report.batches as f64;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub params: EncoderParams,
    /// Mean loss of each epoch, in order.
    pub loss_log: Vec<f64>,
    pub reports: Vec<EpochReport>,
}

/// Trains for `epochs` epochs numbered from `start_epoch`, calling
/// `on_epoch` after each one. Zero epochs return `params` untouched.
///
/// Epoch `k` always sees the same pair order for a given seed, so running
/// 3 epochs and then 7 more from `start_epoch = 3` matches 10 straight.
#[allow(clippy::too_many_arguments)]
pub fn run_training<F>(
    mut params: EncoderParams,
    pairs: &[PositivePair],
    cfg: &TrainConfig,
    mining: &MiningConfig,
    loss_cfg: &MsLossConfig,
    start_epoch: usize,
    epochs: usize,
    mut on_epoch: F,
) -> Result<TrainingRun, TrainError>
where
    F: FnMut(&EpochReport, &EncoderParams),
{
    let mut loss_log = Vec::with_capacity(epochs);
    let mut reports = Vec::with_capacity(epochs);
    for epoch in start_epoch..start_epoch + epochs {
        let r = train_epoch(pairs, &mut params, cfg, mining, loss_cfg, epoch)?;
        on_epoch(&r, &params);
        loss_log.push(r.mean_loss);
        reports.push(r);
    }
    Ok(TrainingRun { params, loss_log, reports })
}

/// Mean within-concept and between-concept cosine similarity of the
/// encodings of `terms`.
pub fn similarity_gap(params: &EncoderParams, terms: &[(Cui, &str)]) -> Result<(f64, f64), EncodeError> {
    let emb: Vec<Vec<f64>> = terms.iter().map(|(_, t)| params.encode(t)).collect::<Result<_, _>>()?;
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..emb.len() {
        for j in i + 1..emb.len() {
            let s = linalg::dot(&emb[i], &emb[j]);
            if terms[i].0 == terms[j].0 {
                intra += s;
                ni += 1;
            } else {
                inter += s;
                nx += 1;
            }
        }
    }
    Ok((intra / ni.max(1) as f64, inter / nx.max(1) as f64))
}
