//! Self-alignment training: synonym pairs, online hard-triplet mining,
//! Multi-Similarity loss, and the gradient-descent loop over the encoder.

mod loss;
mod mining;
mod pairs;
mod sgd;

pub use loss::{MsLossConfig, ms_loss};
pub use mining::{MiningConfig, Triplet, mine_hard_triplets, mine_hard_triplets_for_anchors};
pub use pairs::{
    PairFormatError, PositivePair, format_pair_line, generate_finetune_pairs, generate_pretrain_pairs,
    parse_pair_line,
};
pub use sgd::{
    EpochReport, Stage, TrainConfig, TrainError, TrainingRun, run_training, similarity_gap, train_epoch,
};
