//! The truth-table network: layers, training and checkpoints.

pub mod block;
pub mod bn;
pub mod checkpoint;
pub mod model;
pub mod train;

pub use block::{LttBlock, LttSpec, MAX_BLOCK_INPUTS};
pub use bn::{bin_act, BatchNorm, BN_EPS, BN_MOMENTUM};
pub use checkpoint::Checkpoint;
pub use model::{FoldedHead, Forward, Head, HeadMode, Predictor, TtnetModel};
pub use train::{loss_and_gradients, recompute_bn_stats, train, train_with_progress, Gradients, TrainConfig};
