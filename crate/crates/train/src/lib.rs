//! Teacher-forced training: per-round supervision targets, the batched loss
//! graph, Adam/SGD optimization with cosine learning-rate decay and KL
//! warm-up, and a deterministic epoch loop with per-sample seed derivation
//! (results are independent of batch parallelism).

mod loss;
mod optim;
mod targets;
mod train;

pub use loss::{
    count_positions, sample_attr_accuracy, sample_forward, sample_loss, LossReport, LossScale,
    LossSums, SampleForward, SampleLoss,
};
pub use optim::{Optimizer, OptimizerKind};
pub use targets::{build_targets, RoundTarget, SampleTargets, TargetError};
pub use train::{heldout_accuracy, train, train_step, EarlyStop, TrainConfig, TrainError, TrainSummary};
