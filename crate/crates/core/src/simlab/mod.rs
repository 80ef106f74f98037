//! Desk-scale dense retrieval lab: a shared linear encoder trained with a
//! contrastive loss on a synthetic Gaussian task, evaluated in distribution,
//! under a rotation shift, and under an embedding-space attack.

mod attack;
mod encoder;
mod task;
mod train;

pub use attack::{adversarial_perturb, attack_offsets, DEFAULT_ATTACK_STEPS, DEFAULT_EPSILON};
pub use encoder::{contrastive_loss_and_grad, Batch, EncoderParams, NegativeAttack};
pub use task::{generate_task, Task, TaskConfig, TestSplit};
pub use train::{
    evaluate_encoder, pareto_weight_update, pilot_omega0, train, Evaluation, RunResult, StepLosses, Strategy,
    TrainConfig, PILOT_WEIGHTS,
};
