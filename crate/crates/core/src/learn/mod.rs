//! Inverse rendering: image losses, gradient assembly through the hit ledger,
//! projected Adam updates and the multi-view training loop.

mod backward;
mod driver;
mod gradcheck;
mod loss;
mod optim;
#[cfg(test)]
mod tests;

pub use backward::{backward, GradBuffer};
pub use driver::{learn, learn_with, HistoryRow, LearnConfig, LearnOutcome, StopReason, View};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport, Probe};
pub use loss::{loss_sim, loss_tv, normalized_rmse, tv_grid_shape, LossConfig};
pub use optim::{adam_step, AdamConfig, Bounds, EPS_R_FLOOR, OptimState, ParamBinding, ParamSpace, Scale};
