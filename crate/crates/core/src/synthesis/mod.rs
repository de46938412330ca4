//! 1-bit phase-code synthesis: targets, the mask error, greedy single-flip
//! descent and closed-form quantized steering.

mod greedy;
mod objective;
mod steering;
mod target;

pub use greedy::{
    greedy_flip_optimize, optimize_with_contributions, OptimizationTrace, OptimizerConfig, StopReason, TraceStep,
    TIE_GUARD,
};
pub use objective::{mse_objective, normalized_cross_correlation};
pub use steering::{pattern_from_incidence_pair, quantized_steering_code, stripe_period};
pub use target::{MaskTarget, TargetKind, TargetSpec, Weighting};
