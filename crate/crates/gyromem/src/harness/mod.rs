//! Scenario harness: configuration schemas, study runners, and the
//! dimensional-analysis calculator that back the command-line interface.

pub mod report;
pub mod scaling;
pub mod studies;

pub use report::load_config;
pub use scaling::{scaling_groups, PhysicalScales, ScalingGroups};
pub use studies::{
    run_effective, run_epsilon_sweep, run_kernel_validate, run_resonance, run_scaling,
    run_twoscale, EffectiveConfig, KernelValidateConfig, PhaseAxis, ResonanceConfig, SweepConfig,
    TwoScaleConfig,
};
