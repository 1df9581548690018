//! Memory kernels, effective transport, and particle cross-checks for
//! strongly magnetized Vlasov dynamics.
//!
//! The crate studies charged particles in a magnetic field `M / eps` (with
//! `M = e1` and `eps` small) plus a perpendicular electric field that may
//! oscillate in time. Averaging over the fast gyration leaves an effective
//! model for each spatial Fourier mode: an integro-differential equation in
//! time whose memory kernel is built from Bessel functions of the field's
//! time-integrated drift. The pieces here let you
//!
//! * evaluate that kernel three independent ways ([`kernel`]): two closed
//!   forms valid for special field classes, plus a numerical reconstruction
//!   that inverts a first-kind Volterra equation on a time grid;
//! * integrate the effective mode equation and compare it against the exact
//!   damping-factor solution available when the kernel closes ([`effective`]);
//! * push particles of the original `eps`-dependent system with a splitting
//!   scheme that treats the stiff rotation exactly ([`vlasov`]);
//! * evaluate the closed-form two-scale limit and weak-* observables against
//!   the particle runs ([`two_scale`]);
//! * check the dimensionless scaling regime of a physical parameter set
//!   ([`harness::scaling`]).
//!
//! # Entry points
//!
//! Each major capability has a runnable example:
//!
//! * `kernel_validation` reconstructs the kernel numerically and compares
//!   all three routes,
//! * `effective_vs_exact` integrates the mode equation against the exact
//!   damping factor,
//! * `route_triangulation` cross-checks effective, exact, and particle
//!   routes on one initial datum,
//! * `epsilon_sweep` measures the weak-* gap between particle runs and the
//!   two-scale limit as `eps` shrinks,
//! * `resonance_demo` pushes a resonant beam where naive integrators drift,
//! * `scaling_calculator` classifies a physical parameter set.
//!
//! The thin `gyromem` binary exposes the same studies as subcommands
//! (`kernel-validate`, `effective`, `twoscale`, `epsilon-sweep`, `resonance`,
//! `scaling`), each taking `--config <path>`, `--out <dir>`, `--seed <u64>`.

pub mod effective;
pub mod error;
pub mod fields;
pub mod harness;
pub mod kernel;
pub mod math;
pub mod two_scale;
pub mod vlasov;

pub use error::{Error, Result};
