//! Numerical laboratory for dissipative autoresonance.
//!
//! The crate integrates a swept-frequency Duffing oscillator and its complex
//! envelope (primary resonance) equation, evaluates the closed-form
//! autoresonant germ the captured solutions stick to, and measures the
//! quantities that characterise capture: fall time, peak amplitude, sticking
//! rate, and their power-law scaling in the dissipation strength.
//!
//! Modules:
//! - [`numerics`]: adaptive embedded Runge-Kutta integration with dense
//!   output and event refinement (real and complex states).
//! - [`resonance`]: right-hand sides and drivers for the envelope equation,
//!   its rescaled form, and the frequency-saturation controlled variant.
//! - [`germ`]: closed-form germ evaluation, eigenvalue expansion, life-time
//!   and peak-amplitude estimates, and a finite-difference residual check.
//! - [`duffing`]: the full oscillator, quadrature demodulation to an
//!   envelope, carrier reconstruction, and the cross-model comparison.
//! - [`experiments`]: fall detection, peak measurement, sticking-rate fits,
//!   and parameter sweeps with power-law regression.

// Validation guards use `!(x > y)` so NaN fails them; the positive form
// `x <= y` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duffing;
pub mod experiments;
pub mod germ;
pub mod numerics;
pub mod resonance;

pub use numerics::{IntegratorConfig, Trajectory};
pub use resonance::{SweepLaw, SystemParams};
