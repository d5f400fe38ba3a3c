//! Adaptive ODE integration over real and complex state vectors.
//!
//! The backend is a Dormand-Prince 5(4) embedded pair with PI step-size
//! control. Accepted steps are resampled onto a uniform output grid by cubic
//! Hermite interpolation, which also drives event refinement. Complex states
//! are integrated as real pairs internally; the public contract is
//! complex-in/complex-out.

mod event;
mod solver;

pub use event::detect_event;
pub use solver::{integrate, integrate_complex};

use num_complex::Complex64;
use thiserror::Error;

/// Tolerances and output control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Relative local error tolerance.
    pub rel_tol: f64,
    /// Absolute local error tolerance.
    pub abs_tol: f64,
    /// Step size tried on the first step.
    pub initial_step: f64,
    /// Upper bound on the internal step size.
    pub max_step: f64,
    /// Output spacing in the independent variable. Samples are emitted on a
    /// uniform grid with spacing no larger than this.
    pub sample_stride: f64,
}

impl Default for IntegratorConfig {
    /// Tight defaults: integrations routinely run to several hundred time
    /// units and the error budget has to survive that.
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            initial_step: 1e-4,
            max_step: 1.0,
            sample_stride: 0.05,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rel_tol)
            || !ok(self.abs_tol)
            || !ok(self.initial_step)
            || !ok(self.max_step)
            || !ok(self.sample_stride)
        {
            return Err(IntegrationError::InvalidInput(format!(
                "integrator settings must be finite and positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// States that support linear interpolation between samples.
pub trait Lerp: Copy {
    fn lerp(a: Self, b: Self, s: f64) -> Self;
}

impl<const N: usize> Lerp for [f64; N] {
    fn lerp(a: Self, b: Self, s: f64) -> Self {
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = a[i] + s * (b[i] - a[i]);
        }
        out
    }
}

impl Lerp for Complex64 {
    fn lerp(a: Self, b: Self, s: f64) -> Self {
        a + s * (b - a)
    }
}

impl Lerp for f64 {
    fn lerp(a: Self, b: Self, s: f64) -> Self {
        a + s * (b - a)
    }
}

/// Time-ordered samples of a state on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
    config: IntegratorConfig,
}

impl<S> Trajectory<S> {
    /// Build a trajectory from raw samples, enforcing the grid invariants:
    /// equal lengths, at least two samples, strictly increasing times.
    pub fn from_samples(
        times: Vec<f64>,
        states: Vec<S>,
        config: IntegratorConfig,
    ) -> Result<Self, IntegrationError> {
        if times.len() != states.len() || times.len() < 2 {
            return Err(IntegrationError::InvalidInput(format!(
                "trajectory needs matching times/states with >= 2 samples, got {}/{}",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(IntegrationError::InvalidInput(
                "trajectory times must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            states,
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn first_time(&self) -> f64 {
        self.times[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Map states to another type, keeping the grid.
    pub fn map<T>(&self, mut f: impl FnMut(f64, &S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times.clone(),
            states: self.iter().map(|(t, s)| f(t, s)).collect(),
            config: self.config,
        }
    }
}

impl<S: Lerp> Trajectory<S> {
    /// State at `t` by linear interpolation between the bracketing samples.
    /// Returns `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<S> {
        if !(t >= self.first_time() && t <= self.last_time()) {
            return None;
        }
        let idx = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Some(self.states[i]),
            Err(i) => i, // first index with time > t; t is interior so 1..len
        };
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let s = (t - t0) / (t1 - t0);
        Some(S::lerp(self.states[idx - 1], self.states[idx], s))
    }
}

/// Integration failures. The runtime variants carry the partial trajectory
/// accumulated up to the failure so callers can flush what was computed.
#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("invalid integration input: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t} (stiffness or blow-up)")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudgetExhausted { t: f64 },
}

/// An integration error together with whatever samples were produced before
/// the failure.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct AbortedIntegration<S> {
    pub error: IntegrationError,
    /// Samples emitted before the failure; may hold fewer than two points.
    pub partial_times: Vec<f64>,
    pub partial_states: Vec<S>,
}

impl<S> AbortedIntegration<S> {
    /// Last time the integrator reached before giving up.
    pub fn last_time(&self) -> f64 {
        match self.error {
            IntegrationError::StepSizeUnderflow { t }
            | IntegrationError::NonFiniteState { t }
            | IntegrationError::StepBudgetExhausted { t } => t,
            IntegrationError::InvalidInput(_) => f64::NAN,
        }
    }

    /// Convert the carried partial samples to another state type.
    pub fn map_states<T>(self, f: impl Fn(&S) -> T) -> AbortedIntegration<T> {
        AbortedIntegration {
            error: self.error,
            partial_times: self.partial_times,
            partial_states: self.partial_states.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_rejects_bad_grids() {
        let cfg = IntegratorConfig::default();
        assert!(Trajectory::from_samples(vec![0.0], vec![1.0], cfg).is_err());
        assert!(Trajectory::from_samples(vec![0.0, 0.0], vec![1.0, 1.0], cfg).is_err());
        assert!(Trajectory::from_samples(vec![1.0, 0.5], vec![1.0, 1.0], cfg).is_err());
        assert!(Trajectory::from_samples(vec![0.0, 1.0], vec![1.0], cfg).is_err());
        assert!(Trajectory::from_samples(vec![0.0, 1.0], vec![1.0, 2.0], cfg).is_ok());
    }

    #[test]
    fn interpolation_is_linear_between_samples() {
        let cfg = IntegratorConfig::default();
        let traj = Trajectory::from_samples(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.0], cfg).unwrap();
        assert_eq!(traj.interpolate(0.5), Some(1.0));
        assert_eq!(traj.interpolate(2.0), Some(2.0));
        assert_eq!(traj.interpolate(3.0), Some(2.0));
        assert_eq!(traj.interpolate(-0.1), None);
        assert_eq!(traj.interpolate(3.1), None);
    }

    #[test]
    fn config_validation_rejects_nonpositive_fields() {
        let mut cfg = IntegratorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg.rel_tol = 1e-9;
        cfg.sample_stride = -0.05;
        assert!(cfg.validate().is_err());
    }
}
