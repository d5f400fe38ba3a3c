//! The full swept-frequency Duffing oscillator, demodulation of its solution
//! to a complex envelope, and reconstruction of the oscillator signal from
//! an envelope trajectory.
//!
//! The oscillator is
//!
//! ```text
//! u'' + u + 4 eps^{2/3} beta u' - 2 sqrt(2) u^3 = 4 sqrt(2) eps f cos(omega(t) t)
//! ```
//!
//! with `omega(t) = 1 - eps^{4/3} t`. The carrier phase is the literal
//! forcing argument `phi(t) = omega(t) t = t - eps^{4/3} t^2`, and envelopes
//! index slow time `tau = eps^{2/3} t`.

use crate::experiments::{detect_fall, DEFAULT_C_FALL, DEFAULT_TAU_MIN};
use crate::numerics::{
    integrate, AbortedIntegration, IntegrationError, IntegratorConfig, Lerp, Trajectory,
};
use crate::resonance::{simulate, ParamsError, SweepLaw, SystemParams};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Carrier resolution guard: at least ~30 integration steps per unit-
/// frequency period protect the demodulation accuracy.
pub const MAX_CARRIER_STEP: f64 = 0.2;

#[derive(Debug, Error)]
pub enum DuffingError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("carrier chirp rate is nonpositive at t = {0}; the sweep has passed its turning point")]
    ChirpReversed(f64),
    #[error("oscillator integration failed: {0}")]
    Oscillator(#[from] AbortedIntegration<RealState>),
    #[error("envelope integration failed: {0}")]
    Envelope(#[from] AbortedIntegration<Complex64>),
    #[error(transparent)]
    Numerics(#[from] IntegrationError),
}

/// Displacement and velocity of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealState {
    pub u: f64,
    pub v: f64,
}

impl RealState {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

impl Lerp for RealState {
    fn lerp(a: Self, b: Self, s: f64) -> Self {
        Self {
            u: a.u + s * (b.u - a.u),
            v: a.v + s * (b.v - a.v),
        }
    }
}

/// Carrier phase `phi(t) = t - eps^{4/3} t^2` and its rate
/// `phi'(t) = 1 - 2 eps^{4/3} t`.
#[derive(Debug, Clone, Copy)]
pub struct CarrierPhase {
    chirp: f64,
}

impl CarrierPhase {
    pub fn new(params: &SystemParams) -> Result<Self, ParamsError> {
        let eps = params.require_epsilon()?;
        Ok(Self {
            chirp: eps.powf(4.0 / 3.0),
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        t - self.chirp * t * t
    }

    pub fn rate(&self, t: f64) -> f64 {
        1.0 - 2.0 * self.chirp * t
    }
}

/// Precomputed oscillator right-hand side coefficients.
struct DuffingRhs {
    damping: f64,
    cubic: f64,
    drive: f64,
    chirp: f64,
}

impl DuffingRhs {
    fn new(params: &SystemParams) -> Result<Self, ParamsError> {
        let eps = params.require_epsilon()?;
        Ok(Self {
            damping: 4.0 * eps.powf(2.0 / 3.0) * params.beta(),
            cubic: 2.0 * SQRT_2,
            drive: 4.0 * SQRT_2 * eps * params.f(),
            chirp: eps.powf(4.0 / 3.0),
        })
    }

    #[inline]
    fn eval(&self, t: f64, u: f64, v: f64) -> [f64; 2] {
        let forcing = self.drive * ((1.0 - self.chirp * t) * t).cos();
        [
            v,
            -u - self.damping * v + self.cubic * u * u * u + forcing,
        ]
    }
}

/// Oscillator derivative `(u', v')`. `params` must carry epsilon.
pub fn duffing_rhs(t: f64, state: &RealState, params: &SystemParams) -> RealState {
    let rhs = DuffingRhs::new(params).expect("duffing_rhs requires epsilon");
    let d = rhs.eval(t, state.u, state.v);
    RealState { u: d[0], v: d[1] }
}

/// Integrate the oscillator over `t_span`. The step size is capped at
/// [`MAX_CARRIER_STEP`] so the unit-frequency carrier stays resolved.
pub fn simulate_duffing(
    params: &SystemParams,
    state0: RealState,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Trajectory<RealState>, DuffingError> {
    let rhs = DuffingRhs::new(params)?;
    let config = IntegratorConfig {
        max_step: config.max_step.min(MAX_CARRIER_STEP),
        ..*config
    };
    let traj = integrate::<2>(
        move |t, y| rhs.eval(t, y[0], y[1]),
        [state0.u, state0.v],
        t_span,
        &config,
    )
    .map_err(|a| a.map_states(|s| RealState { u: s[0], v: s[1] }))?;
    Ok(traj.map(|_, s| RealState { u: s[0], v: s[1] }))
}

/// Extract the complex envelope from an oscillator trajectory using the
/// quadrature pair `(u, u')` and the known carrier:
///
/// ```text
/// psi_est(tau) = e^{-i phi(t)} (u - i v / phi'(t)) / (2 eps^{1/3}),  tau = eps^{2/3} t
/// ```
///
/// Dividing the velocity by the instantaneous carrier rate keeps the
/// counter-rotating image cancelled exactly for a chirped carrier, so the
/// leading error is the slow-envelope derivative rather than the
/// accumulated detuning of the sweep.
pub fn demodulate(
    traj: &Trajectory<RealState>,
    params: &SystemParams,
) -> Result<Trajectory<Complex64>, DuffingError> {
    let eps = params.require_epsilon()?;
    let mut taus = Vec::with_capacity(traj.len());
    let mut envelopes = Vec::with_capacity(traj.len());
    for (t, s) in traj.iter() {
        let (tau, psi) = demodulate_point(t, s, params)?;
        taus.push(tau);
        envelopes.push(psi);
    }
    let config = scale_config(traj.config(), eps.powf(2.0 / 3.0));
    Ok(Trajectory::from_samples(taus, envelopes, config)?)
}

/// Envelope estimate at a single sample, returned as `(tau, psi_est)`.
pub fn demodulate_point(
    t: f64,
    state: &RealState,
    params: &SystemParams,
) -> Result<(f64, Complex64), DuffingError> {
    let eps = params.require_epsilon()?;
    let phase = CarrierPhase::new(params)?;
    let rate = phase.rate(t);
    if rate <= 0.0 {
        return Err(DuffingError::ChirpReversed(t));
    }
    let quadrature = Complex64::new(state.u, -state.v / rate);
    let carrier = Complex64::from_polar(1.0, -phase.value(t));
    let psi = carrier * quadrature / (2.0 * eps.powf(1.0 / 3.0));
    Ok((eps.powf(2.0 / 3.0) * t, psi))
}

/// Rebuild the oscillator signal from an envelope trajectory indexed by
/// `tau`:
///
/// ```text
/// u(t) = 2 eps^{1/3} Re(psi(tau) e^{i phi(t)}),  t = tau / eps^{2/3}
/// ```
///
/// The velocity differentiates the carrier only; the slow-envelope
/// derivative is dropped, consistent with the leading-order ansatz.
pub fn reconstruct(
    psi_traj: &Trajectory<Complex64>,
    params: &SystemParams,
) -> Result<Trajectory<RealState>, DuffingError> {
    let eps = params.require_epsilon()?;
    let phase = CarrierPhase::new(params)?;
    let e13 = eps.powf(1.0 / 3.0);
    let e23 = eps.powf(2.0 / 3.0);

    let mut times = Vec::with_capacity(psi_traj.len());
    let mut states = Vec::with_capacity(psi_traj.len());
    for (tau, psi) in psi_traj.iter() {
        let t = tau / e23;
        let rotated = psi * Complex64::from_polar(1.0, phase.value(t));
        times.push(t);
        states.push(RealState {
            u: 2.0 * e13 * rotated.re,
            v: -2.0 * e13 * phase.rate(t) * rotated.im,
        });
    }
    let config = scale_config(psi_traj.config(), 1.0 / e23);
    Ok(Trajectory::from_samples(times, states, config)?)
}

fn scale_config(config: &IntegratorConfig, factor: f64) -> IntegratorConfig {
    IntegratorConfig {
        initial_step: config.initial_step * factor,
        max_step: config.max_step * factor,
        sample_stride: config.sample_stride * factor,
        ..*config
    }
}

/// Side-by-side run of the oscillator and the envelope equation.
#[derive(Debug, Clone)]
pub struct ModelComparison {
    /// Oscillator samples over `t`.
    pub duffing: Trajectory<RealState>,
    /// Demodulated envelope, indexed by `tau`.
    pub envelope: Trajectory<Complex64>,
    /// Envelope-equation solution at the same `tau` grid points.
    pub reference: Vec<Complex64>,
    /// `|envelope - reference|` per grid point.
    pub deviation_abs: Vec<f64>,
    pub max_abs_u: f64,
    pub t_at_max_u: f64,
    /// Oscillator-side fall time, in `t`, from the demodulated envelope.
    pub fall_time_t: Option<f64>,
    /// Largest envelope deviation over the whole grid.
    pub max_deviation: f64,
}

impl ModelComparison {
    /// Largest deviation and largest reference modulus over a `tau` window.
    pub fn deviation_in_window(&self, tau_lo: f64, tau_hi: f64) -> (f64, f64) {
        let mut dev = 0.0f64;
        let mut ampl = 0.0f64;
        for ((tau, _), (d, r)) in self
            .envelope
            .iter()
            .zip(self.deviation_abs.iter().zip(&self.reference))
        {
            if tau < tau_lo || tau > tau_hi {
                continue;
            }
            dev = dev.max(*d);
            ampl = ampl.max(r.norm());
        }
        (dev, ampl)
    }
}

/// Run the oscillator from rest and the envelope equation from zero over the
/// matching spans, demodulate the oscillator, and report the discrepancy on
/// the common `tau` grid together with `max |u|` and the oscillator-side
/// fall time. The two integrations run concurrently and merge
/// deterministically.
pub fn compare_models(
    params: &SystemParams,
    t_span: (f64, f64),
    config: &IntegratorConfig,
) -> Result<ModelComparison, DuffingError> {
    let eps = params.require_epsilon()?;
    let e23 = eps.powf(2.0 / 3.0);
    let tau_span = (e23 * t_span.0, e23 * t_span.1);
    let envelope_cfg = IntegratorConfig {
        sample_stride: config.sample_stride * e23,
        ..*config
    };

    let p = *params;
    let (duffing_run, envelope_run) = rayon::join(
        || simulate_duffing(&p, RealState::new(0.0, 0.0), t_span, config),
        || {
            simulate(
                &p,
                Complex64::new(0.0, 0.0),
                tau_span,
                &SweepLaw::Linear,
                &envelope_cfg,
            )
        },
    );
    let duffing = duffing_run?;
    let psi = envelope_run?;
    let envelope = demodulate(&duffing, params)?;

    let reference: Vec<Complex64> = envelope
        .times()
        .iter()
        .map(|&tau| {
            psi.interpolate(tau)
                .unwrap_or(*psi.states().last().expect("envelope run is non-empty"))
        })
        .collect();
    let deviation_abs: Vec<f64> = envelope
        .states()
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).norm())
        .collect();
    let max_deviation = deviation_abs.iter().copied().fold(0.0, f64::max);

    let (mut t_at_max_u, mut max_abs_u) = (duffing.first_time(), 0.0f64);
    for (t, s) in duffing.iter() {
        if s.u.abs() > max_abs_u {
            max_abs_u = s.u.abs();
            t_at_max_u = t;
        }
    }

    let fall_time_t =
        detect_fall(&envelope, &SweepLaw::Linear, DEFAULT_C_FALL, DEFAULT_TAU_MIN)
            .map(|tau| tau / e23);

    Ok(ModelComparison {
        duffing,
        envelope,
        reference,
        deviation_abs,
        max_abs_u,
        t_at_max_u,
        fall_time_t,
        max_deviation,
    })
}
