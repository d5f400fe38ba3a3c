//! Closed-form evaluation of the autoresonant germ, the distinguished slowly
//! varying solution that captured envelopes stick to.
//!
//! Two equivalent representations are implemented independently: `germ_psi`
//! in the original variables `(tau, psi)` and `germ_phi` in the rescaled
//! variables `theta = beta^2 tau`, `phi = beta psi`. They describe the same
//! object and the identity `beta * germ_psi(tau) = germ_phi(beta^2 tau)` is
//! enforced by tests rather than by construction, so the two code paths
//! cross-check each other.
//!
//! The germ lives on `0 < theta < f^2`; the upper boundary is the life time
//! of the captured phase, not a numerical artifact.

use crate::resonance::SystemParams;
use num_complex::Complex64;
use thiserror::Error;

/// Relative guard margin keeping evaluations away from the domain endpoints,
/// where the coefficient functions divide by zero.
const THETA_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GermError {
    #[error("{name} = {value} outside the germ domain ({lo}, {hi})")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("drive amplitude f must be positive and finite, got {0}")]
    InvalidDrive(f64),
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

fn check_drive(f: f64) -> Result<(), GermError> {
    if !(f.is_finite() && f > 0.0) {
        return Err(GermError::InvalidDrive(f));
    }
    Ok(())
}

fn domain_err(name: &'static str, value: f64, lo: f64, hi: f64) -> GermError {
    GermError::Domain {
        name,
        value,
        lo,
        hi,
    }
}

/// Open `theta` interval on which the beta-correction functions are finite,
/// with the guard margin applied.
fn open_theta_domain(f: f64) -> (f64, f64) {
    let f2 = f * f;
    (THETA_GUARD * f2, f2 * (1.0 - THETA_GUARD))
}

/// Base phase angle of the germ: the branch with
/// `sin(alpha0) = -sqrt(theta)/f` and `cos(alpha0) = -sqrt(f^2 - theta)/f`,
/// i.e. `e^{i alpha0}` equals the phase factor
/// `(-sqrt(f^2 - theta)/f - i sqrt(theta)/f)`. Range `[-pi, -pi/2]`.
pub fn alpha0(theta: f64, f: f64) -> Result<f64, GermError> {
    check_drive(f)?;
    let f2 = f * f;
    if !(0.0..=f2).contains(&theta) {
        return Err(domain_err("theta", theta, 0.0, f2));
    }
    let sin = -theta.sqrt() / f;
    let cos = -(f2 - theta).sqrt() / f;
    if theta == 0.0 {
        return Ok(-std::f64::consts::PI);
    }
    Ok(sin.atan2(cos))
}

/// First phase correction coefficient `alpha1 = 1 / (2 sqrt(theta (f^2 - theta)))`.
/// Positive, diverging at both endpoints of the domain.
pub fn alpha1(theta: f64, f: f64) -> Result<f64, GermError> {
    check_drive(f)?;
    let (lo, hi) = open_theta_domain(f);
    if !(theta > lo && theta < hi) {
        return Err(domain_err("theta", theta, lo, hi));
    }
    Ok(1.0 / (2.0 * (theta * (f * f - theta)).sqrt()))
}

/// Modulus correction coefficient `rho1 = sqrt(f^2 - theta) / (2 theta)`,
/// zero at `theta = f^2`.
pub fn rho1(theta: f64, f: f64) -> Result<f64, GermError> {
    check_drive(f)?;
    let f2 = f * f;
    let lo = THETA_GUARD * f2;
    if !(theta > lo && theta <= f2) {
        return Err(domain_err("theta", theta, lo, f2));
    }
    Ok((f2 - theta).sqrt() / (2.0 * theta))
}

/// Germ value in the rescaled variables together with its constituent
/// pieces, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GermEvaluation {
    pub value: Complex64,
    /// `sqrt(theta) + beta^3 rho1(theta)`; equals `|value|` because the phase
    /// factor has unit modulus.
    pub modulus_factor: f64,
    /// Base angle `alpha0(theta)`.
    pub phase_base: f64,
    /// Correction angle `beta * alpha1(theta)`.
    pub phase_correction: f64,
    pub theta: f64,
}

/// Germ in the rescaled variables:
/// `(sqrt(theta) + beta^3 rho1) e^{i alpha0} e^{i beta alpha1}`.
pub fn germ_phi(theta: f64, params: &SystemParams) -> Result<GermEvaluation, GermError> {
    let (beta, f) = (params.beta(), params.f());
    let a0 = alpha0(theta, f)?;
    let a1 = alpha1(theta, f)?;
    let r1 = rho1(theta, f)?;
    let modulus_factor = theta.sqrt() + beta.powi(3) * r1;
    let phase_correction = beta * a1;
    Ok(GermEvaluation {
        value: Complex64::from_polar(modulus_factor, a0 + phase_correction),
        modulus_factor,
        phase_base: a0,
        phase_correction,
        theta,
    })
}

/// Germ in the original variables, evaluated from its explicit display:
///
/// ```text
/// (sqrt(tau) + sqrt(f^2 - beta^2 tau) / (2 tau))
///   * (-sqrt(f^2 - beta^2 tau)/f - i beta sqrt(tau)/f)
///   * e^{i / (2 sqrt(tau (f^2 - beta^2 tau)))}
/// ```
///
/// Identical to `germ_phi(beta^2 tau) / beta`, but computed along an
/// independent algebraic route.
pub fn germ_psi(tau: f64, params: &SystemParams) -> Result<Complex64, GermError> {
    let (beta, f) = (params.beta(), params.f());
    let (lo, hi) = open_theta_domain(f);
    let theta = beta * beta * tau;
    if !(theta > lo && theta < hi) {
        return Err(domain_err("tau", tau, lo / (beta * beta), hi / (beta * beta)));
    }
    let root = (f * f - beta * beta * tau).sqrt();
    let modulus = tau.sqrt() + root / (2.0 * tau);
    let phase_factor = Complex64::new(-root / f, -beta * tau.sqrt() / f);
    let correction = Complex64::from_polar(1.0, 1.0 / (2.0 * (tau * (f * f - beta * beta * tau)).sqrt()));
    Ok(modulus * phase_factor * correction)
}

/// Eigenvalues of the linearised sticking dynamics in the fast variable,
/// truncated after the three displayed orders in beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvaluePair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

/// Truncated eigenvalue expansion
/// `lambda_{1,2} = +-i (2 theta)^{1/2} (f^2-theta)^{1/4} beta^{1/2}
///                -+ i (theta (f^2-theta))^{1/4} / (2 sqrt(2) (f^2-theta)) beta^{3/2}
///                - beta^2 / 2`.
/// Both real parts equal `-beta^2 / 2`, which is the stability statement at
/// the level of this truncation.
pub fn eigenvalues(theta: f64, params: &SystemParams) -> Result<EigenvaluePair, GermError> {
    let (beta, f) = (params.beta(), params.f());
    check_drive(f)?;
    let (lo, hi) = open_theta_domain(f);
    if !(theta > lo && theta < hi) {
        return Err(domain_err("theta", theta, lo, hi));
    }
    let f2 = f * f;
    let im_leading = (2.0 * theta).sqrt() * (f2 - theta).powf(0.25) * beta.sqrt();
    let im_correction = (theta * (f2 - theta)).powf(0.25)
        / (2.0 * std::f64::consts::SQRT_2 * (f2 - theta))
        * beta.powf(1.5);
    let re = -0.5 * beta * beta;
    let im = im_leading - im_correction;
    Ok(EigenvaluePair {
        lambda1: Complex64::new(re, im),
        lambda2: Complex64::new(re, -im),
    })
}

/// Life time of the germ, `f^2 / beta^2`: past this point the captured
/// branch no longer exists.
pub fn life_time(params: &SystemParams) -> f64 {
    let m = max_amplitude(params);
    m * m
}

/// Peak envelope modulus of captured solutions, `f / beta`.
pub fn max_amplitude(params: &SystemParams) -> f64 {
    params.f() / params.beta()
}

/// Defect of the germ in the envelope equation,
/// `i D_h[germ_psi](tau) + (tau - |G|^2) G + i beta G - f` with `G = germ_psi(tau)`
/// and `D_h` a central difference of step `h`.
///
/// The derivative is differenced rather than differentiated analytically so
/// the check does not share algebra with the formula under test. A step of
/// `1e-4 * tau` keeps the difference error far below the defect itself.
pub fn residual(tau: f64, params: &SystemParams, h: f64) -> Result<Complex64, GermError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(GermError::InvalidStep(h));
    }
    let plus = germ_psi(tau + h, params)?;
    let minus = germ_psi(tau - h, params)?;
    let here = germ_psi(tau, params)?;
    let derivative = (plus - minus) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    Ok(i * derivative + (tau - here.norm_sqr()) * here + i * params.beta() * here - params.f())
}

/// Default differencing step for [`residual`].
pub fn residual_step(tau: f64) -> f64 {
    1e-4 * tau
}
