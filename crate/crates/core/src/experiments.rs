//! Measurement and verification layer: fall detection, peak measurement,
//! sticking-rate fits, and parameter sweeps with power-law regression.

use crate::germ::{germ_psi, life_time, GermError};
use crate::numerics::{detect_event, IntegratorConfig, Trajectory};
use crate::resonance::{simulate, SweepLaw, SystemParams};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Default fall threshold: half the autoresonant track.
pub const DEFAULT_C_FALL: f64 = 0.5;
/// Default lower cut skipping the initial transient, where an envelope
/// started at zero is still below the track.
pub const DEFAULT_TAU_MIN: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ExperimentsError {
    #[error("need at least {need} usable points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("power-law fit requires strictly positive data")]
    NonPositiveData,
    #[error("window ({0}, {1}) must lie inside (0, {2})")]
    WindowOutOfDomain(f64, f64, f64),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

/// First time past `tau_min` at which the envelope modulus drops below
/// `c_fall` times the captured track `sqrt(g(tau))`, refined by event
/// bisection; `None` if it never does.
///
/// The captured envelope rides `|psi| ~ sqrt(g(tau))` (the germ's leading
/// modulus when the sweep is linear), so dropping to a fixed fraction of
/// that track unambiguously marks the escape. For the saturating law the
/// track flattens at `sqrt(scale)` and the same criterion carries over.
pub fn detect_fall(
    traj: &Trajectory<Complex64>,
    law: &SweepLaw,
    c_fall: f64,
    tau_min: f64,
) -> Option<f64> {
    assert!(
        c_fall > 0.0 && c_fall < 1.0,
        "c_fall must lie in (0, 1), got {c_fall}"
    );
    assert!(tau_min > 0.0, "tau_min must be positive, got {tau_min}");
    detect_event(traj, |tau, psi| {
        if tau <= tau_min {
            1.0
        } else {
            psi.norm() - c_fall * law.detuning(tau).sqrt()
        }
    })
}

/// Sample time and value of the largest envelope modulus.
pub fn measure_max(traj: &Trajectory<Complex64>) -> (f64, f64) {
    let mut best_t = traj.first_time();
    let mut best = traj.states()[0].norm();
    for (t, psi) in traj.iter() {
        let a = psi.norm();
        if a > best {
            best = a;
            best_t = t;
        }
    }
    (best_t, best)
}

/// Exponential rate at which a captured envelope approaches the germ.
///
/// The deviation `d(tau) = |psi - germ|` rotates as it decays, so its raw
/// logarithm is contaminated by near-zeros; the fit therefore uses the
/// envelope of local maxima of `d` inside `window`. When the deviation is
/// monotone (no interior maxima to speak of) all positive samples are used
/// instead. Returns the positive decay rate, i.e. minus the fitted slope of
/// `ln d` against `tau`.
pub fn fit_sticking_rate(
    traj: &Trajectory<Complex64>,
    params: &SystemParams,
    window: (f64, f64),
) -> Result<f64, ExperimentsError> {
    let life = life_time(params);
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi < life) {
        return Err(ExperimentsError::WindowOutOfDomain(lo, hi, life));
    }

    let mut taus = Vec::new();
    let mut devs = Vec::new();
    for (tau, psi) in traj.iter() {
        if tau < lo || tau > hi {
            continue;
        }
        taus.push(tau);
        devs.push((psi - germ_psi(tau, params)?).norm());
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 1..devs.len().saturating_sub(1) {
        if devs[i] > devs[i - 1] && devs[i] > devs[i + 1] {
            xs.push(taus[i]);
            ys.push(devs[i].ln());
        }
    }
    if xs.len() < 3 {
        // Monotone deviation: fit every positive sample directly.
        xs.clear();
        ys.clear();
        for (&tau, &d) in taus.iter().zip(&devs) {
            if d > 0.0 {
                xs.push(tau);
                ys.push(d.ln());
            }
        }
    }
    if xs.len() < 3 {
        return Err(ExperimentsError::TooFewPoints {
            need: 3,
            got: xs.len(),
        });
    }
    let (slope, _, _) = linear_ols(&xs, &ys);
    Ok(-slope)
}

/// Log-log least-squares fit of `y = C x^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Fitted exponent `p` (the slope in log-log coordinates).
    pub exponent: f64,
    /// `ln C`, the intercept in log-log coordinates.
    pub log_prefactor: f64,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit, ExperimentsError> {
    if points.len() < 2 {
        return Err(ExperimentsError::TooFewPoints {
            need: 2,
            got: points.len(),
        });
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(ExperimentsError::NonPositiveData);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = linear_ols(&xs, &ys);
    Ok(PowerLawFit {
        exponent: slope,
        log_prefactor: intercept,
        r_squared,
        n_points: points.len(),
    })
}

fn linear_ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let fitted = intercept + slope * x;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Parameter grid and per-run settings for a capture sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub beta_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub psi0: Complex64,
    /// Integrate each run to this multiple of the predicted life time; 1.5
    /// keeps the fall inside the window for order-one constants.
    pub tau_horizon_factor: f64,
    pub c_fall: f64,
    pub tau_min: f64,
    pub config: IntegratorConfig,
}

impl SweepSpec {
    pub fn new(beta_values: Vec<f64>, f_values: Vec<f64>) -> Self {
        Self {
            beta_values,
            f_values,
            psi0: Complex64::new(0.0, 0.0),
            tau_horizon_factor: 1.5,
            c_fall: DEFAULT_C_FALL,
            tau_min: DEFAULT_TAU_MIN,
            config: IntegratorConfig::default(),
        }
    }

    fn validate(&self) -> Result<(), ExperimentsError> {
        let bad = |v: &f64| !(v.is_finite() && *v > 0.0);
        if self.beta_values.iter().any(bad) || self.f_values.iter().any(bad) {
            return Err(ExperimentsError::InvalidSweep(
                "beta and f values must be positive and finite".into(),
            ));
        }
        if !(self.tau_horizon_factor > 1.0) {
            return Err(ExperimentsError::InvalidSweep(format!(
                "horizon factor must exceed 1, got {}",
                self.tau_horizon_factor
            )));
        }
        if !(self.c_fall > 0.0 && self.c_fall < 1.0) || !(self.tau_min > 0.0) {
            return Err(ExperimentsError::InvalidSweep(
                "fall criterion out of range".into(),
            ));
        }
        if !self.psi0.re.is_finite() || !self.psi0.im.is_finite() {
            return Err(ExperimentsError::InvalidSweep("psi0 must be finite".into()));
        }
        self.config
            .validate()
            .map_err(|e| ExperimentsError::InvalidSweep(e.to_string()))
    }
}

/// Measurements for one sweep point. A failed integration is recorded in
/// `error` with whatever partial measurements were possible.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub params: SystemParams,
    pub tau_fall: Option<f64>,
    pub max_abs: f64,
    pub tau_at_max: f64,
    pub decay_rate: Option<f64>,
    pub error: Option<String>,
}

/// Run every `(beta, f)` pair of the spec (beta outermost) and measure fall
/// time, peak modulus, and sticking rate. Points execute in parallel;
/// records come back in input order regardless of scheduling, and individual
/// integration failures are recorded per point rather than failing the
/// sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, ExperimentsError> {
    spec.validate()?;
    let pairs: Vec<(f64, f64)> = spec
        .beta_values
        .iter()
        .flat_map(|&b| spec.f_values.iter().map(move |&f| (b, f)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(beta, f)| run_point(spec, beta, f))
        .collect())
}

fn run_point(spec: &SweepSpec, beta: f64, f: f64) -> SweepRecord {
    let params = SystemParams::new(beta, f).expect("sweep spec validated");
    let life = life_time(&params);
    let horizon = spec.tau_horizon_factor * life;
    match simulate(
        &params,
        spec.psi0,
        (0.0, horizon),
        &SweepLaw::Linear,
        &spec.config,
    ) {
        Ok(traj) => {
            let (tau_at_max, max_abs) = measure_max(&traj);
            let tau_fall = detect_fall(&traj, &SweepLaw::Linear, spec.c_fall, spec.tau_min);
            let decay_rate =
                fit_sticking_rate(&traj, &params, (0.05 * life, 0.5 * life)).ok();
            SweepRecord {
                params,
                tau_fall,
                max_abs,
                tau_at_max,
                decay_rate,
                error: None,
            }
        }
        Err(aborted) => {
            let (tau_at_max, max_abs) = aborted
                .partial_times
                .iter()
                .zip(&aborted.partial_states)
                .fold((0.0, 0.0), |(bt, bv), (&t, s)| {
                    if s.norm() > bv {
                        (t, s.norm())
                    } else {
                        (bt, bv)
                    }
                });
            SweepRecord {
                params,
                tau_fall: None,
                max_abs,
                tau_at_max,
                decay_rate: None,
                error: Some(aborted.error.to_string()),
            }
        }
    }
}
