//! The four subcommand bodies.

use crate::output::{num, opt_num, CsvWriter};
use crate::settings::Resolved;
use crate::{CliError, DuffingArgs, GermArgs, LawArg, SimulateArgs, SweepArgs};
use autoreson::duffing::{compare_models, demodulate, demodulate_point, simulate_duffing, DuffingError, RealState};
use autoreson::experiments::{
    fit_power_law, run_sweep, SweepRecord, SweepSpec, DEFAULT_C_FALL, DEFAULT_TAU_MIN,
};
use autoreson::germ;
use autoreson::resonance::simulate as simulate_envelope;
use autoreson::{SweepLaw, SystemParams};
use num_complex::Complex64;

fn law_from(
    resolved: &Resolved,
    flag_law: Option<LawArg>,
    flag_scale: Option<f64>,
    params: &SystemParams,
) -> Result<(SweepLaw, LawArg, f64), CliError> {
    let law_arg = match flag_law {
        Some(l) => l,
        None => resolved
            .file
            .get_law("sweep-law")?
            .unwrap_or(LawArg::Linear),
    };
    let scale = flag_scale
        .or(resolved.file.get_f64("sweep-scale")?)
        .unwrap_or(params.beta() / params.f());
    let law = match law_arg {
        LawArg::Linear => SweepLaw::Linear,
        LawArg::Saturating => {
            SweepLaw::saturating(scale).map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    Ok((law, law_arg, scale))
}

fn common_settings(r: &Resolved) -> Vec<(&'static str, String)> {
    let mut out = vec![
        ("beta", num(r.beta)),
        ("f", num(r.f)),
        ("psi0-re", num(r.psi0.re)),
        ("psi0-im", num(r.psi0.im)),
        ("tau-max", num(r.tau_max)),
        ("rel-tol", num(r.config.rel_tol)),
        ("abs-tol", num(r.config.abs_tol)),
        ("stride", num(r.config.sample_stride)),
    ];
    if let Some(eps) = r.epsilon {
        out.push(("epsilon", num(eps)));
    }
    out
}

/// Envelope-equation run with germ columns.
pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_common(&args.common)?;
    let params = resolved.params()?;
    let (law, law_arg, scale) = law_from(&resolved, args.sweep_law, args.sweep_scale, &params)?;

    let mut w = CsvWriter::open(&resolved.out)?;
    let mut settings = common_settings(&resolved);
    settings.push(("sweep-law", law_arg.to_string()));
    if law_arg == LawArg::Saturating {
        settings.push(("sweep-scale", num(scale)));
    }
    w.preamble("simulate", &settings)?;
    w.header(&[
        "tau",
        "re",
        "im",
        "abs",
        "germ_re",
        "germ_im",
        "germ_abs",
        "deviation_abs",
    ])?;

    let emit = |w: &mut CsvWriter, tau: f64, psi: Complex64| -> Result<(), CliError> {
        let mut cells = vec![num(tau), num(psi.re), num(psi.im), num(psi.norm())];
        match germ::germ_psi(tau, &params) {
            Ok(g) => {
                cells.push(num(g.re));
                cells.push(num(g.im));
                cells.push(num(g.norm()));
                cells.push(num((psi - g).norm()));
            }
            Err(_) => cells.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.row(&cells)
    };

    match simulate_envelope(
        &params,
        resolved.psi0,
        (0.0, resolved.tau_max),
        &law,
        &resolved.config,
    ) {
        Ok(traj) => {
            for (tau, psi) in traj.iter() {
                emit(&mut w, tau, *psi)?;
            }
            w.finish()
        }
        Err(aborted) => {
            for (&tau, psi) in aborted.partial_times.iter().zip(&aborted.partial_states) {
                emit(&mut w, tau, *psi)?;
            }
            w.comment(&format!("aborted at tau={}", num(aborted.last_time())))?;
            w.finish()?;
            Err(CliError::Runtime(aborted.error.to_string()))
        }
    }
}

/// Germ diagnostics over a tau grid clipped just inside the life time, so
/// every coefficient and the finite-difference residual stay evaluable.
pub fn germ(args: GermArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_common(&args.common)?;
    let params = resolved.params()?;
    let tau_star = germ::life_time(&params);
    let tau_hi = resolved.tau_max.min(tau_star * (1.0 - 2e-4));
    let stride = resolved.config.sample_stride;

    let mut w = CsvWriter::open(&resolved.out)?;
    w.preamble("germ", &common_settings(&resolved))?;
    w.header(&[
        "tau",
        "theta",
        "germ_re",
        "germ_im",
        "germ_abs",
        "alpha0",
        "alpha1",
        "rho1",
        "re_lambda",
        "im_lambda1",
        "residual_abs",
    ])?;

    let mut k = 1u64;
    loop {
        let tau = k as f64 * stride;
        if tau > tau_hi {
            break;
        }
        k += 1;
        let theta = params.beta() * params.beta() * tau;
        // Rows outside the guarded domain are clipped rather than padded
        // with non-finite values.
        let (Ok(g), Ok(a0), Ok(a1), Ok(r1), Ok(eig), Ok(res)) = (
            germ::germ_psi(tau, &params),
            germ::alpha0(theta, params.f()),
            germ::alpha1(theta, params.f()),
            germ::rho1(theta, params.f()),
            germ::eigenvalues(theta, &params),
            germ::residual(tau, &params, germ::residual_step(tau)),
        ) else {
            continue;
        };
        w.row(&[
            num(tau),
            num(theta),
            num(g.re),
            num(g.im),
            num(g.norm()),
            num(a0),
            num(a1),
            num(r1),
            num(eig.lambda1.re),
            num(eig.lambda1.im),
            num(res.norm()),
        ])?;
    }
    w.finish()
}

/// Full-oscillator run; `--compare` adds matched envelope-equation columns.
pub fn duffing(args: DuffingArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_common(&args.common)?;
    let params = resolved.params_requiring_epsilon()?;
    let compare = if args.compare {
        true
    } else {
        resolved.file.get_bool("compare")?.unwrap_or(false)
    };
    let eps = params.epsilon().expect("validated above");
    let t_max = resolved.tau_max / eps.powf(2.0 / 3.0);

    let mut w = CsvWriter::open(&resolved.out)?;
    let mut settings = common_settings(&resolved);
    settings.push(("compare", compare.to_string()));
    w.preamble("duffing", &settings)?;

    let base_columns = ["t", "u", "v", "tau", "psi_est_re", "psi_est_im", "psi_est_abs"];
    let flush_partial = |w: &mut CsvWriter,
                         times: &[f64],
                         states: &[RealState],
                         empty_tail: usize|
     -> Result<(), CliError> {
        for (&t, s) in times.iter().zip(states) {
            let mut cells = vec![num(t), num(s.u), num(s.v)];
            match demodulate_point(t, s, &params) {
                Ok((tau, psi)) => {
                    cells.push(num(tau));
                    cells.push(num(psi.re));
                    cells.push(num(psi.im));
                    cells.push(num(psi.norm()));
                }
                Err(_) => cells.extend(std::iter::repeat_n(String::new(), 4)),
            }
            cells.extend(std::iter::repeat_n(String::new(), empty_tail));
            w.row(&cells)?;
        }
        Ok(())
    };

    if compare {
        w.header(&[&base_columns[..], &["psi_re", "psi_im", "psi_abs", "deviation_abs"]].concat())?;
        match compare_models(&params, (0.0, t_max), &resolved.config) {
            Ok(cmp) => {
                for (i, (t, s)) in cmp.duffing.iter().enumerate() {
                    let (tau, est) = (cmp.envelope.times()[i], cmp.envelope.states()[i]);
                    let psi = cmp.reference[i];
                    w.row(&[
                        num(t),
                        num(s.u),
                        num(s.v),
                        num(tau),
                        num(est.re),
                        num(est.im),
                        num(est.norm()),
                        num(psi.re),
                        num(psi.im),
                        num(psi.norm()),
                        num(cmp.deviation_abs[i]),
                    ])?;
                }
                w.finish()
            }
            Err(DuffingError::Oscillator(aborted)) => {
                flush_partial(&mut w, &aborted.partial_times, &aborted.partial_states, 4)?;
                let tau_reached = eps.powf(2.0 / 3.0) * aborted.last_time();
                w.comment(&format!("aborted at tau={}", num(tau_reached)))?;
                w.finish()?;
                Err(CliError::Runtime(aborted.error.to_string()))
            }
            Err(DuffingError::Envelope(aborted)) => {
                w.comment(&format!("aborted at tau={}", num(aborted.last_time())))?;
                w.finish()?;
                Err(CliError::Runtime(aborted.error.to_string()))
            }
            Err(e) => Err(CliError::Usage(e.to_string())),
        }
    } else {
        w.header(&base_columns)?;
        match simulate_duffing(&params, RealState::new(0.0, 0.0), (0.0, t_max), &resolved.config)
        {
            Ok(traj) => {
                let envelope =
                    demodulate(&traj, &params).map_err(|e| CliError::Runtime(e.to_string()))?;
                for (i, (t, s)) in traj.iter().enumerate() {
                    let (tau, psi) = (envelope.times()[i], envelope.states()[i]);
                    w.row(&[
                        num(t),
                        num(s.u),
                        num(s.v),
                        num(tau),
                        num(psi.re),
                        num(psi.im),
                        num(psi.norm()),
                    ])?;
                }
                w.finish()
            }
            Err(DuffingError::Oscillator(aborted)) => {
                flush_partial(&mut w, &aborted.partial_times, &aborted.partial_states, 0)?;
                let tau_reached = eps.powf(2.0 / 3.0) * aborted.last_time();
                w.comment(&format!("aborted at tau={}", num(tau_reached)))?;
                w.finish()?;
                Err(CliError::Runtime(aborted.error.to_string()))
            }
            Err(e) => Err(CliError::Usage(e.to_string())),
        }
    }
}

/// Parameter sweep with power-law fit summary.
pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_common(&args.common)?;
    let beta_values = args
        .beta_list
        .clone()
        .or(resolved.file.get_list("beta-list")?)
        .unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    let f_values = args
        .f_list
        .clone()
        .or(resolved.file.get_list("f-list")?)
        .unwrap_or_else(|| vec![1.0]);
    let c_fall = args
        .c_fall
        .or(resolved.file.get_f64("c-fall")?)
        .unwrap_or(DEFAULT_C_FALL);
    let tau_min = args
        .tau_min
        .or(resolved.file.get_f64("tau-min")?)
        .unwrap_or(DEFAULT_TAU_MIN);

    let spec = SweepSpec {
        beta_values: beta_values.clone(),
        f_values: f_values.clone(),
        psi0: resolved.psi0,
        tau_horizon_factor: 1.5,
        c_fall,
        tau_min,
        config: resolved.config,
    };
    let records = run_sweep(&spec).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut w = CsvWriter::open(&resolved.out)?;
    let join = |xs: &[f64]| xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
    let mut settings = common_settings(&resolved);
    settings.push(("beta-list", join(&beta_values)));
    settings.push(("f-list", join(&f_values)));
    settings.push(("c-fall", num(c_fall)));
    settings.push(("tau-min", num(tau_min)));
    w.preamble("sweep", &settings)?;
    w.header(&["beta", "f", "status", "tau_fall", "max_abs", "decay_rate"])?;
    for r in &records {
        w.row(&[
            num(r.params.beta()),
            num(r.params.f()),
            if r.error.is_none() { "ok" } else { "failed" }.to_string(),
            opt_num(r.tau_fall),
            num(r.max_abs),
            opt_num(r.decay_rate),
        ])?;
    }

    emit_fit_summary(&mut w, &records, &beta_values, &f_values)?;
    w.finish()
}

/// Power-law fits of the measured fall times and peaks against beta (per
/// drive amplitude) and against f (per beta) whenever at least two points
/// are available.
fn emit_fit_summary(
    w: &mut CsvWriter,
    records: &[SweepRecord],
    beta_values: &[f64],
    f_values: &[f64],
) -> Result<(), CliError> {
    let mut fit_line = |label: String, points: Vec<(f64, f64)>| -> Result<(), CliError> {
        if points.len() < 2 {
            w.comment(&format!("fit {label}: skipped (insufficient points)"))?;
            return Ok(());
        }
        match fit_power_law(&points) {
            Ok(fit) => w.comment(&format!(
                "fit {label}: exponent={} log_prefactor={} r_squared={} n={}",
                num(fit.exponent),
                num(fit.log_prefactor),
                num(fit.r_squared),
                fit.n_points
            )),
            Err(e) => w.comment(&format!("fit {label}: skipped ({e})")),
        }
    };

    for &f in f_values {
        let ok: Vec<&SweepRecord> = records
            .iter()
            .filter(|r| r.params.f() == f && r.error.is_none())
            .collect();
        let falls: Vec<(f64, f64)> = ok
            .iter()
            .filter_map(|r| r.tau_fall.map(|t| (r.params.beta(), t)))
            .collect();
        fit_line(format!("tau_fall~beta (f={})", num(f)), falls)?;
        let maxima: Vec<(f64, f64)> = ok.iter().map(|r| (r.params.beta(), r.max_abs)).collect();
        fit_line(format!("max_abs~beta (f={})", num(f)), maxima)?;
    }
    if f_values.len() >= 2 {
        for &beta in beta_values {
            let ok: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.params.beta() == beta && r.error.is_none())
                .collect();
            let falls: Vec<(f64, f64)> = ok
                .iter()
                .filter_map(|r| r.tau_fall.map(|t| (r.params.f(), t)))
                .collect();
            fit_line(format!("tau_fall~f (beta={})", num(beta)), falls)?;
            let maxima: Vec<(f64, f64)> = ok.iter().map(|r| (r.params.f(), r.max_abs)).collect();
            fit_line(format!("max_abs~f (beta={})", num(beta)), maxima)?;
        }
    }
    Ok(())
}
