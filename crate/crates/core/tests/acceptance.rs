//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use meso_metrology::cli::config::RunConfig;
use meso_metrology::estimation::{run_mc, McConfig};
use meso_metrology::landauer::{conductance, noise_lb};
use meso_metrology::limits::{
    boxcar_closed_current, boxcar_closed_noise, boxcar_closed_precision, boxcar_zero_temperature,
    precision_linear_response, precision_zero_t_integral,
};
use meso_metrology::sweep::{
    boxcar_asymptote, default_interval, golden_section_max, linspace, optimize_theta, sweep_nd, sweep_theta,
    CombFamily, OptimizeOptions,
};
use meso_metrology::{transport, CombWeighting, QuadratureSpec, ReservoirSetup, TransmissionModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn tight() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-12, 1e-300)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn within(t: Instant, budget: Duration) -> (bool, String) {
    let el = t.elapsed();
    (el <= budget, format!("{:.2}s of {}s", el.as_secs_f64(), budget.as_secs()))
}

fn preset(name: &str) -> Result<RunConfig, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name);
    RunConfig::load(&path).map_err(e)
}

/// Same grid as `meso sweep-theta` builds from a preset.
fn preset_grid(cfg: &RunConfig, models: &[TransmissionModel], setup: &ReservoirSetup) -> Result<Vec<f64>, String> {
    let n = cfg.usize_or("grid_points", 401).map_err(e)?;
    let (lo, hi) = match (cfg.opt_f64("theta_min").map_err(e)?, cfg.opt_f64("theta_max").map_err(e)?) {
        (Some(a), Some(b)) => (a, b),
        _ => models
            .iter()
            .map(|m| default_interval(m, setup))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1))),
    };
    Ok(linspace(lo, hi, n))
}

fn broad_lorentzian_maximum() -> Outcome {
    let t = Instant::now();
    let m = TransmissionModel::lorentzian(100.0, 0.0).map_err(e)?;
    let s = ReservoirSetup::simple(1e-4, 1.0).map_err(e)?;
    let r = optimize_theta(&m, &s, &QuadratureSpec::default(), &OptimizeOptions::default()).map_err(e)?;
    let target = 2.0 * 2.0 * 1.0 / (100.0 * 100.0);
    let dev = (r.gamma_max / target - 1.0).abs();
    let (fast, time) = within(t, Duration::from_secs(10));
    let ok = r.theta_star.abs() <= 1e-3 && dev <= 0.01 && fast;
    Ok((
        ok,
        format!(
            "theta* = {:.6e} (tol 1e-3), gamma_max = {:.6e} vs 2G0V/Gamma^2 = {target:.1e} (rel dev {dev:.3e}, tol 1e-2), {time}",
            r.theta_star, r.gamma_max
        ),
    ))
}

fn boxcar_closed_forms() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let q = tight();
    let mut worst = (0.0f64, String::new());
    for _ in 0..200 {
        let temp = 0.05 * (200.0f64).powf(rng.random::<f64>());
        let bias = rng.random_range(-3.0..3.0);
        let delta = rng.random_range(0.05..5.0);
        let theta = rng.random_range(-4.0..4.0);
        let s = ReservoirSetup::simple(temp, bias).map_err(e)?;
        let m = TransmissionModel::boxcar(delta, theta).map_err(e)?;
        let num = transport(&m, &s, &q).map_err(e)?;
        let devs = [
            rel(boxcar_closed_current(&s, delta, theta).map_err(e)?, num.current),
            rel(boxcar_closed_noise(&s, delta, theta).map_err(e)?, num.noise),
            rel(boxcar_closed_precision(&s, delta, theta).map_err(e)?, num.gamma_or_inf()),
        ];
        let d = devs.into_iter().fold(0.0, f64::max);
        if d > worst.0 {
            worst = (d, format!("kT={temp:.3} V={bias:.3} delta={delta:.3} theta={theta:.3}"));
        }
    }
    let (fast, time) = within(t, Duration::from_secs(30));
    Ok((worst.0 <= 1e-8 && fast, format!("200 draws, worst rel dev {:.3e} at {} (tol 1e-8), {time}", worst.0, worst.1)))
}

fn limit_chain() -> Outcome {
    // theta is kept at least max(kT, Gamma) from the Fermi energy: the
    // linear-response rate vanishes there and its relative error is unbounded
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let q = tight();
    let (mut lr_worst, mut zt_worst) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let g = 0.05 * (40.0f64).powf(rng.random::<f64>());
        let temp = 0.1 * (20.0f64).powf(rng.random::<f64>());
        let side = if k % 2 == 0 { 1.0 } else { -1.0 };
        let theta = side * rng.random_range(1.0..4.0) * temp.max(g);
        let m = TransmissionModel::lorentzian(g, theta).map_err(e)?;
        let s = ReservoirSetup::simple(temp, 0.01 * temp).map_err(e)?;
        let exact = transport(&m, &s, &q).map_err(e)?.gamma_or_inf();
        let lr = precision_linear_response(&m, &s, &q).map_err(e)?.value;
        lr_worst = lr_worst.max(rel(exact, lr));

        let theta0 = rng.random_range(-1.0..2.0);
        let m0 = TransmissionModel::lorentzian(g, theta0).map_err(e)?;
        let cold = transport(&m0, &ReservoirSetup::simple(1e-6, 1.0).map_err(e)?, &q).map_err(e)?.gamma_or_inf();
        let zt = precision_zero_t_integral(&m0, &ReservoirSetup::simple(0.0, 1.0).map_err(e)?, &q).map_err(e)?.value;
        zt_worst = zt_worst.max(rel(cold, zt));
    }
    let (fast, time) = within(t, Duration::from_secs(60));
    Ok((
        lr_worst <= 0.02 && zt_worst <= 1e-3 && fast,
        format!("20 Lorentzians: LR at V=0.01kT worst {lr_worst:.3e} (tol 2e-2), kT=1e-6 vs T=0 worst {zt_worst:.3e} (tol 1e-3), {time}"),
    ))
}

fn johnson_nyquist() -> Outcome {
    let q = tight();
    let mut worst = 0.0f64;
    for temp in [0.05, 0.3, 1.0, 4.0] {
        let s = ReservoirSetup::simple(temp, 0.0).map_err(e)?;
        for m in [
            TransmissionModel::lorentzian(0.2, 0.1).map_err(e)?,
            TransmissionModel::comb(7, 0.05, 0.8, -0.2, CombWeighting::Uniform).map_err(e)?,
            TransmissionModel::boxcar(0.4, 0.3).map_err(e)?,
        ] {
            let n = noise_lb(&m, &s, &q).map_err(e)?.value;
            let g = conductance(&m, &s, &q).map_err(e)?.value;
            worst = worst.max(rel(n, 4.0 * temp * g));
        }
    }
    Ok((worst <= 1e-7, format!("3 families x 4 temperatures, worst rel dev {worst:.3e} (tol 1e-7)")))
}

fn comb_saturation() -> Outcome {
    let t = Instant::now();
    let fam = CombFamily { gamma: 0.1, half_width: 10.0, weighting: CombWeighting::Uniform };
    let nds = [1, 3, 5, 11, 21, 51, 101, 201];
    let s = ReservoirSetup::simple(3.0, 1.0).map_err(e)?;
    let q = QuadratureSpec::default();
    let opts = OptimizeOptions::default();
    let recs = sweep_nd(&fam, &nds, &s, &q, &opts).map_err(e)?;
    let boxcar = boxcar_asymptote(fam.half_width, &s, &q, &opts).map_err(e)?.gamma_max;
    let single =
        optimize_theta(&TransmissionModel::lorentzian(fam.gamma, 0.0).map_err(e)?, &s, &q, &opts).map_err(e)?.gamma_max;
    let g: Vec<f64> = recs.iter().map(|r| r.gamma_max).collect();
    let monotone = g.windows(2).all(|w| w[1] >= w[0]);
    let last = g[g.len() - 1];
    let close = (last / boxcar - 1.0).abs() <= 0.1;
    let ordered = g.iter().all(|&v| v <= boxcar && v >= single * (1.0 - 1e-9));
    let (fast, time) = within(t, Duration::from_secs(300));
    Ok((
        monotone && close && ordered && fast,
        format!(
            "monotone {monotone}, gamma_max(201)/boxcar = {:.4} (tol 10%), boxcar >= comb >= Lorentzian {ordered}, {time}",
            last / boxcar
        ),
    ))
}

fn local_maxima(gammas: &[f64]) -> Vec<usize> {
    (1..gammas.len() - 1).filter(|&i| gammas[i] > gammas[i - 1] && gammas[i] >= gammas[i + 1]).collect()
}

fn precision_curve_properties() -> Outcome {
    let q = QuadratureSpec::default();

    let sym_q = QuadratureSpec::with_tolerances(1e-10, 1e-300);
    let mut sym = 0.0f64;
    for name in [
        "fig2a_top.conf",
        "fig2a_bottom.conf",
        "fig2b_top.conf",
        "fig2b_bottom.conf",
        "fig2c_top.conf",
        "fig2c_bottom.conf",
    ] {
        let cfg = preset(name)?;
        let s = cfg.setup().map_err(e)?;
        let c = s.window_center();
        for m in cfg.models().map_err(e)? {
            for x in [0.013, 0.27, 0.61, 1.4, 3.3] {
                let a = transport(&m.with_theta(c + x), &s, &sym_q).map_err(e)?.gamma_or_inf();
                let b = transport(&m.with_theta(c - x), &s, &sym_q).map_err(e)?.gamma_or_inf();
                sym = sym.max(rel(a, b));
            }
        }
    }
    let sym_ok = sym <= 1e-6;

    // two maxima near the chemical potentials, Gamma = 0.01, kT = 0.1
    let cfg = preset("fig2a_top.conf")?;
    let s = cfg.setup().map_err(e)?;
    let m = TransmissionModel::lorentzian(0.01, 0.0).map_err(e)?;
    let grid = preset_grid(&cfg, std::slice::from_ref(&m), &s)?;
    let recs = sweep_theta(&m, &s, &q, &grid).map_err(e)?;
    let gam: Vec<f64> = recs.iter().map(|r| r.gamma_exact).collect();
    let peaks: Vec<f64> = local_maxima(&gam)
        .into_iter()
        .map(|i| {
            let f = |th: f64| transport(&m.with_theta(th), &s, &q).map(|r| r.gamma_or_inf()).unwrap_or(f64::NAN);
            golden_section_max(f, grid[i - 1], grid[i + 1], 1e-7).0
        })
        .collect();
    let (mu_l, mu_r) = (s.mu_left(), s.mu_right());
    let near = |p: f64| (p - mu_l).abs().min((p - mu_r).abs());
    let (lo_mu, hi_mu) = (mu_l.min(mu_r), mu_l.max(mu_r));
    let peaks_ok = peaks.len() == 2 && (peaks[0] - lo_mu).abs() <= 0.02 && (peaks[1] - hi_mu).abs() <= 0.02;
    let peak_text: Vec<String> = peaks.iter().map(|p| format!("{p:.4} (dist {:.4})", near(*p))).collect();

    // linear response against exact at kT = 3
    let mut lr = 0.0f64;
    let mut points = 0usize;
    for name in ["fig2a_bottom.conf", "fig2b_bottom.conf", "fig2c_bottom.conf"] {
        let cfg = preset(name)?;
        let s = cfg.setup().map_err(e)?;
        let models = cfg.models().map_err(e)?;
        let grid = preset_grid(&cfg, &models, &s)?;
        for m in &models {
            for r in sweep_theta(m, &s, &q, &grid).map_err(e)? {
                lr = lr.max(rel(r.gamma_lr, r.gamma_exact));
                points += 1;
            }
        }
    }
    let lr_ok = lr <= 0.05;

    Ok((
        sym_ok && peaks_ok && lr_ok,
        format!(
            "symmetry worst {sym:.3e} (tol 1e-6) [{}]; maxima at [{}], need 2 within 2Gamma = 0.02 [{}]; LR vs exact at kT=3 worst {lr:.3e} over {points} points (tol 5e-2) [{}]",
            pf(sym_ok),
            peak_text.join(", "),
            pf(peaks_ok),
            pf(lr_ok)
        ),
    ))
}

fn estimator_efficiency() -> Outcome {
    let t = Instant::now();
    let (g, theta0) = (0.1, 1.1);
    let m = TransmissionModel::lorentzian(g, theta0).map_err(e)?;
    let s = ReservoirSetup::simple(0.1, 1.0).map_err(e)?;
    let q = QuadratureSpec::default();
    let theta_true = theta0 + 1e-3 * g;
    let gamma = transport(&m.with_theta(theta_true), &s, &q).map_err(e)?.gamma_or_inf();
    let cfg = McConfig {
        tau: 100.0 / gamma,
        n_trials: 10_000,
        seed: 42,
        theta_true,
        theta_ref: Some(theta0),
        bootstrap: 1000,
    };
    let (rep, _) = run_mc(&m, &s, &q, &cfg).map_err(e)?;
    let ratio_ok = (0.95..=1.05).contains(&rep.ratio) && (rep.ratio - 1.0).abs() <= 3.0 * rep.ratio_sigma;
    let bias_ok = rep.bias.abs() <= 3.0 * rep.bias_stderr;
    let (fast, time) = within(t, Duration::from_secs(60));
    Ok((
        ratio_ok && bias_ok && rep.crb_satisfied && fast,
        format!(
            "tau*gamma = {:.1}, Var*gamma*tau = {:.4} +- {:.4} (need [0.95, 1.05]), bias {:.3e} +- {:.3e}, Var/CRB = {:.4} (satisfied {}), {time}",
            rep.tau_gamma,
            rep.ratio,
            rep.ratio_sigma,
            rep.bias,
            rep.bias_stderr,
            rep.estimator_variance / rep.cramer_rao,
            rep.crb_satisfied
        ),
    ))
}

fn zero_t_boxcar_divergence() -> Outcome {
    let (delta, theta) = (0.5, 0.8);
    let m = TransmissionModel::boxcar(delta, theta).map_err(e)?;
    let q = tight();
    let cold = transport(&m, &ReservoirSetup::simple(0.0, 1.0).map_err(e)?, &q).map_err(e)?;
    let piecewise = boxcar_zero_temperature(&ReservoirSetup::simple(0.0, 1.0).map_err(e)?, delta, theta).map_err(e)?;
    let mut rates = Vec::new();
    for temp in [0.5, 0.2, 0.1, 0.05] {
        rates.push(transport(&m, &ReservoirSetup::simple(temp, 1.0).map_err(e)?, &q).map_err(e)?.gamma_or_inf());
    }
    let rising = rates.windows(2).all(|w| w[1] > w[0]);
    let text: Vec<String> = rates.iter().map(|r| format!("{r:.4e}")).collect();
    Ok((
        cold.divergent && piecewise.divergent && rising,
        format!(
            "divergent at T=0: {} (piecewise {}), gamma at kT = 0.5, 0.2, 0.1, 0.05: [{}]",
            cold.divergent,
            piecewise.divergent,
            text.join(", ")
        ),
    ))
}

fn pf(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("broad_lorentzian_maximum", broad_lorentzian_maximum),
        ("boxcar_closed_forms", boxcar_closed_forms),
        ("limit_chain", limit_chain),
        ("johnson_nyquist", johnson_nyquist),
        ("comb_saturation", comb_saturation),
        ("precision_curve_properties", precision_curve_properties),
        ("estimator_efficiency", estimator_efficiency),
        ("zero_t_boxcar_divergence", zero_t_boxcar_divergence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (ok, detail) = match run() {
            Ok(v) => v,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {detail}", pf(ok));
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
