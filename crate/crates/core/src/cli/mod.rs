//! The `meso` command-line front end.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::estimation::{run_mc, McConfig};
use crate::sweep::{
    boxcar_asymptote, default_interval, linspace, optimize_theta, sweep_nd, sweep_theta, CombFamily, OptimizeOptions,
};
use crate::transport;
use crate::validate::{reference_quadrature, run_validation, Fault};
use config::RunConfig;
use output::{emit, Table};

/// Usage errors exit with 2, everything else that fails with 1.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "meso", version, about = "Current, noise and precision rate of two-terminal conductors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Current, noise, sensitivity and precision rate at one operating point.
    Eval {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Precision rate of every method on a grid of theta values.
    SweepTheta {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Maximise the precision rate over theta.
    Optimize {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Maximal precision rate of a Lorentzian comb against the number of dots.
    SweepNd {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        comb: CombArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Monte-Carlo run of the locally unbiased estimator.
    Mc {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Cross-check suite; exits non-zero if any check fails.
    Validate {
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        io: IoArgs,
    },
}

type Overrides = Vec<(&'static str, String)>;

fn put<T: ToString>(out: &mut Overrides, key: &'static str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key, v.to_string()));
    }
}

fn put_list<T: ToString>(out: &mut Overrides, key: &'static str, v: &[T], sep: &str) {
    if !v.is_empty() {
        out.push((key, v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)));
    }
}

#[derive(Debug, Args)]
pub struct PhysArgs {
    /// Transmission model, e.g. `lorentzian:gamma=0.1,theta=0`; repeat for several.
    #[arg(long)]
    model: Vec<String>,
    /// Temperature k_B T; comma-separated list for sweep-nd.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    temp: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    bias: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    fermi_energy: Option<f64>,
    /// right-hot (bias on the right lead) or left-hot.
    #[arg(long)]
    convention: Option<String>,
    #[command(flatten)]
    quad: QuadArgs,
}

impl PhysArgs {
    fn overrides(&self, out: &mut Overrides) {
        put_list(out, "model", &self.model, ";");
        put_list(out, "temp", &self.temp, ",");
        put(out, "bias", &self.bias);
        put(out, "fermi_energy", &self.fermi_energy);
        put(out, "convention", &self.convention);
        self.quad.overrides(out);
    }
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    tail_multiplier: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
}

impl QuadArgs {
    fn overrides(&self, out: &mut Overrides) {
        put(out, "rel_tol", &self.rel_tol);
        put(out, "abs_tol", &self.abs_tol);
        put(out, "tail_multiplier", &self.tail_multiplier);
        put(out, "max_subdivisions", &self.max_subdivisions);
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// exact, lr or zero-t (optimisation target).
    #[arg(long)]
    method: Option<String>,
}

impl GridArgs {
    fn overrides(&self, out: &mut Overrides) {
        put(out, "theta_min", &self.theta_min);
        put(out, "theta_max", &self.theta_max);
        put(out, "grid_points", &self.grid_points);
        put(out, "method", &self.method);
    }
}

#[derive(Debug, Args)]
pub struct CombArgs {
    /// Comma-separated dot counts.
    #[arg(long, value_delimiter = ',')]
    nd: Vec<usize>,
    /// Width of each Lorentzian.
    #[arg(long)]
    gamma: Option<f64>,
    /// Half-width of the comb.
    #[arg(long)]
    delta: Option<f64>,
    /// uniform or trapezoid.
    #[arg(long)]
    weighting: Option<String>,
}

impl CombArgs {
    fn overrides(&self, out: &mut Overrides) {
        put_list(out, "nd", &self.nd, ",");
        put(out, "gamma", &self.gamma);
        put(out, "delta", &self.delta);
        put(out, "weighting", &self.weighting);
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    theta_true: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta_ref: Option<f64>,
    #[arg(long)]
    bootstrap: Option<usize>,
}

impl McArgs {
    fn overrides(&self, out: &mut Overrides) {
        put(out, "tau", &self.tau);
        put(out, "trials", &self.trials);
        put(out, "seed", &self.seed);
        put(out, "theta_true", &self.theta_true);
        put(out, "theta_ref", &self.theta_ref);
        put(out, "bootstrap", &self.bootstrap);
    }
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Preset (`key = value` lines) or the JSON output of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl IoArgs {
    fn overrides(&self, out: &mut Overrides) {
        put(out, "format", &self.format);
        put(out, "output", &self.output.as_ref().map(|p| p.display().to_string()));
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::SweepTheta { .. } => "sweep-theta",
            Command::Optimize { .. } => "optimize",
            Command::SweepNd { .. } => "sweep-nd",
            Command::Mc { .. } => "mc",
            Command::Validate { .. } => "validate",
        }
    }

    fn io(&self) -> &IoArgs {
        match self {
            Command::Eval { io, .. }
            | Command::SweepTheta { io, .. }
            | Command::Optimize { io, .. }
            | Command::SweepNd { io, .. }
            | Command::Mc { io, .. }
            | Command::Validate { io, .. } => io,
        }
    }

    /// Preset values first, then every flag given on the command line.
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.io().config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut out = Overrides::new();
        match self {
            Command::Eval { phys, .. } => phys.overrides(&mut out),
            Command::SweepTheta { phys, grid, .. } | Command::Optimize { phys, grid, .. } => {
                phys.overrides(&mut out);
                grid.overrides(&mut out);
            }
            Command::SweepNd { phys, comb, grid, .. } => {
                phys.overrides(&mut out);
                comb.overrides(&mut out);
                grid.overrides(&mut out);
            }
            Command::Mc { phys, mc, .. } => {
                phys.overrides(&mut out);
                mc.overrides(&mut out);
            }
            Command::Validate { quad, .. } => quad.overrides(&mut out),
        }
        self.io().overrides(&mut out);
        for (k, v) in out {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn interval(cfg: &RunConfig) -> Result<Option<(f64, f64)>, CliError> {
    match (cfg.opt_f64("theta_min")?, cfg.opt_f64("theta_max")?) {
        (Some(a), Some(b)) if b > a => Ok(Some((a, b))),
        (Some(a), Some(b)) => Err(CliError::Usage(format!("theta_max ({b}) must exceed theta_min ({a})"))),
        (None, None) => Ok(None),
        _ => Err(CliError::Usage("give both --theta-min and --theta-max or neither".into())),
    }
}

fn optimize_options(cfg: &RunConfig) -> Result<OptimizeOptions, CliError> {
    let d = OptimizeOptions::default();
    Ok(OptimizeOptions {
        method: cfg.method()?,
        interval: interval(cfg)?,
        grid_points: cfg.usize_or("grid_points", d.grid_points)?,
        theta_tol: d.theta_tol,
    })
}

fn cmd_eval(cfg: &RunConfig) -> Result<Table, CliError> {
    let models = cfg.models()?;
    let setup = cfg.setup()?;
    let quad = cfg.quadrature()?;
    let mut t =
        Table::new(&["theta", "current", "noise", "dcurrent_dtheta", "gamma", "divergent", "quad_error", "model"]);
    for m in &models {
        let r = transport(m, &setup, &quad)?;
        t.push(vec![
            m.theta().into(),
            r.current.into(),
            r.noise.into(),
            r.dcurrent_dtheta.into(),
            r.gamma_or_inf().into(),
            r.divergent.into(),
            r.quad_error.into(),
            m.to_string().into(),
        ]);
    }
    Ok(t)
}

fn cmd_sweep_theta(cfg: &RunConfig) -> Result<Table, CliError> {
    let models = cfg.models()?;
    let setup = cfg.setup()?;
    let quad = cfg.quadrature()?;
    let n = cfg.usize_or("grid_points", 401)?;
    if n < 2 {
        return Err(CliError::Usage("a theta sweep needs at least 2 grid points".into()));
    }
    let (lo, hi) = match interval(cfg)? {
        Some(iv) => iv,
        None => models
            .iter()
            .map(|m| default_interval(m, &setup))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1))),
    };
    let thetas = linspace(lo, hi, n);
    let mut t = Table::new(&[
        "theta",
        "gamma_exact",
        "gamma_lr",
        "gamma_zero_t",
        "divergent",
        "current",
        "noise",
        "conductance",
        "rel_sensitivity",
        "model",
    ]);
    for m in &models {
        let label = m.to_string();
        for r in sweep_theta(m, &setup, &quad, &thetas)? {
            t.push(vec![
                r.theta.into(),
                r.gamma_exact.into(),
                r.gamma_lr.into(),
                r.gamma_zero_t.into(),
                r.divergent.into(),
                r.current.into(),
                r.noise.into(),
                r.conductance.into(),
                r.rel_sensitivity.into(),
                label.clone().into(),
            ]);
        }
    }
    Ok(t)
}

fn cmd_optimize(cfg: &RunConfig) -> Result<Table, CliError> {
    let models = cfg.models()?;
    let setup = cfg.setup()?;
    let quad = cfg.quadrature()?;
    let opts = optimize_options(cfg)?;
    let mut t = Table::new(&["theta_star", "gamma_max", "n_evals", "refined", "method", "model"]);
    for m in &models {
        let r = optimize_theta(m, &setup, &quad, &opts)?;
        t.push(vec![
            r.theta_star.into(),
            r.gamma_max.into(),
            r.n_evals.into(),
            r.refined.into(),
            opts.method.to_string().into(),
            m.to_string().into(),
        ]);
    }
    Ok(t)
}

fn cmd_sweep_nd(cfg: &RunConfig) -> Result<Table, CliError> {
    let nds = cfg.nd_list()?;
    if nds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("--nd must be strictly increasing".into()));
    }
    let family = CombFamily {
        gamma: cfg.require_f64("gamma")?,
        half_width: cfg.require_f64("delta")?,
        weighting: cfg.weighting()?,
    };
    let quad = cfg.quadrature()?;
    let opts = optimize_options(cfg)?;
    let mut t = Table::new(&["n_d", "gamma_max", "theta_star", "temperature", "boxcar_gamma_max"]);
    for temp in cfg.temperatures()? {
        let setup = cfg.setup_at(temp)?;
        let asymptote = boxcar_asymptote(family.half_width, &setup, &quad, &opts)?;
        for r in sweep_nd(&family, &nds, &setup, &quad, &opts)? {
            t.push(vec![
                r.n_d.into(),
                r.gamma_max.into(),
                r.theta_star.into(),
                temp.into(),
                asymptote.gamma_max.into(),
            ]);
        }
    }
    Ok(t)
}

fn cmd_mc(cfg: &RunConfig) -> Result<(Table, u64), CliError> {
    let models = cfg.models()?;
    let [model] = models.as_slice() else {
        return Err(CliError::Usage("mc takes exactly one --model".into()));
    };
    let setup = cfg.setup()?;
    let quad = cfg.quadrature()?;
    let d = McConfig::default();
    let mc = McConfig {
        tau: cfg.require_f64("tau")?,
        n_trials: cfg.usize_or("trials", d.n_trials)?,
        seed: cfg.u64_or("seed", d.seed)?,
        theta_true: cfg.f64_or("theta_true", model.theta())?,
        theta_ref: cfg.opt_f64("theta_ref")?,
        bootstrap: cfg.usize_or("bootstrap", d.bootstrap)?,
    };
    mc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (report, trials) = run_mc(model, &setup, &quad, &mc)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "estimator variance {:.6e}, predicted 1/(gamma tau) {:.6e}, ratio {:.4} +- {:.4}, crb satisfied: {}",
        report.estimator_variance, report.predicted_variance, report.ratio, report.ratio_sigma, report.crb_satisfied
    );
    let mut t = Table::new(&["trial", "charge", "theta_hat"]);
    for tr in &trials {
        t.push(vec![tr.trial.into(), tr.charge.into(), tr.theta_hat.into()]);
    }
    t.extra.insert("report".into(), json!(report));
    Ok((t, mc.seed))
}

fn cmd_validate(cfg: &RunConfig) -> Result<(Table, bool), CliError> {
    let r = reference_quadrature();
    let quad = crate::QuadratureSpec {
        rel_tol: cfg.f64_or("rel_tol", r.rel_tol)?,
        abs_tol: cfg.f64_or("abs_tol", r.abs_tol)?,
        tail_multiplier: cfg.f64_or("tail_multiplier", r.tail_multiplier)?,
        max_subdivisions: cfg.usize_or("max_subdivisions", r.max_subdivisions)?,
    };
    let report = run_validation(&quad, Fault::None);
    let mut t = Table::new(&["check", "passed", "deviation", "tolerance", "detail"]);
    for c in &report.checks {
        t.push(vec![
            c.name.clone().into(),
            c.passed.into(),
            c.deviation.into(),
            c.tolerance.into(),
            c.detail.clone().into(),
        ]);
    }
    for c in report.failed() {
        eprintln!("FAILED {}: deviation {:e} > tolerance {:e} ({})", c.name, c.deviation, c.tolerance, c.detail);
    }
    Ok((t, report.all_passed))
}

/// Caps rayon's global pool from `MESO_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MESO_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("MESO_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Usage("MESO_THREADS must be >= 1".into()));
        }
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = cli.command.config()?;
    let name = cli.command.name();
    cfg.format()?;
    match &cli.command {
        Command::Eval { .. } => emit(&cmd_eval(&cfg)?, name, &cfg, None),
        Command::SweepTheta { .. } => emit(&cmd_sweep_theta(&cfg)?, name, &cfg, None),
        Command::Optimize { .. } => emit(&cmd_optimize(&cfg)?, name, &cfg, None),
        Command::SweepNd { .. } => emit(&cmd_sweep_nd(&cfg)?, name, &cfg, None),
        Command::Mc { .. } => {
            let (t, seed) = cmd_mc(&cfg)?;
            emit(&t, name, &cfg, Some(seed))
        }
        Command::Validate { .. } => {
            let (t, ok) = cmd_validate(&cfg)?;
            emit(&t, name, &cfg, None)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Runtime("validation failed".into()))
            }
        }
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("meso: {e}");
            e.exit_code()
        }
    }
}
