//! Monte-Carlo check of the precision rate as an estimator bound.
//!
//! Long-time transferred charge is Gaussian, `Q ~ N(τ<I>, τ<<I²>>)`. The
//! estimator inverts the linearised mean current around a reference point,
//! `θ̂ = θ_ref + (Q/τ - <I>(θ_ref)) / ∂_θ<I>(θ_ref)`, whose variance should
//! approach `1 / (γ τ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::ReservoirSetup;
use crate::landauer::{transport, TransportResult};
use crate::limits::fisher_gaussian;
use crate::quadrature::QuadratureSpec;
use crate::transmission::TransmissionModel;

pub const MIN_TRIALS: usize = 1000;

/// Below this value of `τγ` the linearised estimator is not expected to be efficient.
pub const MIN_TAU_GAMMA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub tau: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub theta_true: f64,
    /// Linearisation point of the estimator; defaults to `theta_true`.
    pub theta_ref: Option<f64>,
    pub bootstrap: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { tau: 1e4, n_trials: 10_000, seed: 0, theta_true: 0.0, theta_ref: None, bootstrap: 1000 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Domain("tau must be a finite positive time".into()));
        }
        if self.n_trials < MIN_TRIALS {
            return Err(Error::Domain(format!("n_trials must be >= {MIN_TRIALS}")));
        }
        if !self.theta_true.is_finite() || !self.theta_ref.unwrap_or(0.0).is_finite() {
            return Err(Error::Domain("theta values must be finite".into()));
        }
        Ok(())
    }

    pub fn reference(&self) -> f64 {
        self.theta_ref.unwrap_or(self.theta_true)
    }
}

/// Draws the charge transferred in time `tau`.
pub fn sample_charge<R: Rng + ?Sized>(rng: &mut R, stats: &TransportResult, tau: f64) -> Result<f64> {
    if stats.divergent {
        return Err(Error::Divergent("zero-noise operating point: charge is deterministic".into()));
    }
    let normal = Normal::new(tau * stats.current, (tau * stats.noise).sqrt())
        .map_err(|e| Error::Domain(format!("charge distribution: {e}")))?;
    Ok(normal.sample(rng))
}

/// Linearised inversion of one charge measurement.
pub fn estimate_theta(charge: f64, tau: f64, reference: &TransportResult, theta_ref: f64) -> Result<f64> {
    if reference.dcurrent_dtheta == 0.0 || !reference.dcurrent_dtheta.is_finite() {
        return Err(Error::EstimatorUndefined { theta_ref });
    }
    Ok(theta_ref + (charge / tau - reference.current) / reference.dcurrent_dtheta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McTrial {
    pub trial: usize,
    pub charge: f64,
    pub theta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_trials: usize,
    pub estimator_mean: f64,
    pub estimator_variance: f64,
    /// `1 / (γ τ)` at `theta_true`.
    pub predicted_variance: f64,
    pub ratio: f64,
    /// Bootstrap standard deviation of `ratio`.
    pub ratio_sigma: f64,
    /// `1 / F(θ_true)` for the Gaussian charge distribution.
    pub cramer_rao: f64,
    pub crb_satisfied: bool,
    pub bias: f64,
    pub bias_stderr: f64,
    pub tau_gamma: f64,
    pub warnings: Vec<String>,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Runs the trials. Trial `i` draws from its own ChaCha8 stream `i` of
/// `seed`, so results do not depend on the thread count.
pub fn run_mc(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    cfg: &McConfig,
) -> Result<(McReport, Vec<McTrial>)> {
    cfg.validate()?;
    let truth_model = model.with_theta(cfg.theta_true);
    let truth = transport(&truth_model, setup, quad)?;
    let theta_ref = cfg.reference();
    let reference = transport(&model.with_theta(theta_ref), setup, quad)?;
    if reference.dcurrent_dtheta.abs() <= quad.abs_tol {
        return Err(Error::EstimatorUndefined { theta_ref });
    }
    let gamma = match truth.precision_rate {
        Some(g) if g > 0.0 => g,
        Some(_) => return Err(Error::Degenerate("precision rate is zero at theta_true".into())),
        None => return Err(Error::Divergent("precision rate diverges at theta_true".into())),
    };
    let mut warnings = Vec::new();
    let tau_gamma = cfg.tau * gamma;
    if tau_gamma < MIN_TAU_GAMMA {
        warnings
            .push(format!("tau*gamma = {tau_gamma:.3e} < {MIN_TAU_GAMMA}: estimator far from its asymptotic variance"));
    }

    let trials: Vec<McTrial> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let charge = sample_charge(&mut rng, &truth, cfg.tau)?;
            let theta_hat = estimate_theta(charge, cfg.tau, &reference, theta_ref)?;
            Ok(McTrial { trial: i, charge, theta_hat })
        })
        .collect::<Result<_>>()?;

    let hats: Vec<f64> = trials.iter().map(|t| t.theta_hat).collect();
    let (mean, variance) = mean_var(&hats);
    let predicted_variance = 1.0 / tau_gamma;

    let ratio_sigma = if cfg.bootstrap >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX);
        let n = hats.len();
        let mut buf = vec![0.0; n];
        let ratios: Vec<f64> = (0..cfg.bootstrap)
            .map(|_| {
                for slot in buf.iter_mut() {
                    *slot = hats[rng.random_range(0..n)];
                }
                mean_var(&buf).1 / predicted_variance
            })
            .collect();
        mean_var(&ratios).1.sqrt()
    } else {
        f64::NAN
    };

    let fisher = fisher_gaussian(&truth_model, setup, quad, cfg.tau)?;
    let cramer_rao = 1.0 / fisher.total;
    let slack = if ratio_sigma.is_finite() { 3.0 * ratio_sigma } else { 0.0 };
    let report = McReport {
        n_trials: cfg.n_trials,
        estimator_mean: mean,
        estimator_variance: variance,
        predicted_variance,
        ratio: variance / predicted_variance,
        ratio_sigma,
        cramer_rao,
        crb_satisfied: variance >= (1.0 - slack) * cramer_rao,
        bias: mean - cfg.theta_true,
        bias_stderr: (variance / cfg.n_trials as f64).sqrt(),
        tau_gamma,
        warnings,
    };
    Ok((report, trials))
}
