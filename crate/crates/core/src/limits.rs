//! Closed forms and asymptotic limits of the precision rate.
//!
//! * linear response around equilibrium, `γ_LR = V² (∂_θ G)² / (4 k_B T G)`
//! * zero temperature, as a window integral and in the Sommerfeld form
//! * the Lorentzian zero-temperature reduction
//! * exact finite-temperature boxcar current, noise and precision
//! * the Fisher information of the Gaussian long-time charge distribution

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::{
    fermi_difference, ln_cosh, ln_sinh, log_add_exp, softplus_step, ReservoirSetup, CONDUCTANCE_QUANTUM,
};
use crate::landauer::{conductance, dconductance_dtheta, dcurrent_dtheta, noise_lb, TransportResult};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::transmission::TransmissionModel;

/// Ratio used for every "≪" in a validity condition.
pub const REGIME_RATIO: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub value: f64,
    pub regime_valid: bool,
    pub validity_note: String,
    /// Interpretable factors whose product is `value`, when the formula has one.
    pub factors: Option<[f64; 3]>,
    pub divergent: bool,
}

impl LimitResult {
    pub fn factor_product(&self) -> Option<f64> {
        self.factors.map(|f| f.iter().product())
    }
}

/// Linear-response precision rate, `γ_LR = V² (∂_θ G)² / (4 k_B T G)`.
///
/// `factors` holds `(eV / 4 k_B T, (∂_θ ln G)², G V)`.
pub fn precision_linear_response(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<LimitResult> {
    let temp = setup.temperature();
    if !(temp > 0.0) {
        return Err(Error::Domain("linear response around equilibrium needs T > 0".into()));
    }
    let g = conductance(model, setup, quad)?.value;
    if !(g > 0.0) {
        return Err(Error::Degenerate(format!("conductance underflows (G = {g:e})")));
    }
    let dg = dconductance_dtheta(model, setup, quad)?.value;
    let v = setup.bias();
    let value = v * v * dg * dg / (4.0 * temp * g);
    let dln = dg / g;
    let factors = [v / (4.0 * temp), dln * dln, g * v];
    let regime_valid = v.abs() <= REGIME_RATIO * temp;
    Ok(LimitResult {
        value,
        regime_valid,
        validity_note: format!("|eV|/k_BT = {:.3e} (valid below {REGIME_RATIO})", v.abs() / temp),
        factors: Some(factors),
        divergent: false,
    })
}

/// Zero-temperature precision as the ratio of window integrals,
/// `γ_0 = (∫ ∂_θ T)² / ∫ T (1 - T)` over `[ε_F, ε_F + eV]`.
pub fn precision_zero_t_integral(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<LimitResult> {
    quad.validate()?;
    let (lo, hi) = setup.bias_window();
    let pts = model.features();
    let (numerator, denominator) = match model {
        TransmissionModel::Boxcar { half_width, theta } => {
            let inside = |e: f64| (e > lo && e < hi) as i32 as f64;
            (inside(theta + half_width) - inside(theta - half_width), 0.0)
        }
        _ => {
            let n = integrate(|e| model.theta_derivative(e).unwrap_or(0.0), lo, hi, &pts, quad)?.value;
            let d = integrate(
                |e| {
                    let t = model.evaluate(e);
                    t * (1.0 - t)
                },
                lo,
                hi,
                &pts,
                quad,
            )?
            .value;
            (n, d)
        }
    };
    let signal = numerator * numerator;
    if denominator <= quad.abs_tol {
        if signal > quad.abs_tol {
            return Ok(LimitResult {
                value: f64::INFINITY,
                regime_valid: true,
                validity_note: "window noise vanishes with non-zero sensitivity: rate diverges".into(),
                factors: None,
                divergent: true,
            });
        }
        return Ok(LimitResult {
            value: 0.0,
            regime_valid: true,
            validity_note: "degenerate: current independent of theta and noiseless".into(),
            factors: None,
            divergent: false,
        });
    }
    Ok(LimitResult {
        value: signal / denominator,
        regime_valid: true,
        validity_note: "zero temperature, full bias dependence".into(),
        factors: None,
        divergent: false,
    })
}

/// Sommerfeld (weak energy dependence) form of the zero-temperature rate,
/// `γ_0 = |eV| T_F / (1 - T_F) (∂_θ ln T_F)²`.
///
/// `factors` holds `(T_F / (1 - T_F), (∂_θ ln T_F)², G_0 |V| / 2)`.
pub fn precision_zero_t_sommerfeld(model: &TransmissionModel, setup: &ReservoirSetup) -> Result<LimitResult> {
    let ef = setup.fermi_energy();
    let tf = model.evaluate(ef);
    let dtheta = model.theta_derivative(ef)?;
    if tf >= 1.0 {
        return Err(Error::Degenerate("T_F = 1: the Bernoulli signal-to-noise factor T_F/(1-T_F) is singular".into()));
    }
    if !(tf > 0.0) {
        return Err(Error::Degenerate("T_F = 0: no transmission at the Fermi energy".into()));
    }
    let v = setup.bias().abs();
    let snr = tf / (1.0 - tf);
    let sens = (dtheta / tf).powi(2);
    let value = v * snr * sens;
    let slope = model.energy_derivative(ef)?;
    let regime_valid = (v * slope).abs() <= REGIME_RATIO * tf;
    Ok(LimitResult {
        value,
        regime_valid,
        validity_note: format!("|eV dT/dε| / T_F = {:.3e} (valid below {REGIME_RATIO})", (v * slope).abs() / tf),
        factors: Some([snr, sens, 0.5 * CONDUCTANCE_QUANTUM * v]),
        divergent: false,
    })
}

/// Lorentzian reduction of the Sommerfeld form, `γ_0 = 2 G_0 |V| (T_F / Γ)²`.
/// Regular at `θ = ε_F`, where it takes its maximum `2 G_0 |V| / Γ²`.
pub fn lorentzian_zero_t_precision(gamma: f64, theta: f64, setup: &ReservoirSetup) -> Result<f64> {
    let model = TransmissionModel::lorentzian(gamma, theta)?;
    let tf = model.evaluate(setup.fermi_energy());
    Ok(2.0 * CONDUCTANCE_QUANTUM * setup.bias().abs() * (tf / gamma).powi(2))
}

fn require_finite_temperature(setup: &ReservoirSetup, half_width: f64) -> Result<f64> {
    if !(half_width > 0.0) {
        return Err(Error::Domain("boxcar half-width must be > 0".into()));
    }
    let t = setup.temperature();
    if t == 0.0 {
        return Err(Error::Domain("boxcar closed forms contain 1/k_BT; use boxcar_zero_temperature at T = 0".into()));
    }
    Ok(t)
}

/// `∫_{θ-δ}^{θ+δ} (f(ε; μ_a) - f(ε; μ_b)) dε`, from whichever side of the
/// window keeps the antiderivatives small.
fn boxcar_window_integral(mu_a: f64, mu_b: f64, temp: f64, half_width: f64, theta: f64) -> f64 {
    let shift = (mu_a - mu_b) / temp;
    let (lo, hi) = (theta - half_width, theta + half_width);
    if theta <= 0.5 * (mu_a + mu_b) {
        // C(ε) = ∫_{-∞}^{ε} (f_a - f_b) = T [softplus((ε-μ_b)/T) - softplus((ε-μ_b)/T - shift)]
        let c = |e: f64| temp * softplus_step((e - mu_b) / temp, shift);
        c(hi) - c(lo)
    } else {
        // C'(ε) = ∫_{ε}^{∞} (f_a - f_b) = T [softplus((μ_a-ε)/T) - softplus((μ_a-ε)/T - shift)]
        let c = |e: f64| temp * softplus_step((mu_a - e) / temp, shift);
        c(lo) - c(hi)
    }
}

/// Exact boxcar mean current at `T > 0`.
pub fn boxcar_closed_current(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    let temp = require_finite_temperature(setup, half_width)?;
    if setup.bias() == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * boxcar_window_integral(setup.mu_right(), setup.mu_left(), temp, half_width, theta))
}

/// `ln sinh(δ/T) - ln(cosh((θ-μ)/T) + cosh(δ/T))`: log of one lead's
/// `∫_box f (1 - f) / T`.
fn ln_lead_occupation_variance(mu: f64, temp: f64, half_width: f64, theta: f64) -> f64 {
    let d = half_width / temp;
    ln_sinh(d) - log_add_exp(ln_cosh((theta - mu) / temp), ln_cosh(d))
}

/// Exact boxcar noise at `T > 0`; only the thermal `T F_2` term survives.
pub fn boxcar_closed_noise(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    let temp = require_finite_temperature(setup, half_width)?;
    let l = ln_lead_occupation_variance(setup.fermi_energy(), temp, half_width, theta);
    let r = ln_lead_occupation_variance(setup.mu_biased(), temp, half_width, theta);
    Ok(4.0 * temp * log_add_exp(l, r).exp())
}

/// Exact boxcar precision rate at `T > 0`.
pub fn boxcar_closed_precision(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    let temp = require_finite_temperature(setup, half_width)?;
    let ev = setup.bias();
    let ef = setup.fermi_energy();
    let center_arg = (ev - 2.0 * theta + 2.0 * ef) / (2.0 * temp);
    if ev == 0.0 || center_arg == 0.0 {
        return Ok(0.0);
    }
    let ld = ln_cosh(half_width / temp);
    let la = ln_cosh((theta - ef) / temp);
    let lb = ln_cosh((ev - theta + ef) / temp);
    let ln_num = (4.0 / temp).ln()
        + ln_sinh(half_width / temp)
        + 2.0 * ln_sinh((ev / (2.0 * temp)).abs())
        + 2.0 * ln_sinh(center_arg.abs());
    let ln_den =
        log_add_exp(ld, la) + log_add_exp(lb, ld) + log_add_exp(log_add_exp(lb, std::f64::consts::LN_2 + ld), la);
    Ok((ln_num - ln_den).exp())
}

/// Linear-response boxcar conductance, `2 sinh(δ/T) / (cosh(δ/T) + cosh((θ-ε_F)/T))`.
pub fn boxcar_lr_conductance(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    let temp = require_finite_temperature(setup, half_width)?;
    Ok(2.0 * ln_lead_occupation_variance(setup.fermi_energy(), temp, half_width, theta).exp())
}

/// Linear-response boxcar current `G V`.
pub fn boxcar_lr_current(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    Ok(boxcar_lr_conductance(setup, half_width, theta)? * setup.bias())
}

/// Linear-response boxcar noise `4 k_B T G`.
pub fn boxcar_lr_noise(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    Ok(4.0 * setup.temperature() * boxcar_lr_conductance(setup, half_width, theta)?)
}

/// Linear-response boxcar precision,
/// `V² sinh(δ/T) sinh²((θ-ε_F)/T) / (2 T³ (cosh(δ/T) + cosh((θ-ε_F)/T))³)`.
pub fn boxcar_lr_precision(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<f64> {
    let temp = require_finite_temperature(setup, half_width)?;
    let x = (theta - setup.fermi_energy()) / temp;
    let v = setup.bias();
    if v == 0.0 || x == 0.0 {
        return Ok(0.0);
    }
    let d = half_width / temp;
    let ln = 2.0 * v.abs().ln() + ln_sinh(d) + 2.0 * ln_sinh(x.abs())
        - (2.0f64).ln()
        - 3.0 * temp.ln()
        - 3.0 * log_add_exp(ln_cosh(d), ln_cosh(x));
    Ok(ln.exp())
}

/// Piecewise zero-temperature boxcar transport from the window overlap.
pub fn boxcar_zero_temperature(setup: &ReservoirSetup, half_width: f64, theta: f64) -> Result<TransportResult> {
    if !(half_width > 0.0) {
        return Err(Error::Domain("boxcar half-width must be > 0".into()));
    }
    let cold = setup.with_temperature(0.0)?;
    let (lo, hi) = cold.bias_window();
    let overlap = ((theta + half_width).min(hi) - (theta - half_width).max(lo)).max(0.0);
    let sign = if cold.mu_right() >= cold.mu_left() { 1.0 } else { -1.0 };
    let current = 2.0 * sign * overlap;
    let edge = |e: f64| fermi_difference(e, cold.mu_right(), cold.mu_left(), 0.0);
    let slope = 2.0 * (edge(theta + half_width) - edge(theta - half_width));
    Ok(TransportResult::from_parts(current, 0.0, slope, 0.0, 0.0))
}

/// Fisher information of the Gaussian long-time charge distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherInfo {
    /// `F(θ)`, in units of `1/E0²`.
    pub total: f64,
    /// `τ (∂_θ<I>)² / <<I²>>`
    pub mean_term: f64,
    /// `(½ ∂_θ ln <<I²>>)²`
    pub variance_term: f64,
}

/// `F = τ (∂_θ<I>)² / <<I²>> + (½ ∂_θ ln <<I²>>)²`, the θ-derivative of the
/// log-noise taken by central differences of the noise integral.
pub fn fisher_gaussian(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    tau: f64,
) -> Result<FisherInfo> {
    if !(tau > 0.0) {
        return Err(Error::Domain("integration time tau must be > 0".into()));
    }
    let noise = noise_lb(model, setup, quad)?.value;
    if noise <= quad.abs_tol {
        return Err(Error::Divergent("zero noise: Fisher information is unbounded".into()));
    }
    let slope = dcurrent_dtheta(model, setup, quad)?.value;
    let theta = model.theta();
    let h = 1e-4 * model.resolution().min(setup.temperature().max(model.resolution()));
    let up = noise_lb(&model.with_theta(theta + h), setup, quad)?.value;
    let down = noise_lb(&model.with_theta(theta - h), setup, quad)?.value;
    let dln = (up.ln() - down.ln()) / (2.0 * h);
    let mean_term = tau * slope * slope / noise;
    let variance_term = (0.5 * dln).powi(2);
    Ok(FisherInfo { total: mean_term + variance_term, mean_term, variance_term })
}
