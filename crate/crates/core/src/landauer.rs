//! Landauer-Büttiker mean current, zero-frequency noise, conductance and
//! parameter sensitivity, evaluated by adaptive quadrature.
//!
//! With `e = h = 1`:
//!
//! * `<I>      = 2 ∫ T (f_R - f_L)`
//! * `<<I^2>>  = 4 ∫ [T (1 - T) (f_R - f_L)^2 + T (f_L (1 - f_L) + f_R (1 - f_R))]`
//! * `G        = 2 ∫ T (-∂f/∂ε)` at the Fermi energy
//!
//! Every integrand except the `∂_ε T · f` form of the conductance carries a
//! Fermi factor that decays like `exp(-|ε - μ| / k_B T)`, so the integration
//! window is the bias window widened by `tail_multiplier · k_B T` on each side.
//! At `T = 0` the window is exactly `[μ_lo, μ_hi]` and the occupations are
//! Heaviside steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::{occupation, occupation_slope, thermal_kernel, ReservoirSetup, CONDUCTANCE_QUANTUM};
use crate::quadrature::{integrate, Estimate, QuadratureSpec};
use crate::transmission::TransmissionModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub current: f64,
    pub noise: f64,
    pub dcurrent_dtheta: f64,
    /// `(d<I>/dθ)^2 / <<I^2>>`; `None` when the rate diverges.
    pub precision_rate: Option<f64>,
    pub quad_error: f64,
    pub divergent: bool,
}

impl TransportResult {
    /// Builds the result from the three primary quantities, classifying a
    /// vanishing noise as divergent (non-zero signal) or degenerate (γ = 0).
    pub fn from_parts(current: f64, noise: f64, dcurrent_dtheta: f64, quad_error: f64, abs_tol: f64) -> Self {
        let signal = dcurrent_dtheta * dcurrent_dtheta;
        let (precision_rate, divergent) = if noise <= abs_tol {
            if signal > abs_tol {
                (None, true)
            } else {
                (Some(0.0), false)
            }
        } else {
            (Some(signal / noise), false)
        };
        Self { current, noise, dcurrent_dtheta, precision_rate, quad_error, divergent }
    }

    /// γ as a plain number: `+inf` when divergent.
    pub fn gamma_or_inf(&self) -> f64 {
        self.precision_rate.unwrap_or(f64::INFINITY)
    }
}

/// Energy range outside of which the transport integrands are negligible
/// (or, for the boxcar, identically zero). `None` when the range is empty.
fn transport_domain(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Option<(f64, f64)> {
    let (lo, hi) = setup.bias_window();
    let span = quad.tail_multiplier * setup.temperature();
    let (wlo, whi) = (lo - span, hi + span);
    let (a, b) = match model.support() {
        // compact support: integrate all of it so exponentially small
        // contributions keep their relative accuracy
        Some((slo, shi)) if setup.temperature() > 0.0 => (slo, shi),
        Some((slo, shi)) => (wlo.max(slo), whi.min(shi)),
        None => (wlo, whi),
    };
    (b > a).then_some((a, b))
}

fn integrate_transport<F: Fn(f64) -> f64>(
    integrand: F,
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    quad.validate()?;
    match transport_domain(model, setup, quad) {
        Some((a, b)) => integrate(integrand, a, b, &model.breakpoints(setup), quad),
        None => Ok(Estimate::default()),
    }
}

/// Mean current `<I>` in units of `e E0 / h`.
pub fn current_lb(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Result<Estimate> {
    if setup.bias() == 0.0 {
        return Ok(Estimate::default());
    }
    integrate_transport(|e| model.evaluate(e) * setup.window(e), model, setup, quad).map(|r| r.scaled(2.0))
}

/// Zero-frequency noise `<<I^2>>` in units of `e^2 E0 / h`.
pub fn noise_lb(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Result<Estimate> {
    let integrand = |e: f64| {
        let t = model.evaluate(e);
        let shot = if t > 0.0 && t < 1.0 { t * (1.0 - t) * setup.f1(e) } else { 0.0 };
        shot + t * setup.f2(e)
    };
    integrate_transport(integrand, model, setup, quad).map(|r| r.scaled(4.0))
}

/// `d<I>/dθ`, differentiating the transmission under the integral. For the
/// boxcar the derivative reduces to the window function at the two edges.
pub fn dcurrent_dtheta(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Result<Estimate> {
    if setup.bias() == 0.0 {
        return Ok(Estimate::default());
    }
    match model {
        TransmissionModel::Boxcar { half_width, theta } => {
            let value = 2.0 * (setup.window(theta + half_width) - setup.window(theta - half_width));
            Ok(Estimate { value, error: 0.0, intervals: 0 })
        }
        _ => integrate_transport(|e| model.theta_derivative(e).unwrap_or(0.0) * setup.window(e), model, setup, quad)
            .map(|r| r.scaled(2.0)),
    }
}

fn kernel_domain(setup: &ReservoirSetup, quad: &QuadratureSpec) -> (f64, f64) {
    let span = quad.tail_multiplier * setup.temperature();
    (setup.fermi_energy() - span, setup.fermi_energy() + span)
}

/// Linear-response conductance `G = 2 ∫ T (-∂f/∂ε)`, in units of `e^2 / h`.
/// At `T = 0` this is `G_0 T(ε_F)`.
pub fn conductance(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Result<Estimate> {
    quad.validate()?;
    let temp = setup.temperature();
    let ef = setup.fermi_energy();
    if temp == 0.0 {
        return Ok(Estimate { value: CONDUCTANCE_QUANTUM * model.evaluate(ef), error: 0.0, intervals: 0 });
    }
    let (mut a, mut b) = kernel_domain(setup, quad);
    if let Some((slo, shi)) = model.support() {
        a = slo;
        b = shi;
    }
    let mut pts = model.features();
    pts.push(ef);
    integrate(|e| model.evaluate(e) * thermal_kernel(e, ef, temp), a, b, &pts, quad).map(|r| r.scaled(2.0))
}

/// The same conductance after integrating by parts, `G = 2 ∫ ∂_ε T · f`,
/// truncated to the kernel window with its boundary terms kept.
pub fn conductance_by_parts(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    quad.validate()?;
    let temp = setup.temperature();
    if temp == 0.0 {
        return Err(Error::Domain("the by-parts conductance needs T > 0".into()));
    }
    let ef = setup.fermi_energy();
    if let TransmissionModel::Boxcar { half_width, theta } = model {
        let value = 2.0 * (occupation(theta - half_width, ef, temp) - occupation(theta + half_width, ef, temp));
        return Ok(Estimate { value, error: 0.0, intervals: 0 });
    }
    let (a, b) = kernel_domain(setup, quad);
    let mut pts = model.features();
    pts.push(ef);
    let bulk = integrate(|e| model.energy_derivative(e).unwrap_or(0.0) * occupation(e, ef, temp), a, b, &pts, quad)?;
    let boundary = model.evaluate(a) * occupation(a, ef, temp) - model.evaluate(b) * occupation(b, ef, temp);
    Ok(Estimate { value: bulk.value + boundary, ..bulk }.scaled(2.0))
}

/// `dG/dθ` with the derivative taken under the thermal kernel.
pub fn dconductance_dtheta(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    quad.validate()?;
    let temp = setup.temperature();
    let ef = setup.fermi_energy();
    if temp == 0.0 {
        return Err(Error::Domain("dG/dtheta is evaluated at T > 0".into()));
    }
    if let TransmissionModel::Boxcar { half_width, theta } = model {
        let value =
            2.0 * (occupation_slope(theta - half_width, ef, temp) - occupation_slope(theta + half_width, ef, temp));
        return Ok(Estimate { value, error: 0.0, intervals: 0 });
    }
    let (a, b) = kernel_domain(setup, quad);
    let mut pts = model.features();
    pts.push(ef);
    integrate(|e| model.theta_derivative(e).unwrap_or(0.0) * thermal_kernel(e, ef, temp), a, b, &pts, quad)
        .map(|r| r.scaled(2.0))
}

/// Current, noise, sensitivity and precision rate at one operating point.
pub fn transport(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> Result<TransportResult> {
    let current = current_lb(model, setup, quad)?;
    let noise = noise_lb(model, setup, quad)?;
    let slope = dcurrent_dtheta(model, setup, quad)?;
    Ok(TransportResult::from_parts(
        current.value,
        noise.value.max(0.0),
        slope.value,
        current.error + noise.error + slope.error,
        quad.abs_tol,
    ))
}
