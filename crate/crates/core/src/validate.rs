//! Self-consistency suite: closed forms against quadrature, the limit chain,
//! symmetries and the Cramér-Rao direction.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fermi::ReservoirSetup;
use crate::landauer::{conductance, current_lb, noise_lb, transport};
use crate::limits::{
    boxcar_closed_current, boxcar_closed_noise, boxcar_closed_precision, fisher_gaussian, precision_linear_response,
    precision_zero_t_integral, precision_zero_t_sommerfeld,
};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::transmission::{CombWeighting, TransmissionModel};

/// Deliberate defects used to show that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Fault {
    #[default]
    None,
    /// Negates `∂_θ T` wherever the suite uses it.
    FlipThetaDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst relative deviation seen (or the checked quantity).
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl ValidationReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Quadrature used when the caller does not override it.
pub fn reference_quadrature() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-11, 1e-15)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

struct Suite {
    quad: QuadratureSpec,
    fault: Fault,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<(f64, String)>, tolerance: f64) {
        let check = match outcome {
            Ok((deviation, detail)) => {
                CheckResult { name: name.to_string(), passed: deviation <= tolerance, deviation, tolerance, detail }
            }
            Err(e) => CheckResult {
                name: name.to_string(),
                passed: false,
                deviation: f64::NAN,
                tolerance,
                detail: format!("error: {e}"),
            },
        };
        self.checks.push(check);
    }

    fn theta_derivative(&self, model: &TransmissionModel, e: f64) -> f64 {
        let d = model.theta_derivative(e).unwrap_or(f64::NAN);
        match self.fault {
            Fault::None => d,
            Fault::FlipThetaDerivative => -d,
        }
    }

    /// `2 ∫ ∂_θ T (f_R - f_L)` from the (possibly faulty) derivative.
    fn analytic_slope(&self, model: &TransmissionModel, setup: &ReservoirSetup) -> Result<f64> {
        let (lo, hi) = setup.bias_window();
        let tail = self.quad.tail_multiplier * setup.temperature();
        let pts = model.breakpoints(setup);
        let est =
            integrate(|e| self.theta_derivative(model, e) * setup.window(e), lo - tail, hi + tail, &pts, &self.quad)?;
        Ok(2.0 * est.value)
    }
}

fn boxcar_closed_forms(s: &mut Suite) {
    let cases = [(3.0, 1.0, 10.0, 9.5), (0.05, 1.0, 1.0, 0.3), (0.01, 1.0, 1.0, 0.3), (0.2, -0.7, 0.5, -0.2)];
    let quad = s.quad;
    let outcome = (|| {
        let mut worst = 0.0f64;
        for &(t, v, d, th) in &cases {
            let setup = ReservoirSetup::simple(t, v)?;
            let model = TransmissionModel::boxcar(d, th)?;
            let r = transport(&model, &setup, &quad)?;
            worst = worst
                .max(rel(boxcar_closed_current(&setup, d, th)?, r.current))
                .max(rel(boxcar_closed_noise(&setup, d, th)?, r.noise))
                .max(rel(boxcar_closed_precision(&setup, d, th)?, r.gamma_or_inf()));
        }
        Ok((worst, format!("{} boxcar configurations, current/noise/rate", cases.len())))
    })();
    s.record("boxcar_closed_form", outcome, 1e-8);
}

fn johnson_nyquist(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let setup = ReservoirSetup::simple(0.7, 0.0)?;
        let models = [
            TransmissionModel::lorentzian(0.3, 0.4)?,
            TransmissionModel::comb(5, 0.05, 0.5, -0.2, CombWeighting::Uniform)?,
            TransmissionModel::boxcar(0.6, 0.9)?,
        ];
        let mut worst = 0.0f64;
        for m in &models {
            let noise = noise_lb(m, &setup, &quad)?.value;
            let g = conductance(m, &setup, &quad)?.value;
            worst = worst.max(rel(noise, 4.0 * setup.temperature() * g));
        }
        Ok((worst, "zero-bias noise against 4 k_B T G".into()))
    })();
    s.record("johnson_nyquist", outcome, 1e-7);
}

fn linear_response_limit(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let setup = ReservoirSetup::simple(1.0, 1e-4)?;
        let mut worst = 0.0f64;
        for (g, th) in [(0.1, 0.6), (0.5, -1.2), (2.0, 0.9)] {
            let m = TransmissionModel::lorentzian(g, th)?;
            let exact = transport(&m, &setup, &quad)?.gamma_or_inf();
            let lr = precision_linear_response(&m, &setup, &quad)?;
            worst = worst.max(rel(exact, lr.value));
        }
        Ok((worst, "eV = 1e-4 k_BT".into()))
    })();
    s.record("limit_linear_response", outcome, 1e-3);
}

fn zero_temperature_limit(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let mut worst = 0.0f64;
        for (g, th) in [(1.0, 0.3), (0.2, 0.9), (0.05, -0.1)] {
            let m = TransmissionModel::lorentzian(g, th)?;
            let cold = ReservoirSetup::simple(0.0, 1.0)?;
            let z = precision_zero_t_integral(&m, &cold, &quad)?.value;
            worst = worst.max(rel(transport(&m, &cold, &quad)?.gamma_or_inf(), z));
            let warm = ReservoirSetup::simple(1e-6, 1.0)?;
            worst = worst.max(rel(transport(&m, &warm, &quad)?.gamma_or_inf(), z));
        }
        Ok((worst, "exact rate at T = 0 and 1e-6 against the window integral".into()))
    })();
    s.record("limit_zero_temperature", outcome, 1e-3);
}

fn sommerfeld_limit(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let cold = ReservoirSetup::simple(0.0, 1.0)?;
        let mut worst = 0.0f64;
        for th in [20.0, -35.0, 60.0] {
            let m = TransmissionModel::lorentzian(100.0, th)?;
            let a = precision_zero_t_integral(&m, &cold, &quad)?.value;
            let b = precision_zero_t_sommerfeld(&m, &cold)?.value;
            worst = worst.max(rel(a, b));
        }
        Ok((worst, "Gamma = 100 eV".into()))
    })();
    s.record("limit_sommerfeld", outcome, 1e-2);
}

fn translation_symmetry(s: &mut Suite) {
    let outcome = (|| {
        let models = [
            TransmissionModel::lorentzian(0.3, 0.1)?,
            TransmissionModel::comb(7, 0.05, 0.6, 0.2, CombWeighting::TrapezoidEndpoints)?,
        ];
        let mut worst = 0.0f64;
        for m in &models {
            let h = 1e-5 * m.resolution();
            let energies: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
            let mut scale = 0.0f64;
            for &e in &energies {
                scale = scale.max(m.theta_derivative(e)?.abs());
            }
            for &e in &energies {
                let fd = (m.evaluate(e + h) - m.evaluate(e - h)) / (2.0 * h);
                worst = worst.max((s.theta_derivative(m, e) + fd).abs() / scale);
            }
        }
        Ok((worst, "dT/dtheta against -dT/de by central differences".into()))
    })();
    s.record("translation_symmetry", outcome, 1e-5);
}

fn sensitivity_consistency(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let setup = ReservoirSetup::simple(0.1, 1.0)?;
        let mut worst = 0.0f64;
        for (g, th) in [(0.1, 1.1), (0.1, -0.2), (0.5, 0.3)] {
            let m = TransmissionModel::lorentzian(g, th)?;
            let h = 1e-4 * g;
            let up = current_lb(&m.with_theta(th + h), &setup, &quad)?.value;
            let down = current_lb(&m.with_theta(th - h), &setup, &quad)?.value;
            worst = worst.max(rel(s.analytic_slope(&m, &setup)?, (up - down) / (2.0 * h)));
        }
        Ok((worst, "analytic d<I>/dtheta against finite differences".into()))
    })();
    s.record("sensitivity_consistency", outcome, 1e-6);
}

fn mirror_symmetry(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let setup = ReservoirSetup::simple(0.1, 1.0)?;
        let c = setup.window_center();
        let mut worst = 0.0f64;
        for x in [0.2, 0.55, 1.3] {
            let m = TransmissionModel::lorentzian(0.1, c + x)?;
            let mirrored = m.with_theta(c - x);
            let a = s.analytic_slope(&m, &setup)?;
            let b = s.analytic_slope(&mirrored, &setup)?;
            worst = worst.max(rel(a, -b));
            let ga = transport(&m, &setup, &quad)?.gamma_or_inf();
            let gb = transport(&mirrored, &setup, &quad)?.gamma_or_inf();
            worst = worst.max(rel(ga, gb));
        }
        Ok((worst, "rate and slope under theta -> 2c - theta".into()))
    })();
    s.record("mirror_symmetry", outcome, 1e-6);
}

fn cramer_rao_direction(s: &mut Suite) {
    let quad = s.quad;
    let outcome = (|| {
        let setup = ReservoirSetup::simple(0.1, 1.0)?;
        let m = TransmissionModel::lorentzian(0.1, 1.1)?;
        let tau = 1e4;
        let gamma = transport(&m, &setup, &quad)?.gamma_or_inf();
        let f = fisher_gaussian(&m, &setup, &quad, tau)?;
        // deviation > 0 only if tau * gamma exceeds the Fisher information
        Ok((
            (tau * gamma - f.total).max(0.0) / f.total,
            format!("tau*gamma = {:.6e}, F = {:.6e}", tau * gamma, f.total),
        ))
    })();
    s.record("cramer_rao_direction", outcome, 1e-12);
}

/// Runs every check with the given quadrature and injected fault.
pub fn run_validation(quad: &QuadratureSpec, fault: Fault) -> ValidationReport {
    let mut suite = Suite { quad: *quad, fault, checks: Vec::new() };
    if let Err(e) = quad.validate() {
        suite.record("quadrature_spec", Err(e), 0.0);
    }
    boxcar_closed_forms(&mut suite);
    johnson_nyquist(&mut suite);
    linear_response_limit(&mut suite);
    zero_temperature_limit(&mut suite);
    sommerfeld_limit(&mut suite);
    translation_symmetry(&mut suite);
    sensitivity_consistency(&mut suite);
    mirror_symmetry(&mut suite);
    cramer_rao_direction(&mut suite);
    let all_passed = suite.checks.iter().all(|c| c.passed);
    ValidationReport { checks: suite.checks, all_passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(r: &ValidationReport, name: &str) -> bool {
        r.checks.iter().find(|c| c.name == name).unwrap().passed
    }

    #[test]
    fn reference_suite_passes() {
        let r = run_validation(&reference_quadrature(), Fault::None);
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.all_passed);
    }

    #[test]
    fn flipped_derivative_is_caught() {
        let r = run_validation(&reference_quadrature(), Fault::FlipThetaDerivative);
        assert!(!r.all_passed);
        assert!(!status(&r, "translation_symmetry"));
        assert!(!status(&r, "sensitivity_consistency"));
        assert!(status(&r, "boxcar_closed_form"));
    }

    #[test]
    fn loose_quadrature_is_caught() {
        let r = run_validation(&QuadratureSpec::with_tolerances(1e-2, 1e-2), Fault::None);
        assert!(!status(&r, "boxcar_closed_form"), "{:?}", r.checks[0]);
    }
}
