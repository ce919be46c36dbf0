//! Fermi-Dirac statistics of the two leads.
//!
//! Units throughout the crate: `e = h = k_B = 1`, all energies in one
//! reference unit `E0`. Currents come out in `e E0 / h`, noise in
//! `e^2 E0 / h` and the precision rate in `E0 / h`. The conductance quantum
//! `G_0 = 2 e^2 / h` is therefore [`CONDUCTANCE_QUANTUM`] `= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `G_0 = 2 e^2 / h` in natural units.
pub const CONDUCTANCE_QUANTUM: f64 = 2.0;

/// Which lead sits at the biased chemical potential `eps_F + eV`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BiasConvention {
    /// `mu_R = eps_F + eV`, `mu_L = eps_F`.
    #[default]
    RightHot,
    /// `mu_L = eps_F + eV`, `mu_R = eps_F`.
    LeftHot,
}

impl BiasConvention {
    pub fn swapped(self) -> Self {
        match self {
            BiasConvention::RightHot => BiasConvention::LeftHot,
            BiasConvention::LeftHot => BiasConvention::RightHot,
        }
    }
}

impl std::str::FromStr for BiasConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "right-hot" | "righthot" | "right" => Ok(BiasConvention::RightHot),
            "left-hot" | "lefthot" | "left" => Ok(BiasConvention::LeftHot),
            _ => Err(Error::Parse { token: s.to_string(), message: "expected right-hot or left-hot".into() }),
        }
    }
}

impl std::fmt::Display for BiasConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BiasConvention::RightHot => "right-hot",
            BiasConvention::LeftHot => "left-hot",
        })
    }
}

/// Equal-temperature leads with a bias `eV` applied to one of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSetup {
    temperature: f64,
    fermi_energy: f64,
    bias: f64,
    convention: BiasConvention,
}

impl ReservoirSetup {
    pub fn new(temperature: f64, fermi_energy: f64, bias: f64, convention: BiasConvention) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::Domain(format!("temperature must be finite and >= 0, got {temperature}")));
        }
        if !fermi_energy.is_finite() || !bias.is_finite() {
            return Err(Error::Domain("fermi energy and bias must be finite".into()));
        }
        Ok(Self { temperature, fermi_energy, bias, convention })
    }

    /// `eps_F = 0`, right lead biased.
    pub fn simple(temperature: f64, bias: f64) -> Result<Self> {
        Self::new(temperature, 0.0, bias, BiasConvention::RightHot)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn fermi_energy(&self) -> f64 {
        self.fermi_energy
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn convention(&self) -> BiasConvention {
        self.convention
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.fermi_energy, self.bias, self.convention)
    }

    pub fn with_bias(&self, bias: f64) -> Result<Self> {
        Self::new(self.temperature, self.fermi_energy, bias, self.convention)
    }

    pub fn with_convention(&self, convention: BiasConvention) -> Self {
        Self { convention, ..*self }
    }

    pub fn mu_biased(&self) -> f64 {
        self.fermi_energy + self.bias
    }

    pub fn mu_left(&self) -> f64 {
        match self.convention {
            BiasConvention::RightHot => self.fermi_energy,
            BiasConvention::LeftHot => self.mu_biased(),
        }
    }

    pub fn mu_right(&self) -> f64 {
        match self.convention {
            BiasConvention::RightHot => self.mu_biased(),
            BiasConvention::LeftHot => self.fermi_energy,
        }
    }

    /// Lower and upper chemical potential.
    pub fn bias_window(&self) -> (f64, f64) {
        let (a, b) = (self.fermi_energy, self.mu_biased());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Centre of the bias window, the mirror point of every gamma(theta) curve.
    pub fn window_center(&self) -> f64 {
        self.fermi_energy + 0.5 * self.bias
    }

    /// `f_R - f_L`
    pub fn window(&self, energy: f64) -> f64 {
        fermi_difference(energy, self.mu_right(), self.mu_left(), self.temperature)
    }

    pub fn f1(&self, energy: f64) -> f64 {
        let w = self.window(energy);
        w * w
    }

    pub fn f2(&self, energy: f64) -> f64 {
        occupation_variance(energy, self.mu_left(), self.temperature)
            + occupation_variance(energy, self.mu_right(), self.temperature)
    }
}

/// Fermi-Dirac occupation `1 / (exp((energy - mu) / T) + 1)`.
///
/// At `T = 0` this is the Heaviside step with `f(mu) = 1/2`.
pub fn fermi(energy: f64, mu: f64, temperature: f64) -> Result<f64> {
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!("negative temperature {temperature}")));
    }
    Ok(occupation(energy, mu, temperature))
}

pub(crate) fn occupation(energy: f64, mu: f64, temperature: f64) -> f64 {
    let d = energy - mu;
    if temperature == 0.0 {
        return heaviside(-d);
    }
    let x = d / temperature;
    // exp is only ever taken of a non-positive argument
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `f (1 - f)`, which is `1 / (4 cosh^2(x/2))`.
pub(crate) fn occupation_variance(energy: f64, mu: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = 0.5 * (energy - mu) / temperature;
    0.25 * (-2.0 * ln_cosh(x)).exp()
}

/// `-df/d(energy)`, the thermal broadening kernel of the linear-response conductance.
pub(crate) fn thermal_kernel(energy: f64, mu: f64, temperature: f64) -> f64 {
    occupation_variance(energy, mu, temperature) / temperature
}

/// `df/d(energy) = -f (1 - f) / T`.
pub(crate) fn occupation_slope(energy: f64, mu: f64, temperature: f64) -> f64 {
    -thermal_kernel(energy, mu, temperature)
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `f(energy; mu_a) - f(energy; mu_b)` without cancellation:
/// `sinh((mu_a - mu_b) / 2T) / (2 cosh((energy - mu_a) / 2T) cosh((energy - mu_b) / 2T))`.
pub(crate) fn fermi_difference(energy: f64, mu_a: f64, mu_b: f64, temperature: f64) -> f64 {
    if mu_a == mu_b {
        return 0.0;
    }
    if temperature == 0.0 {
        return heaviside(mu_a - energy) - heaviside(mu_b - energy);
    }
    let s = 0.5 * (mu_a - mu_b) / temperature;
    let ua = 0.5 * (energy - mu_a) / temperature;
    let ub = 0.5 * (energy - mu_b) / temperature;
    let log_mag = ln_sinh(s.abs()) - std::f64::consts::LN_2 - ln_cosh(ua) - ln_cosh(ub);
    (log_mag.exp().min(1.0)).copysign(s)
}

/// `ln cosh(x)` for any finite x.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln sinh(x)` for `x > 0`.
pub fn ln_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

/// `ln(exp(a) + exp(b))`
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + exp(x))`
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `softplus(x) - softplus(x - shift)` with relative accuracy everywhere.
pub(crate) fn softplus_step(x: f64, shift: f64) -> f64 {
    if shift < 0.0 {
        return -softplus_step(x - shift, -shift);
    }
    // ln((1 + e^x) / (1 + e^(x - s))) = ln1p((1 - e^-s) / (e^-x + e^-s))
    let r = -(-shift).exp_m1() / ((-x).exp() + (-shift).exp());
    r.ln_1p()
}

/// Free-function form of [`ReservoirSetup::window`].
pub fn fermi_window(energy: f64, setup: &ReservoirSetup) -> f64 {
    setup.window(energy)
}

/// `(f_R - f_L)^2`
pub fn f1_kernel(energy: f64, setup: &ReservoirSetup) -> f64 {
    setup.f1(energy)
}

/// `f_L (1 - f_L) + f_R (1 - f_R)`
pub fn f2_kernel(energy: f64, setup: &ReservoirSetup) -> f64 {
    setup.f2(energy)
}
