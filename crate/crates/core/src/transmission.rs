//! Transmission functions `T(energy; theta)` of the conductor.
//!
//! Three families are supported: a single resonant level (Lorentzian), a
//! normalised comb of equally spaced Lorentzians, and the boxcar. `theta`
//! rigidly translates each of them along the energy axis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::ReservoirSetup;
use crate::quadrature::normalize_points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CombWeighting {
    /// Every dot carries weight one.
    #[default]
    Uniform,
    /// The two outermost dots carry weight one half (trapezoid rule).
    TrapezoidEndpoints,
}

impl fmt::Display for CombWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CombWeighting::Uniform => "uniform",
            CombWeighting::TrapezoidEndpoints => "trapezoid",
        })
    }
}

impl FromStr for CombWeighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CombWeighting::Uniform),
            "trapezoid" => Ok(CombWeighting::TrapezoidEndpoints),
            other => {
                Err(Error::Parse { token: other.into(), message: "weighting must be uniform or trapezoid".into() })
            }
        }
    }
}

/// `N_d` Lorentzians of width `gamma` spread evenly over `[theta - delta, theta + delta]`,
/// normalised so that the maximum of the sum is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzianComb {
    n_dots: usize,
    gamma: f64,
    half_width: f64,
    theta: f64,
    weighting: CombWeighting,
    norm: f64,
}

impl LorentzianComb {
    pub fn new(n_dots: usize, gamma: f64, half_width: f64, theta: f64, weighting: CombWeighting) -> Result<Self> {
        if n_dots == 0 {
            return Err(Error::Domain("comb needs at least one dot".into()));
        }
        if !(gamma > 0.0) || !(half_width > 0.0) || !gamma.is_finite() || !half_width.is_finite() {
            return Err(Error::Domain("comb gamma and half-width must be finite and > 0".into()));
        }
        if !theta.is_finite() {
            return Err(Error::Domain("theta must be finite".into()));
        }
        let mut comb = Self { n_dots, gamma, half_width, theta, weighting, norm: 1.0 };
        comb.norm = comb.peak_of_raw_sum();
        Ok(comb)
    }

    pub fn n_dots(&self) -> usize {
        self.n_dots
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn weighting(&self) -> CombWeighting {
        self.weighting
    }
    /// Maximum of the unnormalised sum; independent of theta.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Level spacing `2 delta / (N_d - 1)`; zero for a single dot.
    pub fn spacing(&self) -> f64 {
        if self.n_dots == 1 {
            0.0
        } else {
            2.0 * self.half_width / (self.n_dots - 1) as f64
        }
    }

    /// Offset of dot `i` from theta.
    fn offset(&self, i: usize) -> f64 {
        if self.n_dots == 1 {
            0.0
        } else {
            -self.half_width + i as f64 * self.spacing()
        }
    }

    fn weight(&self, i: usize) -> f64 {
        match self.weighting {
            CombWeighting::TrapezoidEndpoints if self.n_dots > 1 && (i == 0 || i + 1 == self.n_dots) => 0.5,
            _ => 1.0,
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_dots).map(move |i| self.theta + self.offset(i))
    }

    /// Unnormalised sum at distance `x` from theta.
    fn raw_sum(&self, x: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        (0..self.n_dots)
            .map(|i| {
                let d = self.offset(i) - x;
                self.weight(i) * g2 / (g2 + d * d)
            })
            .sum()
    }

    fn raw_theta_derivative(&self, x: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        (0..self.n_dots)
            .map(|i| {
                let d = self.offset(i) - x;
                let den = g2 + d * d;
                -2.0 * self.weight(i) * g2 * d / (den * den)
            })
            .sum()
    }

    fn peak_of_raw_sum(&self) -> f64 {
        if self.n_dots == 1 {
            return 1.0;
        }
        // Candidates: the centre and every dot. The global maximum sits within
        // half a spacing of the best candidate; refine there.
        let mut best_x = 0.0;
        let mut best = self.raw_sum(0.0);
        for i in 0..self.n_dots {
            let x = self.offset(i);
            let v = self.raw_sum(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let h = 0.5 * self.spacing();
        let (_, v) =
            crate::sweep::golden_section_max(|x| self.raw_sum(x), best_x - h, best_x + h, 1e-13 * self.half_width);
        best.max(v)
    }

    pub fn evaluate(&self, energy: f64) -> f64 {
        (self.raw_sum(energy - self.theta) / self.norm).min(1.0)
    }

    pub fn theta_derivative(&self, energy: f64) -> f64 {
        self.raw_theta_derivative(energy - self.theta) / self.norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TransmissionModel {
    Lorentzian { gamma: f64, theta: f64 },
    LorentzianComb(LorentzianComb),
    Boxcar { half_width: f64, theta: f64 },
}

impl TransmissionModel {
    pub fn lorentzian(gamma: f64, theta: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() || !theta.is_finite() {
            return Err(Error::Domain("lorentzian needs finite gamma > 0 and finite theta".into()));
        }
        Ok(TransmissionModel::Lorentzian { gamma, theta })
    }

    pub fn comb(n_dots: usize, gamma: f64, half_width: f64, theta: f64, weighting: CombWeighting) -> Result<Self> {
        LorentzianComb::new(n_dots, gamma, half_width, theta, weighting).map(TransmissionModel::LorentzianComb)
    }

    pub fn boxcar(half_width: f64, theta: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() || !theta.is_finite() {
            return Err(Error::Domain("boxcar needs finite delta > 0 and finite theta".into()));
        }
        Ok(TransmissionModel::Boxcar { half_width, theta })
    }

    pub fn theta(&self) -> f64 {
        match self {
            TransmissionModel::Lorentzian { theta, .. } | TransmissionModel::Boxcar { theta, .. } => *theta,
            TransmissionModel::LorentzianComb(c) => c.theta,
        }
    }

    /// Same shape translated to a new theta. The comb keeps its normalisation.
    pub fn with_theta(&self, theta: f64) -> Self {
        match self {
            TransmissionModel::Lorentzian { gamma, .. } => TransmissionModel::Lorentzian { gamma: *gamma, theta },
            TransmissionModel::Boxcar { half_width, .. } => {
                TransmissionModel::Boxcar { half_width: *half_width, theta }
            }
            TransmissionModel::LorentzianComb(c) => {
                TransmissionModel::LorentzianComb(LorentzianComb { theta, ..c.clone() })
            }
        }
    }

    /// Half-extent of the feature: gamma for a single level, delta otherwise.
    pub fn extent(&self) -> f64 {
        match self {
            TransmissionModel::Lorentzian { gamma, .. } => *gamma,
            TransmissionModel::Boxcar { half_width, .. } => *half_width,
            TransmissionModel::LorentzianComb(c) if c.n_dots == 1 => c.gamma,
            TransmissionModel::LorentzianComb(c) => c.half_width,
        }
    }

    /// Smallest energy scale on which the model varies.
    pub fn resolution(&self) -> f64 {
        match self {
            TransmissionModel::Lorentzian { gamma, .. } => *gamma,
            TransmissionModel::Boxcar { half_width, .. } => *half_width,
            TransmissionModel::LorentzianComb(c) => c.gamma,
        }
    }

    pub fn is_boxcar(&self) -> bool {
        matches!(self, TransmissionModel::Boxcar { .. })
    }

    /// Closed support, if the model vanishes identically outside it.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TransmissionModel::Boxcar { half_width, theta } => Some((theta - half_width, theta + half_width)),
            _ => None,
        }
    }

    pub fn evaluate(&self, energy: f64) -> f64 {
        match self {
            TransmissionModel::Lorentzian { gamma, theta } => {
                let g2 = gamma * gamma;
                let d = theta - energy;
                g2 / (g2 + d * d)
            }
            TransmissionModel::LorentzianComb(c) => c.evaluate(energy),
            TransmissionModel::Boxcar { half_width, theta } => {
                let d = (energy - theta).abs();
                if d < *half_width {
                    1.0
                } else if d > *half_width {
                    0.0
                } else {
                    0.5
                }
            }
        }
    }

    /// `dT/dtheta`. Errors for the boxcar, whose derivative is distributional.
    pub fn theta_derivative(&self, energy: f64) -> Result<f64> {
        match self {
            TransmissionModel::Lorentzian { gamma, theta } => {
                let g2 = gamma * gamma;
                let d = theta - energy;
                let den = g2 + d * d;
                Ok(-2.0 * g2 * d / (den * den))
            }
            TransmissionModel::LorentzianComb(c) => Ok(c.theta_derivative(energy)),
            TransmissionModel::Boxcar { .. } => Err(Error::DistributionalDerivative),
        }
    }

    /// `dT/d(energy)`; equal to `-dT/dtheta` because theta is a translation.
    pub fn energy_derivative(&self, energy: f64) -> Result<f64> {
        self.theta_derivative(energy).map(|d| -d)
    }

    /// Resonance centres and edges of the model alone.
    pub fn features(&self) -> Vec<f64> {
        match self {
            TransmissionModel::Lorentzian { theta, .. } => vec![*theta],
            TransmissionModel::Boxcar { half_width, theta } => vec![theta - half_width, theta + half_width],
            TransmissionModel::LorentzianComb(c) => c.centers().collect(),
        }
    }

    /// All energies where an integrand built from this model and `setup` may
    /// peak or kink: both chemical potentials plus the model features.
    pub fn breakpoints(&self, setup: &ReservoirSetup) -> Vec<f64> {
        let mut pts = self.features();
        pts.push(setup.mu_left());
        pts.push(setup.mu_right());
        normalize_points(&mut pts);
        pts
    }
}

/// Sup-norm distance between the boxcar of half-width `half_width` and the
/// comb, sampled on `grid_points` equally spaced energies over `[-2 delta, 2 delta]`.
pub fn comb_sup_error(
    n_dots: usize,
    gamma: f64,
    half_width: f64,
    weighting: CombWeighting,
    grid_points: usize,
) -> Result<f64> {
    if n_dots < 2 {
        return Err(Error::Domain("comb_sup_error needs at least two dots".into()));
    }
    if grid_points < 1000 {
        return Err(Error::Domain("comb_sup_error needs at least 1000 grid points".into()));
    }
    let comb = TransmissionModel::comb(n_dots, gamma, half_width, 0.0, weighting)?;
    let bx = TransmissionModel::boxcar(half_width, 0.0)?;
    let lo = -2.0 * half_width;
    let step = 4.0 * half_width / (grid_points - 1) as f64;
    Ok((0..grid_points)
        .map(|k| {
            let e = lo + k as f64 * step;
            (bx.evaluate(e) - comb.evaluate(e)).abs()
        })
        .fold(0.0, f64::max))
}

impl fmt::Display for TransmissionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransmissionModel::Lorentzian { gamma, theta } => write!(f, "lorentzian:gamma={gamma},theta={theta}"),
            TransmissionModel::Boxcar { half_width, theta } => write!(f, "boxcar:delta={half_width},theta={theta}"),
            TransmissionModel::LorentzianComb(c) => write!(
                f,
                "comb:nd={},gamma={},delta={},theta={},weighting={}",
                c.n_dots, c.gamma, c.half_width, c.theta, c.weighting
            ),
        }
    }
}

impl FromStr for TransmissionModel {
    type Err = Error;

    /// `lorentzian:gamma=..,theta=..`, `comb:nd=..,gamma=..,delta=..,theta=..,weighting=uniform|trapezoid`
    /// or `boxcar:delta=..,theta=..`. `theta` defaults to zero, `weighting` to uniform.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse { token: s.into(), message: "expected <family>:<key>=<value>,...".into() })?;
        let mut kv: Vec<(&str, &str)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse { token: item.into(), message: "expected key=value".into() })?;
            let k = k.trim();
            if kv.iter().any(|(prev, _)| *prev == k) {
                return Err(Error::Parse { token: k.into(), message: "duplicate key".into() });
            }
            kv.push((k, v.trim()));
        }
        let allowed: &[&str] = match family {
            "lorentzian" => &["gamma", "theta"],
            "comb" => &["nd", "gamma", "delta", "theta", "weighting"],
            "boxcar" => &["delta", "theta"],
            other => {
                return Err(Error::Parse {
                    token: other.into(),
                    message: "unknown family (lorentzian, comb, boxcar)".into(),
                })
            }
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::Parse { token: (*k).into(), message: format!("unknown key for {family}") });
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let num = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Parse { token: v.into(), message: format!("{key} is not a number") })
                })
                .transpose()
        };
        let required = |key: &str| -> Result<f64> {
            num(key)?.ok_or_else(|| Error::Parse { token: family.into(), message: format!("missing {key}") })
        };
        let theta = num("theta")?.unwrap_or(0.0);
        match family {
            "lorentzian" => TransmissionModel::lorentzian(required("gamma")?, theta),
            "boxcar" => TransmissionModel::boxcar(required("delta")?, theta),
            _ => {
                let nd_raw =
                    get("nd").ok_or_else(|| Error::Parse { token: family.into(), message: "missing nd".into() })?;
                let nd = nd_raw.parse::<usize>().map_err(|_| Error::Parse {
                    token: nd_raw.into(),
                    message: "nd must be a positive integer".into(),
                })?;
                let weighting = get("weighting").map(str::parse).transpose()?.unwrap_or_default();
                TransmissionModel::comb(nd, required("gamma")?, required("delta")?, theta, weighting)
            }
        }
    }
}
