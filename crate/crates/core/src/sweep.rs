//! Parameter sweeps over θ and N_d, and maximisation of the precision rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::ReservoirSetup;
use crate::landauer::{conductance, dconductance_dtheta, transport};
use crate::limits::{precision_linear_response, precision_zero_t_integral};
use crate::quadrature::QuadratureSpec;
use crate::transmission::{CombWeighting, TransmissionModel};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Returns the best `(x, f(x))` seen,
/// endpoints included.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = (a, f(a));
    let fb = f(b);
    if fb > best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a) <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 || (v == best.1 && x < best.0) {
            best = (x, v);
        }
    }
    best
}

/// Which precision-rate expression a sweep or optimisation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Exact,
    LinearResponse,
    ZeroTemperature,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "lr" | "linear-response" => Ok(Method::LinearResponse),
            "zero-t" | "zero-temperature" => Ok(Method::ZeroTemperature),
            other => Err(Error::Parse { token: other.to_string(), message: "expected exact, lr or zero-t".into() }),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::LinearResponse => "lr",
            Method::ZeroTemperature => "zero-t",
        })
    }
}

/// Precision rate of one method at one point: `+inf` when divergent, `Err`
/// when the method is undefined there.
pub fn precision_rate(
    method: Method,
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
) -> Result<f64> {
    match method {
        Method::Exact => transport(model, setup, quad).map(|r| r.gamma_or_inf()),
        Method::LinearResponse => precision_linear_response(model, setup, quad).map(|r| r.value),
        Method::ZeroTemperature => {
            precision_zero_t_integral(model, &setup.with_temperature(0.0)?, quad).map(|r| r.value)
        }
    }
}

/// One row of a θ sweep. Rates a method cannot produce at this point are NaN
/// and the reason is kept in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theta: f64,
    pub gamma_exact: f64,
    pub gamma_lr: f64,
    pub gamma_zero_t: f64,
    pub divergent: bool,
    pub current: f64,
    pub noise: f64,
    pub conductance: f64,
    /// `∂_θ ln G`
    pub rel_sensitivity: f64,
    pub notes: Vec<String>,
}

/// `n` equally spaced points on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn sweep_point(model: &TransmissionModel, setup: &ReservoirSetup, quad: &QuadratureSpec) -> SweepRecord {
    let mut notes = Vec::new();
    let mut note = |label: &str, r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            f64::NAN
        }
    };
    let (exact, current, noise, divergent) = match transport(model, setup, quad) {
        Ok(r) => (r.gamma_or_inf(), r.current, r.noise, r.divergent),
        Err(e) => (note("exact", Err(e)), f64::NAN, f64::NAN, false),
    };
    let lr = note("lr", precision_rate(Method::LinearResponse, model, setup, quad));
    let zero_t = note("zero-t", precision_rate(Method::ZeroTemperature, model, setup, quad));
    let g = note("conductance", conductance(model, setup, quad).map(|e| e.value));
    let dg = note("sensitivity", dconductance_dtheta(model, setup, quad).map(|e| e.value));
    SweepRecord {
        theta: model.theta(),
        gamma_exact: exact,
        gamma_lr: lr,
        gamma_zero_t: zero_t,
        divergent,
        current,
        noise,
        conductance: g,
        rel_sensitivity: dg / g,
        notes,
    }
}

/// Evaluates every method at each θ, in parallel, keeping input order.
pub fn sweep_theta(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    thetas: &[f64],
) -> Result<Vec<SweepRecord>> {
    quad.validate()?;
    Ok(thetas.par_iter().map(|&t| sweep_point(&model.with_theta(t), setup, quad)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub method: Method,
    /// Search interval; defaults to [`default_interval`].
    pub interval: Option<(f64, f64)>,
    pub grid_points: usize,
    /// Final bracket width of the golden refinement.
    pub theta_tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { method: Method::Exact, interval: None, grid_points: 201, theta_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub theta_star: f64,
    pub gamma_max: f64,
    pub n_evals: usize,
    /// Whether golden refinement improved on the best grid point.
    pub refined: bool,
}

/// Thermal margin, in units of `k_B T`, added to the search reach. At high
/// temperature the optimum sits a few `k_B T` outside the bias window.
pub const THERMAL_REACH: f64 = 4.0;

fn search_reach(extent: f64, setup: &ReservoirSetup) -> (f64, f64) {
    let reach = 2.0 * (extent + setup.bias().abs() + THERMAL_REACH * setup.temperature());
    (setup.fermi_energy() - reach, setup.fermi_energy() + reach)
}

/// `ε_F ± 2 (extent + |eV| + 4 k_B T)`.
pub fn default_interval(model: &TransmissionModel, setup: &ReservoirSetup) -> (f64, f64) {
    search_reach(model.extent(), setup)
}

/// Maximises γ(θ) by a grid scan followed by golden refinement around the
/// best grid point. Divergent and undefined points are skipped; ties within a
/// relative `1e-12` go to the smaller θ.
pub fn optimize_theta(
    model: &TransmissionModel,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    opts: &OptimizeOptions,
) -> Result<OptResult> {
    quad.validate()?;
    if opts.grid_points < 3 {
        return Err(Error::Domain("optimizer grid needs at least 3 points".into()));
    }
    if !(opts.theta_tol > 0.0) {
        return Err(Error::Domain("theta tolerance must be > 0".into()));
    }
    let (lo, hi) = opts.interval.unwrap_or_else(|| default_interval(model, setup));
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("empty search interval [{lo}, {hi}]")));
    }
    let grid = linspace(lo, hi, opts.grid_points);
    let eval = |t: f64| precision_rate(opts.method, &model.with_theta(t), setup, quad);
    let raw: Vec<Result<f64>> = grid.par_iter().map(|&t| eval(t)).collect();
    let first_divergent = grid.iter().zip(&raw).find(|(_, r)| matches!(r, Ok(v) if v.is_infinite())).map(|(t, _)| *t);
    let values: Vec<Option<f64>> = raw.into_iter().map(|r| r.ok().filter(|v| v.is_finite())).collect();

    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.iter().enumerate() {
        let Some(v) = *v else { continue };
        match best {
            Some((_, b)) if v <= b * (1.0 + 1e-12) => {}
            _ => best = Some((k, v)),
        }
    }
    let Some((k, grid_best)) = best else {
        return Err(Error::Divergent(match first_divergent {
            Some(t) => format!("precision rate diverges at theta = {t} and nowhere on the grid is it finite"),
            None => "precision rate is undefined on the whole search grid".into(),
        }));
    };

    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(grid.len() - 1)];
    let evals = std::cell::Cell::new(0usize);
    let (x, v) = golden_section_max(
        |t| {
            evals.set(evals.get() + 1);
            eval(t).ok().filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY)
        },
        a,
        b,
        opts.theta_tol,
    );
    let n_evals = grid.len() + evals.get();
    if v > grid_best * (1.0 + 1e-12) {
        Ok(OptResult { theta_star: x, gamma_max: v, n_evals, refined: true })
    } else {
        Ok(OptResult { theta_star: grid[k], gamma_max: grid_best, n_evals, refined: false })
    }
}

/// Normalised comb parameters shared by an N_d sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombFamily {
    pub gamma: f64,
    pub half_width: f64,
    pub weighting: CombWeighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NdRecord {
    pub n_d: usize,
    pub gamma_max: f64,
    pub theta_star: f64,
}

/// Maximal precision rate of the comb for each dot count.
pub fn sweep_nd(
    family: &CombFamily,
    n_dots: &[usize],
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    opts: &OptimizeOptions,
) -> Result<Vec<NdRecord>> {
    // every dot count shares the search window of the full comb
    let opts = OptimizeOptions { interval: opts.interval.or(Some(search_reach(family.half_width, setup))), ..*opts };
    n_dots
        .iter()
        .map(|&n| {
            let model =
                TransmissionModel::comb(n, family.gamma, family.half_width, setup.fermi_energy(), family.weighting)?;
            let opt = optimize_theta(&model, setup, quad, &opts)?;
            Ok(NdRecord { n_d: n, gamma_max: opt.gamma_max, theta_star: opt.theta_star })
        })
        .collect()
}

/// The `N_d → ∞` reference: the optimised boxcar of the same half-width.
pub fn boxcar_asymptote(
    half_width: f64,
    setup: &ReservoirSetup,
    quad: &QuadratureSpec,
    opts: &OptimizeOptions,
) -> Result<OptResult> {
    let model = TransmissionModel::boxcar(half_width, setup.fermi_energy())?;
    optimize_theta(&model, setup, quad, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v.abs() < 1e-18);
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-6);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn method_parse_round_trip() {
        for m in [Method::Exact, Method::LinearResponse, Method::ZeroTemperature] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn sweep_keeps_order_and_records_failures() {
        let m = TransmissionModel::lorentzian(0.1, 0.0).unwrap();
        let cold = ReservoirSetup::simple(0.0, 1.0).unwrap();
        let thetas = linspace(-1.0, 2.0, 7);
        let rows = sweep_theta(&m, &cold, &QuadratureSpec::default(), &thetas).unwrap();
        assert_eq!(rows.iter().map(|r| r.theta).collect::<Vec<_>>(), thetas);
        for r in &rows {
            assert!(r.gamma_lr.is_nan());
            assert!(r.notes.iter().any(|n| n.starts_with("lr:")));
            assert!((r.gamma_exact - r.gamma_zero_t).abs() <= 1e-8 * r.gamma_exact.max(1e-300));
        }
    }

    #[test]
    fn optimizer_picks_smaller_of_mirror_maxima() {
        // the Lorentzian rate is symmetric about the window centre
        let m = TransmissionModel::lorentzian(0.05, 0.0).unwrap();
        let s = ReservoirSetup::simple(0.05, 1.0).unwrap();
        let opt = optimize_theta(&m, &s, &QuadratureSpec::default(), &OptimizeOptions::default()).unwrap();
        assert!(opt.theta_star < 0.5);
        let mirrored = transport(&m.with_theta(1.0 - opt.theta_star), &s, &QuadratureSpec::default()).unwrap();
        assert!((mirrored.precision_rate.unwrap() - opt.gamma_max).abs() < 1e-8 * opt.gamma_max);
        for d in [-1e-3, 1e-3] {
            let nearby = transport(&m.with_theta(opt.theta_star + d), &s, &QuadratureSpec::default()).unwrap();
            assert!(nearby.precision_rate.unwrap() <= opt.gamma_max);
        }
    }

    #[test]
    fn optimizer_rejects_all_divergent_grid() {
        // a cold boxcar wider than any interval edge: every point has one edge in the window
        let m = TransmissionModel::boxcar(0.5, 0.0).unwrap();
        let s = ReservoirSetup::simple(0.0, 1.0).unwrap();
        let opts = OptimizeOptions { interval: Some((0.1, 0.45)), ..Default::default() };
        assert!(matches!(optimize_theta(&m, &s, &QuadratureSpec::default(), &opts), Err(Error::Divergent(_))));
        let bad = OptimizeOptions { grid_points: 2, ..Default::default() };
        assert!(optimize_theta(&m, &s, &QuadratureSpec::default(), &bad).is_err());
    }

    #[test]
    fn nd_sweep_single_dot_is_lorentzian() {
        let s = ReservoirSetup::simple(0.5, 1.0).unwrap();
        let fam = CombFamily { gamma: 0.2, half_width: 1.0, weighting: CombWeighting::Uniform };
        let q = QuadratureSpec::default();
        let rows = sweep_nd(&fam, &[1], &s, &q, &OptimizeOptions::default()).unwrap();
        let opts = OptimizeOptions { interval: Some((-8.0, 8.0)), ..Default::default() };
        let single = optimize_theta(&TransmissionModel::lorentzian(0.2, 0.0).unwrap(), &s, &q, &opts).unwrap();
        assert_eq!(rows[0].gamma_max, single.gamma_max);
        assert_eq!(rows[0].theta_star, single.theta_star);
    }
}
