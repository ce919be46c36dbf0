//! Globally adaptive Gauss-Kronrod (10/21-point) integration over a set of
//! mandatory breakpoints.
//!
//! Every interval between consecutive breakpoints is integrated separately;
//! the interval with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integration windows reach `tail_multiplier * k_B T` past the outermost
    /// chemical potential.
    pub tail_multiplier: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, tail_multiplier: 40.0, max_subdivisions: 10_000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be > 0".into()));
        }
        if !(self.tail_multiplier >= 10.0) {
            return Err(Error::Domain("tail_multiplier must be >= 10".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }
}

/// Integral value together with the summed error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            intervals: self.intervals + rhs.intervals,
        }
    }
}

impl Estimate {
    pub fn scaled(self, factor: f64) -> Estimate {
        Estimate { value: self.value * factor, error: self.error * factor.abs(), ..self }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    res_abs: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Interval {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Interval { a, b, value, error: err, res_abs }
}

/// Sorts, deduplicates (within `1e-12` of the larger magnitude, floored at
/// `1e-12`) and drops non-finite entries.
pub fn normalize_points(points: &mut Vec<f64>) {
    points.retain(|p| p.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
}

/// Integrates `f` over `[a, b]`, always splitting at every breakpoint strictly
/// inside the interval.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Estimate::default());
    }
    if b < a {
        return integrate(f, b, a, breakpoints, spec).map(|e| e.scaled(-1.0));
    }
    let mut points: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    points.push(a);
    points.push(b);
    normalize_points(&mut points);
    // dedup may have moved an endpoint by < 1e-12; pin the ends back
    if let Some(first) = points.first_mut() {
        *first = a;
    }
    if let Some(last) = points.last_mut() {
        *last = b;
    }

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod21(&f, w[0], w[1]));
        }
    }
    let sum = |heap: &BinaryHeap<Interval>| heap.iter().fold((0.0, 0.0), |(v, e), iv| (v + iv.value, e + iv.error));
    let (mut total, mut error) = sum(&heap);
    // with cancellation, 50 eps ∫|f| per interval is the best attainable
    let mut abs_total: f64 = heap.iter().map(|iv| iv.res_abs).sum();
    let mut subdivisions = 0usize;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.abs()).max(100.0 * f64::EPSILON * abs_total);
        if error <= target {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Quadrature { estimate: total, error_bound: error, subdivisions });
        }
        let worst = match heap.pop() {
            Some(iv) => iv,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval at machine resolution; nothing left to refine
            heap.push(Interval { error: 0.0, ..worst });
            let (t, e) = sum(&heap);
            total = t;
            error = e;
            if error <= target {
                break;
            }
            continue;
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        abs_total += left.res_abs + right.res_abs - worst.res_abs;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions.is_multiple_of(64) {
            let (t, e) = sum(&heap);
            total = t;
            error = e;
            abs_total = heap.iter().map(|iv| iv.res_abs).sum();
        }
    }
    let (value, error) = sum(&heap);
    Ok(Estimate { value, error, intervals: heap.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &[], &QuadratureSpec::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-13);
    }

    #[test]
    fn kink_at_breakpoint() {
        let spec = QuadratureSpec::default();
        let est = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], &spec).unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-14);
        assert_eq!(est.intervals, 2);
    }

    #[test]
    fn step_without_breakpoint_still_converges() {
        let spec = QuadratureSpec::with_tolerances(1e-10, 1e-14);
        let est = integrate(|x| if x < 0.123 { 1.0 } else { 0.0 }, 0.0, 1.0, &[], &spec).unwrap();
        assert!((est.value - 0.123).abs() < 1e-9);
    }

    #[test]
    fn cancelling_integrand_stops_at_roundoff() {
        let spec = QuadratureSpec::with_tolerances(1e-14, 1e-300);
        let est = integrate(|x: f64| (40.0 * x).sin() + 1e-9, -1.0, 1.0, &[], &spec).unwrap();
        assert!((est.value - 2e-9).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_negate() {
        let spec = QuadratureSpec::default();
        let a = integrate(f64::exp, 0.0, 1.0, &[], &spec).unwrap().value;
        let b = integrate(f64::exp, 1.0, 0.0, &[], &spec).unwrap().value;
        assert_eq!(a, -b);
        assert!((a - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoint() {
        let g = 1e-4;
        let spec = QuadratureSpec::default();
        let est = integrate(|x| g * g / (g * g + (x - 0.7) * (x - 0.7)), -10.0, 10.0, &[0.7], &spec).unwrap();
        let exact = g * (((10.0 - 0.7) / g).atan() + ((10.0 + 0.7) / g).atan());
        assert!((est.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let spec = QuadratureSpec { rel_tol: 1e-15, abs_tol: 1e-300, tail_multiplier: 40.0, max_subdivisions: 3 };
        let err = integrate(|x: f64| x.sqrt().recip(), 1e-300, 1.0, &[], &spec).unwrap_err();
        match err {
            Error::Quadrature { estimate, subdivisions, .. } => {
                assert_eq!(subdivisions, 3);
                assert!(estimate > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec { tail_multiplier: 5.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn dedup_points() {
        let mut p = vec![1.0, 0.0, 1.0 + 1e-14, f64::NAN, -2.0];
        normalize_points(&mut p);
        assert_eq!(p, vec![-2.0, 0.0, 1.0]);
    }
}
