use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The boxcar derivative is a pair of delta functions; callers have to use
    /// the boundary-term formulas instead of integrating it.
    #[error("the boxcar theta-derivative is distributional; use the boundary-term path")]
    DistributionalDerivative,

    /// Adaptive quadrature ran out of subdivisions.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    Quadrature { estimate: f64, error_bound: f64, subdivisions: usize },

    /// Inputs for which a formula degenerates (zero conductance, T_F = 1, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The noise vanishes while the sensitivity does not.
    #[error("precision rate diverges: {0}")]
    Divergent(String),

    /// The locally unbiased estimator needs a non-zero sensitivity.
    #[error("estimator undefined: sensitivity d<I>/dtheta vanishes at theta_ref = {theta_ref}")]
    EstimatorUndefined { theta_ref: f64 },

    /// A transmission-model spec string failed to parse.
    #[error("invalid model spec near `{token}`: {message}")]
    Parse { token: String, message: String },
}
