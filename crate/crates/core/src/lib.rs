//! Current, shot noise and the thermodynamic precision rate of a two-terminal
//! mesoscopic conductor in the Landauer-Büttiker picture.
//!
//! Natural units throughout: `e = h = k_B = 1`, so the spin-degenerate
//! conductance quantum is `G_0 = 2`.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod fermi;
pub mod landauer;
pub mod limits;
pub mod quadrature;
pub mod sweep;
pub mod transmission;
pub mod validate;

pub use error::{Error, Result};
pub use fermi::{BiasConvention, ReservoirSetup};
pub use landauer::{transport, TransportResult};
pub use quadrature::QuadratureSpec;
pub use transmission::{CombWeighting, TransmissionModel};
