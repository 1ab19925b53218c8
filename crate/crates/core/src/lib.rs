//! Numerical laboratory for the limiting point process of geodesic lengths on
//! large-genus hyperbolic surfaces.
//!
//! The crate simulates the Mirzakhani-Petri Poisson process (intensity
//! `2 sinh^2(x/2)/x`), evaluates windowed linear statistics of its points,
//! computes their exact cumulants through Campbell's formula, and tests the
//! Gaussianity of Monte Carlo ensembles against the GOE variance prediction.
//!
//! Module map:
//! - [`testfn`]: admissible test functions via their compactly supported
//!   Fourier transforms, and the GOE variance functional.
//! - [`process`]: the intensity, its cumulative table, and an exact
//!   inverse-transform sampler.
//! - [`statistic`]: the kernel `F`, the k-summed functional `H`, the linear
//!   statistic `S`, and envelope-bound profiles.
//! - [`campbell`]: quadrature cumulants, variance-vs-GOE ladders, decay fits.
//! - [`ensemble`]: reproducible parallel Monte Carlo, k-statistics, and
//!   normality diagnostics.

pub mod campbell;
pub mod ensemble;
pub mod error;
pub mod kahan;
pub mod process;
pub mod quad;
pub mod rng;
pub mod special;
pub mod statistic;
pub mod testfn;

pub use error::{Error, Result};
