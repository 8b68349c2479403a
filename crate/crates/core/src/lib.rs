//! Spectral machinery of rank-one singular perturbations at desk scale.
//!
//! The crate evaluates Herglotz transforms of finitely represented measures,
//! classifies energies by the inverse-square moment, walks the parameter
//! chain `(alpha, c) <-> gamma <-> v <-> theta` between couplings and
//! self-adjoint extensions, locates eigenvalues of the extension family
//! through the boundary-value criterion, and cross-validates all of it
//! against direct diagonalization of finite matrix models.
//!
//! Modules:
//! - [`measure`]: atoms + piecewise-cubic densities, validation, benchmarks
//! - [`herglotz`]: `F_mu`, boundary values, `G_n`, divergence classification
//! - [`params`]: the coupling/gamma/v/theta parameter chain
//! - [`ad`]: eigenvalue location, energy scans, coupling sweeps
//! - [`oracle`]: finite matrix models and the brute-force oracles
//! - [`report`]: deterministic JSON/CSV emission of scan and suite reports
//!
//! ```
//! use rankone_core::{AdProblem, ExtensionParam, Measure, Window};
//! use rankone_core::ad::eigenvalues_for_extension;
//! use std::f64::consts::FRAC_PI_2;
//!
//! // mu0 = delta_0 with base extension at theta0 = pi/2: the extension at
//! // theta = pi/4 has its eigenvalue where F(y) = -1/y equals cot(-pi/4)
//! let problem = AdProblem::new(Measure::dirac(0.0, 1.0), ExtensionParam::new(FRAC_PI_2));
//! let window = Window::new(0.5, 1.5).unwrap();
//! let hits =
//!     eigenvalues_for_extension(&problem, &ExtensionParam::new(FRAC_PI_2 / 2.0), &window)
//!         .unwrap();
//! assert!((hits[0].y - 1.0).abs() < 1e-9);
//! ```

pub mod ad;
pub mod herglotz;
pub mod measure;
pub mod oracle;
pub mod params;
mod poly;
pub mod report;

pub use ad::{AdError, AdProblem, EigenHit, ScanReport};
pub use herglotz::{
    boundary_value, g_n, inverse_square_moment, transform, EnergyClass, HerglotzError, Tolerances,
};
pub use measure::{dyadic_benchmark, validate, Atom, Kernel, Measure, MeasureError, Window};
pub use oracle::{MatrixModel, OracleError};
pub use params::{Coupling, ExtensionParam, GammaParam, ParamError, UnimodularV};
