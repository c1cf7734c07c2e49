//! Root densities of polynomials under repeated differentiation.
//!
//! The density `u(t, x)` of the roots of `p^{(tn)}` for a degree-`n`
//! polynomial `p` is modelled by the nonlocal transport equation
//!
//! ```text
//! u_t + (1/π) ∂_x arctan(Hu / u) = 0      on {u > 0}
//! ```
//!
//! with `H` the Hilbert transform. The crate provides several independent
//! descriptions of this flow so they can be checked against one another:
//!
//! * [`densities`]: the arcsine, semicircle and Marchenko-Pastur closed forms.
//! * [`poly_dynamics`]: exact roots of `p^{(k)}` for a real-rooted `p`.
//! * [`pde_solver`]: a spectral-flux finite-difference solver on a shrinking support.
//! * [`linearized`]: the modal solution of the linearization around the arcsine law.
//! * [`metrics`]: Kolmogorov-Smirnov, Wasserstein-1 and L1 comparisons.
//! * [`cli`]: the config-driven experiment runner behind the `rootflow` binary.

pub mod chebyshev;
pub mod cli;
pub mod densities;
pub mod error;
pub mod interval;
pub mod linearized;
pub mod metrics;
pub mod pde_solver;
pub mod poly_dynamics;
pub mod quadrature;

pub use chebyshev::{ChebSeries, Kind};
pub use densities::ClosedFormFamily;
pub use error::{Error, Result};
pub use interval::SupportInterval;
pub use linearized::LinearizedState;
pub use metrics::ComparisonReport;
pub use pde_solver::{PdeState, SolverParams};
pub use poly_dynamics::{DifferentiationSchedule, RootConfiguration};
