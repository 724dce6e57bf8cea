//! Numerical laboratory for the geodesic flow of the Sol-type metric
//! `dz^2 + X^T G(z) X` on the torus bundle `M_C = (T^2 x R) / ((X, z) ~ (C X, z + 1))`.
//!
//! * [`solmetric`]: gluing matrix, real logarithm, metric family.
//! * [`flow`]: Hamiltonian, leapfrog / RK4 integration, deck map.
//! * [`integrals`]: first integrals, Poisson brackets, independence rank.
//! * [`sectionmap`]: return map on the invariant torus, Lyapunov exponents.
//! * [`fundgroup`]: the deck group, word growth, growth certificates.
//! * [`cli`]: the `solflow` command-line front end.

pub mod cli;
pub mod error;
pub mod flow;
pub mod fundgroup;
pub mod integrals;
pub mod sampling;
pub mod sectionmap;
pub mod solmetric;

pub use error::{Error, Result};
pub use flow::{CoverState, IntegratorConfig, QuotientState, Scheme, TrajectoryRecord};
pub use fundgroup::{GroupElement, GrowthTable};
pub use integrals::{BracketConfig, QuotientIntegrals};
pub use sectionmap::{LyapunovEstimate, TorusPoint};
pub use solmetric::{GluingMatrix, MetricFamily};
