//! Numerical laboratory for pulled fronts in `u_t = P(∂x)u + f(u)`.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the stencils.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod config;
pub mod dispersion;
pub mod fd;
pub mod front;
pub mod interp;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod simulator;
pub mod spectrum;
pub mod weights;

pub use approx::ApproxSolution;
pub use dispersion::{PinchCertificate, PinchResult, SpectrumReport};
pub use front::FrontProfile;
pub use simulator::{ShiftFit, SimConfig, SimState};
pub use spectrum::{EigReport, WeightedOperator};
pub use model::{Family, ModelSpec};
