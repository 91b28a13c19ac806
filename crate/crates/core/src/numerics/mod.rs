//! Shared numeric kernels: exact dyadic arithmetic, adaptive Gauss–Kronrod
//! quadrature, bracketing root finding, and an embedded Runge–Kutta stepper
//! with boundary-event localization.

mod dyadic;
mod ode;
mod quad;
mod root;

pub use dyadic::DyadicScalar;
pub use ode::ode_step_trace;
pub use quad::{integrate_adaptive, QuadratureResult};
pub use root::find_root;
