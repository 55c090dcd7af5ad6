//! Pseudospectral tools for the quintic nonlinear Schrödinger equation
//! `(i d_t + d_x^2) u = sigma |u|^4 u` on the torus.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix the common double-precision case.

pub mod densities;
pub mod energy;
pub mod error;
pub mod flow;
pub mod measure;
pub mod scalar;
pub mod spectral;

pub use energy::{Corrections, ModifiedEnergy};
pub use error::{Error, Result};
pub use measure::{EnsembleRecord, MeasureSpec, TailRatio};
pub use flow::{Cutoff, FlowParams, Integrator, Trajectory};
pub use scalar::{Complex, Real, Sigma};
pub use spectral::{FourierField, GridSpec, PadRule};

/// Double-precision field.
pub type Field = FourierField<f64>;
/// Single-precision field.
pub type Field32 = FourierField<f32>;
/// Double-precision flow parameters.
pub type Params = FlowParams<f64>;
