//! Fourier representation of fields on the torus `[0, 2pi)`.

mod field;
mod grid;
mod snapshot;
pub mod transform;

pub use field::FourierField;
pub use grid::{fft_size_at_least, GridSpec, PadRule};
pub use snapshot::FieldSnapshot;
