//! JSON snapshot of a field: `{"M_g": .., "N_g": .., "coeffs": [[re, im], ..]}`
//! with coefficients ordered `n = -M_g ..= M_g`.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{FourierField, GridSpec, PadRule};
use crate::error::Result;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSnapshot {
    #[serde(rename = "M_g")]
    pub modes: usize,
    #[serde(rename = "N_g")]
    pub phys_size: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl FieldSnapshot {
    pub fn from_field<T: Real>(u: &FourierField<T>) -> Self {
        Self {
            modes: u.grid().modes,
            phys_size: u.grid().phys_size,
            coeffs: u
                .coeffs()
                .iter()
                .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
                .collect(),
        }
    }

    /// Rebuilds the field on a grid with exact quintic padding.
    pub fn to_field<T: Real>(&self) -> Result<FourierField<T>> {
        let grid = GridSpec::new(self.modes, self.phys_size, PadRule::ExactQuintic)?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
            .collect();
        FourierField::from_coeffs(grid, coeffs)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}
