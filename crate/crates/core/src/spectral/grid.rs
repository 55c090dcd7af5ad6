use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the transform used for the quintic product is zero-padded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadRule {
    /// Smallest 2^a 3^b 5^c size that is at least `6 M_g + 1`.
    ExactQuintic,
    /// `ceil(r * N_g)` rounded up to an FFT-friendly size. May be too small
    /// for alias-free quintic products, in which case those are rejected.
    Factor(f64),
}

/// Discretization of the torus `[0, 2pi)`.
///
/// Coefficients are kept for `|n| <= modes`, physical values live on
/// `phys_size` equispaced points `x_j = 2 pi j / phys_size`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub modes: usize,
    pub phys_size: usize,
    pub pad_rule: PadRule,
}

impl GridSpec {
    pub fn new(modes: usize, phys_size: usize, pad_rule: PadRule) -> Result<Self> {
        let grid = Self {
            modes,
            phys_size,
            pad_rule,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid with `modes` coefficients, the smallest FFT-friendly physical
    /// size holding them and exact quintic dealiasing.
    pub fn with_modes(modes: usize) -> Self {
        Self {
            modes,
            phys_size: fft_size_at_least(2 * modes + 1),
            pad_rule: PadRule::ExactQuintic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::InvalidGrid("modes must be >= 1".into()));
        }
        if self.phys_size < 2 * self.modes + 1 {
            return Err(Error::InvalidGrid(format!(
                "phys_size {} < 2 * modes + 1 = {}",
                self.phys_size,
                2 * self.modes + 1
            )));
        }
        if let PadRule::Factor(r) = self.pad_rule {
            if !(r.is_finite() && r >= 1.0) {
                return Err(Error::InvalidGrid(format!("pad factor {r} must be >= 1")));
            }
        }
        Ok(())
    }

    /// Number of stored coefficients, `2 M_g + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        2 * self.modes + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of mode `n`.
    #[inline]
    pub fn index(&self, n: i64) -> usize {
        (n + self.modes as i64) as usize
    }

    /// Mode number of storage index `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        i as i64 - self.modes as i64
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> {
        let m = self.modes as i64;
        -m..=m
    }

    /// Padded transform size used for the quintic product.
    pub fn quintic_pad(&self) -> Result<usize> {
        let required = 6 * self.modes + 1;
        let pad = match self.pad_rule {
            PadRule::ExactQuintic => fft_size_at_least(required),
            PadRule::Factor(r) => fft_size_at_least((r * self.phys_size as f64).ceil() as usize),
        };
        if pad < required {
            return Err(Error::InsufficientPadding {
                modes: self.modes,
                pad,
                required,
            });
        }
        Ok(pad)
    }

    /// Transform size on which a product of `degree` fields band-limited to
    /// `modes` is integrated exactly by the trapezoidal rule.
    pub fn quadrature_size(&self, degree: usize) -> usize {
        fft_size_at_least(degree * self.modes + 1)
    }

    /// Transform size on which a product of `degree` band-limited fields is
    /// represented without aliasing (so it can be differentiated spectrally).
    pub fn representation_size(&self, degree: usize) -> usize {
        fft_size_at_least(2 * degree * self.modes + 1)
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.modes == other.modes && self.phys_size == other.phys_size
    }

    /// Physical grid points `x_j`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.phys_size;
        (0..n)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
            .collect()
    }
}

/// Smallest `2^a 3^b 5^c` that is `>= n`.
pub fn fft_size_at_least(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut x = m;
        for p in [2, 3, 5] {
            while x % p == 0 {
                x /= p;
            }
        }
        if x == 1 {
            return m;
        }
        m += 1;
    }
}
