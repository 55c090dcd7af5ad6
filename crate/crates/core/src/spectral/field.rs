use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use super::grid::GridSpec;
use super::transform;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A complex field `u = sum_{|n| <= M_g} c_n e^{inx}` on the torus.
///
/// Coefficients are stored for `n = -M_g ..= M_g` in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField<T: Real> {
    grid: GridSpec,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FourierField<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex<T>>) -> Result<Self> {
        grid.validate()?;
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch(coeffs.len(), grid.len()));
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(grid.mode(i)));
        }
        Ok(Self { grid, coeffs })
    }

    /// Builds a field from a per-mode generator.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(i64) -> Complex<T>) -> Self {
        let coeffs = grid.wavenumbers().map(&mut f).collect();
        Self { grid, coeffs }
    }

    /// `amplitude * e^{inx}`.
    pub fn plane_wave(grid: GridSpec, n: i64, amplitude: Complex<T>) -> Self {
        assert!(n.unsigned_abs() as usize <= grid.modes, "mode {n} outside grid");
        let mut u = Self::zeros(grid);
        u.coeffs[grid.index(n)] = amplitude;
        u
    }

    /// Interpolates physical values given on the `phys_size` grid.
    pub fn analyze(grid: GridSpec, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.phys_size {
            return Err(Error::LengthMismatch(values.len(), grid.phys_size));
        }
        Self::from_coeffs(grid, transform::analyze(values, grid.modes))
    }

    /// Physical values `u(x_j)` on the `phys_size` grid.
    pub fn synthesize(&self) -> Vec<Complex<T>> {
        self.values_on(self.grid.phys_size, 0)
    }

    /// Values of `d^order u / dx^order` on `len` equispaced points (`len >= 2 M_g + 1`).
    pub fn values_on(&self, len: usize, order: u32) -> Vec<Complex<T>> {
        transform::synthesize(&self.coeffs, self.grid.modes, len, order)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient of `e^{inx}`; zero outside the grid.
    pub fn coeff(&self, n: i64) -> Complex<T> {
        if n.unsigned_abs() as usize > self.grid.modes {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[self.grid.index(n)]
        }
    }

    pub fn modes_with_coeffs(&self) -> impl Iterator<Item = (i64, &Complex<T>)> {
        self.grid.wavenumbers().zip(self.coeffs.iter())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_modes: self.grid.modes,
                left_size: self.grid.phys_size,
                right_modes: other.grid.modes,
                right_size: other.grid.phys_size,
            })
        }
    }

    /// Dirichlet projector: keeps `|n| <= m`. The identity when `m >= M_g`.
    pub fn project(&self, m: usize) -> Self {
        if m >= self.grid.modes {
            return self.clone();
        }
        let coeffs = self
            .modes_with_coeffs()
            .map(|(n, c)| {
                if n.unsigned_abs() as usize <= m {
                    *c
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Complementary projector `1 - pi_m`.
    pub fn project_out(&self, m: usize) -> Self {
        self - &self.project(m)
    }

    /// Multiplication of coefficient `n` by `(i n)^order`.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let coeffs = self
            .modes_with_coeffs()
            .map(|(n, c)| *c * transform::derivative_factor::<T>(n, order))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `2 pi sum_n (1 + n^2)^s |c_n|^2`.
    pub fn sobolev_norm_sq(&self, s: T) -> T {
        let total: T = self
            .modes_with_coeffs()
            .map(|(n, c)| {
                let w = T::one() + T::from_index(n * n);
                if s == T::zero() {
                    c.norm_sqr()
                } else {
                    w.powf(s) * c.norm_sqr()
                }
            })
            .sum();
        T::TAU() * total
    }

    /// `L^p` norm by the trapezoidal rule on the physical grid;
    /// `p = infinity` gives the maximum over grid points.
    pub fn lp_norm(&self, p: T) -> T {
        let values = self.synthesize();
        if p.is_infinite() {
            return values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
        }
        let len = values.len();
        let integral = transform::integrate(values.iter().map(|v| v.norm().powf(p)), len);
        integral.powf(T::one() / p)
    }

    /// `int a conj(b) dx = 2 pi sum_n a_n conj(b_n)`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.ensure_same_grid(other)?;
        let s = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b.conj());
        Ok(s * T::TAU())
    }

    /// Coefficients `|n| <= M_g` of `|u|^4 u`, computed alias-free on the
    /// padded transform of the grid's pad rule.
    pub fn quintic(&self) -> Result<Self> {
        let pad = self.grid.quintic_pad()?;
        let values: Vec<Complex<T>> = self
            .values_on(pad, 0)
            .into_iter()
            .map(|v| {
                let n = v.norm_sqr();
                v * (n * n)
            })
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs: transform::analyze(values, self.grid.modes),
        })
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn scale_real(&self, a: T) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: T, other: &Self) -> Self {
        assert!(self.grid.same_shape(&other.grid), "grid mismatch");
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        }
    }

    /// Translation `u(x - a)` by `k` physical grid spacings.
    pub fn shift_by_points(&self, k: i64) -> Self {
        let a = T::TAU() * T::from_index(k) / T::from_usize(self.grid.phys_size).unwrap();
        Self::from_fn(self.grid, |n| {
            self.coeff(n) * Complex::from_polar(T::one(), -T::from_index(n) * a)
        })
    }

    /// Copies the coefficients onto another grid, truncating or zero-extending.
    pub fn regrid(&self, grid: GridSpec) -> Self {
        Self::from_fn(grid, |n| self.coeff(n))
    }

    /// Largest coefficient-wise distance.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let m = self.grid.modes.max(other.grid.modes) as i64;
        (-m..=m)
            .map(|n| (self.coeff(n) - other.coeff(n)).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> FourierField<U> {
        FourierField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(U::lit(c.re.to_f64_lossy()), U::lit(c.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T: Real> Add for &FourierField<T> {
    type Output = FourierField<T>;

    fn add(self, rhs: Self) -> FourierField<T> {
        self.add_scaled(T::one(), rhs)
    }
}

impl<T: Real> Sub for &FourierField<T> {
    type Output = FourierField<T>;

    fn sub(self, rhs: Self) -> FourierField<T> {
        self.add_scaled(-T::one(), rhs)
    }
}

impl<T: Real> Mul<T> for &FourierField<T> {
    type Output = FourierField<T>;

    fn mul(self, rhs: T) -> FourierField<T> {
        self.scale_real(rhs)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::PadRule;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn grid(m: usize) -> GridSpec {
        GridSpec::with_modes(m)
    }

    /// Deterministic pseudo-random coefficients without pulling in an RNG.
    fn wiggly(g: GridSpec, seed: u64) -> FourierField<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        FourierField::from_fn(g, |n| c(next(), next()) / (1.0 + (n * n) as f64))
    }

    #[test]
    fn project_drops_high_modes() {
        let g = grid(4);
        let u = &FourierField::plane_wave(g, 2, c(1.0, 0.0)) + &FourierField::plane_wave(g, 1, c(1.0, 0.0));
        assert_eq!(u.project(1), FourierField::plane_wave(g, 1, c(1.0, 0.0)));
        assert_eq!(u.project(4), u);
        assert_eq!(u.project(100), u);
        let w = wiggly(grid(8), 3);
        assert_eq!(w.project(3).project(5), w.project(3));
    }

    #[test]
    fn sobolev_norms_of_simple_fields() {
        let g = grid(4);
        let u = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        assert!((u.sobolev_norm_sq(2.0) - 50.0 * PI).abs() < 1e-12);
        assert_eq!(FourierField::<f64>::zeros(g).sobolev_norm_sq(1.5), 0.0);
        let cosx = &FourierField::plane_wave(g, 1, c(1.0, 0.0)) + &FourierField::plane_wave(g, -1, c(1.0, 0.0));
        assert!((cosx.sobolev_norm_sq(1.0) - 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sobolev_h1_matches_quadrature() {
        // Independent route: trapezoidal quadrature of |u|^2 + |u_x|^2.
        let u = wiggly(grid(6), 11);
        let len = 64;
        let v = u.values_on(len, 0);
        let dv = u.values_on(len, 1);
        let q = transform::integrate(v.iter().zip(&dv).map(|(a, b)| a.norm_sqr() + b.norm_sqr()), len);
        assert!((q - u.sobolev_norm_sq(1.0)).abs() < 1e-12 * q);
    }

    #[test]
    fn lp_norms() {
        let g = grid(4);
        let u = FourierField::plane_wave(g, 3, c(1.0, 0.0));
        assert!((u.lp_norm(4.0) - (2.0 * PI).powf(0.25)).abs() < 1e-12);
        assert_eq!(FourierField::<f64>::zeros(g).lp_norm(f64::INFINITY), 0.0);
        let w = &FourierField::plane_wave(g, 0, c(1.0, 0.0)) + &FourierField::plane_wave(g, 1, c(1.0, 0.0));
        assert!((w.lp_norm(2.0) - 2.0 * PI.sqrt()).abs() < 1e-12);
        let r = wiggly(grid(7), 5);
        let l2 = r.lp_norm(2.0);
        assert!((l2 - r.sobolev_norm_sq(0.0).sqrt()).abs() < 1e-10 * l2);
    }

    #[test]
    fn derivatives() {
        let g = grid(4);
        let u = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        assert_eq!(u.derivative(1), FourierField::plane_wave(g, 2, c(0.0, 2.0)));
        let w = wiggly(grid(8), 2);
        assert_eq!(w.derivative(0), w);
        assert!(w.derivative(1).derivative(1).max_coeff_diff(&w.derivative(2)) < 1e-12);
        let skew = w.derivative(1).inner(&w).unwrap().re;
        assert!(skew.abs() < 1e-10 * w.sobolev_norm_sq(1.0));
    }

    #[test]
    fn quintic_examples() {
        let g = grid(4);
        let u = FourierField::plane_wave(g, 3, c(0.6, 0.8));
        assert!(u.quintic().unwrap().max_coeff_diff(&u) < 1e-14);
        assert_eq!(FourierField::<f64>::zeros(g).quintic().unwrap().max_abs_coeff(), 0.0);
        // (2 cos x)^5 = 32 cos^5 x = 2 cos 5x + 10 cos 3x + 20 cos x, so the
        // e^{ix} coefficient is 10 = C(5, 3), e^{3ix} is 5 and e^{5ix} is 1.
        let two_cos = &FourierField::plane_wave(g, 1, c(1.0, 0.0)) + &FourierField::plane_wave(g, -1, c(1.0, 0.0));
        let q = two_cos.quintic().unwrap();
        assert!((q.coeff(1) - c(10.0, 0.0)).norm() < 1e-12);
        assert!((q.coeff(-1) - c(10.0, 0.0)).norm() < 1e-12);
        assert!((q.coeff(3) - c(5.0, 0.0)).norm() < 1e-12);
        assert!(q.coeff(2).norm() < 1e-12);
    }

    #[test]
    fn quintic_rejects_thin_padding() {
        let g = GridSpec::new(8, 17, PadRule::Factor(1.0)).unwrap();
        let u = FourierField::plane_wave(g, 1, c(1.0, 0.0));
        assert!(matches!(u.quintic(), Err(Error::InsufficientPadding { .. })));
    }

    #[test]
    fn inner_products() {
        let g = grid(4);
        let e1 = FourierField::plane_wave(g, 1, c(1.0, 0.0));
        let e2 = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        assert!((e1.inner(&e1).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-14);
        assert_eq!(e1.inner(&e2).unwrap(), c(0.0, 0.0));
        assert!(e1.inner(&FourierField::zeros(grid(5))).is_err());
    }

    #[test]
    fn analyze_roundtrip() {
        let u = wiggly(GridSpec::new(10, 30, PadRule::ExactQuintic).unwrap(), 9);
        let back = FourierField::analyze(*u.grid(), u.synthesize()).unwrap();
        assert!(back.max_coeff_diff(&u) <= 1e-12 * u.max_abs_coeff());
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid(2);
        let mut v = vec![c(0.0, 0.0); 5];
        v[4] = c(f64::NAN, 0.0);
        assert!(matches!(FourierField::from_coeffs(g, v), Err(Error::NonFinite(2))));
    }

    #[test]
    fn single_precision_fields() {
        let g = grid(4);
        let u = FourierField::<f32>::plane_wave(g, 2, Complex::new(1.0, 0.0));
        assert!((u.sobolev_norm_sq(2.0) - 50.0 * std::f32::consts::PI).abs() < 1e-3);
        let q = u.quintic().unwrap();
        assert!(q.max_coeff_diff(&u) < 1e-5);
    }
}
