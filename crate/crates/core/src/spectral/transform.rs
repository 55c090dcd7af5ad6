//! Raw FFT helpers between truncated coefficient vectors and grid values.
//!
//! Mode `n` of a transform of length `len` lives in bin `n mod len`. The
//! inverse transform is left unnormalized so that synthesizing coefficients
//! returns exactly `u(x_j) = sum_n c_n e^{i n x_j}`; analysis divides by `len`.

use num_complex::Complex;

use crate::scalar::Real;

/// Multiplier `(i n)^order`.
pub fn derivative_factor<T: Real>(n: i64, order: u32) -> Complex<T> {
    let k = T::from_index(n);
    match order % 4 {
        0 => Complex::new(k.powi(order as i32), T::zero()),
        1 => Complex::new(T::zero(), k.powi(order as i32)),
        2 => Complex::new(-k.powi(order as i32), T::zero()),
        _ => Complex::new(T::zero(), -k.powi(order as i32)),
    }
}

/// Values of `d^order/dx^order sum_{|n|<=modes} c_n e^{inx}` on `len` equispaced points.
pub fn synthesize<T: Real>(coeffs: &[Complex<T>], modes: usize, len: usize, order: u32) -> Vec<Complex<T>> {
    debug_assert_eq!(coeffs.len(), 2 * modes + 1);
    assert!(len >= 2 * modes + 1, "transform of length {len} cannot hold {modes} modes");
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    let m = modes as i64;
    for (i, c) in coeffs.iter().enumerate() {
        let n = i as i64 - m;
        let bin = n.rem_euclid(len as i64) as usize;
        buf[bin] = if order == 0 {
            *c
        } else {
            *c * derivative_factor::<T>(n, order)
        };
    }
    T::inverse_plan(len).process(&mut buf);
    buf
}

/// Coefficients `|n| <= modes` of the trigonometric interpolant of `values`.
pub fn analyze<T: Real>(mut values: Vec<Complex<T>>, modes: usize) -> Vec<Complex<T>> {
    let len = values.len();
    assert!(len >= 2 * modes + 1, "transform of length {len} cannot hold {modes} modes");
    T::forward_plan(len).process(&mut values);
    let scale = T::one() / T::from_usize(len).unwrap();
    let m = modes as i64;
    (-m..=m)
        .map(|n| values[n.rem_euclid(len as i64) as usize] * scale)
        .collect()
}

/// Trapezoidal rule `(2 pi / len) sum_j f_j`; exact for trigonometric
/// polynomials of degree below `len`.
pub fn integrate<T: Real>(values: impl IntoIterator<Item = T>, len: usize) -> T {
    let s: T = values.into_iter().sum();
    s * T::TAU() / T::from_usize(len).unwrap()
}

/// Spectral derivative of a real periodic sample vector, treating the samples
/// as a trigonometric interpolant. The Nyquist bin is dropped for odd orders.
pub fn differentiate_real<T: Real>(values: &[T], order: u32) -> Vec<T> {
    let buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    differentiate_complex(&buf, order).into_iter().map(|c| c.re).collect()
}

/// Spectral derivative of complex periodic samples (trigonometric interpolant).
pub fn differentiate_complex<T: Real>(values: &[Complex<T>], order: u32) -> Vec<Complex<T>> {
    let len = values.len();
    let mut buf = values.to_vec();
    T::forward_plan(len).process(&mut buf);
    let scale = T::one() / T::from_usize(len).unwrap();
    for (bin, c) in buf.iter_mut().enumerate() {
        let n = if 2 * bin <= len { bin as i64 } else { bin as i64 - len as i64 };
        if len % 2 == 0 && 2 * bin == len && order % 2 == 1 {
            *c = Complex::new(T::zero(), T::zero());
            continue;
        }
        *c = *c * derivative_factor::<T>(n, order) * scale;
    }
    T::inverse_plan(len).process(&mut buf);
    buf
}
