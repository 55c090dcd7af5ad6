//! Pointwise mass, momentum and stress densities of the quintic flow.
//!
//! `N = |u|^2`, `J = 2 Im(conj(u) u_x)` and
//! `T = 4 |u_x|^2 - N_xx + sigma (4/3) N^3`. Along the untruncated flow they
//! satisfy `N_t + J_x = 0` and `J_t + T_x = 0`, and for every field
//! `J^2 + N_x^2 = 4 N |u_x|^2`.
//!
//! [`densities`] evaluates the triple on the physical grid by the product
//! rule. The residual diagnostics instead differentiate the densities
//! spectrally on a transform large enough to hold them without aliasing, so
//! the two routes are independent.

use std::io::Write;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::flow::{Cutoff, FlowParams};
use crate::scalar::{Real, Sigma};
use crate::spectral::{transform, FourierField};

/// Densities sampled on the physical grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTriple<T: Real> {
    pub x: Vec<T>,
    pub mass: Vec<T>,
    pub momentum: Vec<T>,
    pub stress: Vec<T>,
}

pub fn densities<T: Real>(u: &FourierField<T>, sigma: Sigma) -> DensityTriple<T> {
    let len = u.grid().phys_size;
    let v = u.values_on(len, 0);
    let vx = u.values_on(len, 1);
    let vxx = u.values_on(len, 2);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let quartic = sigma.value::<T>() * T::lit(4.0 / 3.0);
    let mut out = DensityTriple {
        x: (0..len)
            .map(|j| T::TAU() * T::from_usize(j).unwrap() / T::from_usize(len).unwrap())
            .collect(),
        mass: Vec::with_capacity(len),
        momentum: Vec::with_capacity(len),
        stress: Vec::with_capacity(len),
    };
    for j in 0..len {
        let n = v[j].norm_sqr();
        let grad_sq = vx[j].norm_sqr();
        let nxx = two * (v[j].conj() * vxx[j]).re + two * grad_sq;
        out.mass.push(n);
        out.momentum.push(two * (v[j].conj() * vx[j]).im);
        out.stress.push(four * grad_sq - nxx + quartic * n * n * n);
    }
    out
}

/// Sup-norm of `J^2 + N_x^2 - 4 N |u_x|^2` on an alias-free grid.
pub fn eleele_residual<T: Real>(u: &FourierField<T>) -> T {
    let len = u.grid().representation_size(2);
    let v = u.values_on(len, 0);
    let vx = u.values_on(len, 1);
    let n: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    let nx = transform::differentiate_real(&n, 1);
    let two = T::lit(2.0);
    (0..len)
        .map(|j| {
            let jj = two * (v[j].conj() * vx[j]).im;
            (jj * jj + nx[j] * nx[j] - T::lit(4.0) * n[j] * vx[j].norm_sqr()).abs()
        })
        .fold(T::zero(), T::max)
}

/// Natural size of the [`eleele_residual`] terms: `1 + ||u||_{H^1}^4`.
pub fn eleele_scale<T: Real>(u: &FourierField<T>) -> T {
    let h1 = u.sobolev_norm_sq(T::one());
    T::one() + h1 * h1
}

/// Residuals of the two local conservation laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuityResiduals<T> {
    /// `sup |N_t + J_x|`
    pub mass: T,
    /// `sup |J_t + T_x|`
    pub momentum: T,
}

/// Time derivatives and densities on an alias-free transform.
struct DensityCalculus<T: Real> {
    len: usize,
    n_t: Vec<T>,
    n_x: Vec<T>,
    j: Vec<T>,
    j_t: Vec<T>,
    j_x: Vec<T>,
    t_x: Vec<T>,
}

impl<T: Real> DensityCalculus<T> {
    /// `u_t` is the exact (untruncated) right-hand side `i u_xx - i sigma |u|^4 u`.
    fn new(u: &FourierField<T>, sigma: Sigma) -> Self {
        // T contains N^3, a degree-6 product.
        let len = u.grid().representation_size(6);
        let s = sigma.value::<T>();
        let two = T::lit(2.0);
        let v = u.values_on(len, 0);
        let vx = u.values_on(len, 1);
        let vxx = u.values_on(len, 2);
        let n: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
        let u_t: Vec<Complex<T>> = (0..len)
            .map(|k| {
                let w = vxx[k] - v[k] * (s * n[k] * n[k]);
                Complex::new(-w.im, w.re)
            })
            .collect();
        let u_tx = transform::differentiate_complex(&u_t, 1);
        let n_t: Vec<T> = (0..len).map(|k| two * (v[k].conj() * u_t[k]).re).collect();
        let j: Vec<T> = (0..len).map(|k| two * (v[k].conj() * vx[k]).im).collect();
        let j_t: Vec<T> = (0..len)
            .map(|k| two * (v[k].conj() * u_tx[k] + u_t[k].conj() * vx[k]).im)
            .collect();
        let n_x = transform::differentiate_real(&n, 1);
        let n_xx = transform::differentiate_real(&n, 2);
        let stress: Vec<T> = (0..len)
            .map(|k| {
                T::lit(4.0) * vx[k].norm_sqr() - n_xx[k] + s * T::lit(4.0 / 3.0) * n[k] * n[k] * n[k]
            })
            .collect();
        let j_x = transform::differentiate_real(&j, 1);
        let t_x = transform::differentiate_real(&stress, 1);
        Self {
            len,
            n_t,
            n_x,
            j,
            j_t,
            j_x,
            t_x,
        }
    }
}

fn require_full<T: Real>(p: &FlowParams<T>) -> Result<()> {
    match p.cutoff {
        Cutoff::Full => Ok(()),
        Cutoff::Modes(m) => Err(Error::FiniteCutoff(m)),
    }
}

/// Sup-norms of `N_t + J_x` and `J_t + T_x` with `u_t` taken from the
/// untruncated equation. Finite cutoffs are rejected: the truncated flow
/// does not satisfy the local laws.
pub fn continuity_residuals<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<ContinuityResiduals<T>> {
    require_full(p)?;
    let d = DensityCalculus::new(u, p.sigma);
    let sup = |a: &[T], b: &[T]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (*x + *y).abs())
            .fold(T::zero(), T::max)
    };
    Ok(ContinuityResiduals {
        mass: sup(&d.n_t, &d.j_x),
        momentum: sup(&d.j_t, &d.t_x),
    })
}

/// Natural size of the continuity residuals: `1 + ||u||_{H^3}^6`.
pub fn continuity_scale<T: Real>(u: &FourierField<T>) -> T {
    T::one() + u.sobolev_norm_sq(T::lit(3.0)).powi(3)
}

/// `J_0 = int N_t J^2`, which vanishes identically along the full flow.
pub fn j0_diag<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
    require_full(p)?;
    let d = DensityCalculus::new(u, p.sigma);
    Ok(transform::integrate(
        d.n_t.iter().zip(&d.j).map(|(nt, j)| *nt * *j * *j),
        d.len,
    ))
}

/// `int |N_t| J^2`, the size against which [`j0_diag`] cancels.
pub fn j0_scale<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
    require_full(p)?;
    let d = DensityCalculus::new(u, p.sigma);
    Ok(T::one()
        + transform::integrate(
            d.n_t.iter().zip(&d.j).map(|(nt, j)| nt.abs() * *j * *j),
            d.len,
        ))
}

/// `N_1 = int N_t N_x^2`; generically nonzero.
pub fn n1_diag<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
    require_full(p)?;
    let d = DensityCalculus::new(u, p.sigma);
    Ok(transform::integrate(
        d.n_t.iter().zip(&d.n_x).map(|(nt, nx)| *nt * *nx * *nx),
        d.len,
    ))
}

/// Density dump: CSV rows `x,N,J,T` on the physical grid.
pub fn write_density_csv<T: Real, W: Write>(w: W, d: &DensityTriple<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "N", "J", "T"])?;
    for k in 0..d.x.len() {
        wtr.write_record([
            format!("{:e}", d.x[k].to_f64_lossy()),
            format!("{:e}", d.mass[k].to_f64_lossy()),
            format!("{:e}", d.momentum[k].to_f64_lossy()),
            format!("{:e}", d.stress[k].to_f64_lossy()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
