//! The modified energy `E_2(u) = ||u||_{H^2}^2 + R_2(u)` and its time
//! derivative along the (truncated) flow.
//!
//! The correction is
//!
//! ```text
//! R_2(u) = sigma * ( c_a Re int u_xx conj(u) N^2
//!                  + c_b int N N_x^2
//!                  + c_c int N J^2 )
//!          + c_d int N^5
//! ```
//!
//! with `(c_a, c_b, c_c, c_d) = (-2, -1/2, 1/2, 4/15)`, `N = |u|^2` and
//! `J = 2 Im(conj(u) u_x)`. Every correction is a total time derivative
//! picked up while removing second derivatives from `d/dt ||u_xx||^2`; the
//! first three come with one power of `sigma` from the nonlinearity, the
//! last with `sigma^2 = 1`. With these coefficients `F_2 = dE_2/dt` no
//! longer depends on `u_xx` and stays bounded as the cutoff grows, while
//! `d/dt ||u||_{H^2}^2` alone does not.
//!
//! All integrals are computed by trapezoidal quadrature on a transform large
//! enough to integrate degree-10 products exactly.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, FlowParams, ObservableRow, Observer};
use crate::scalar::{Real, Sigma};
use crate::spectral::{transform, FourierField};

/// Coefficients of the four correction functionals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    /// `Re int u_xx conj(u) N^2`, scaled by sigma.
    pub curvature: f64,
    /// `int N N_x^2`, scaled by sigma.
    pub gradient: f64,
    /// `int N J^2`, scaled by sigma.
    pub current: f64,
    /// `int N^5`.
    pub potential: f64,
}

impl Default for Corrections {
    fn default() -> Self {
        Self {
            curvature: -2.0,
            gradient: -0.5,
            current: 0.5,
            potential: 4.0 / 15.0,
        }
    }
}

impl Corrections {
    pub const NAMES: [&'static str; 4] = ["curvature", "gradient", "current", "potential"];

    pub fn as_array(&self) -> [f64; 4] {
        [self.curvature, self.gradient, self.current, self.potential]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Self {
            curvature: c[0],
            gradient: c[1],
            current: c[2],
            potential: c[3],
        }
    }

    /// Copy with coefficient `index` multiplied by `factor`.
    pub fn perturbed(&self, index: usize, factor: f64) -> Self {
        let mut c = self.as_array();
        c[index] *= factor;
        Self::from_array(c)
    }
}

/// Weighted correction terms; they sum to `R_2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CorrectionTerms<T> {
    pub curvature: T,
    pub gradient: T,
    pub current: T,
    pub potential: T,
}

impl<T: Real> CorrectionTerms<T> {
    pub fn total(&self) -> T {
        self.curvature + self.gradient + self.current + self.potential
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Corrections::NAMES
            .iter()
            .zip([self.curvature, self.gradient, self.current, self.potential])
            .map(|(k, v)| (k.to_string(), v.to_f64_lossy()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub h2_sq: T,
    pub r2_terms: CorrectionTerms<T>,
    pub r2: T,
    pub e2: T,
    pub f2: Option<T>,
    pub bound: Option<T>,
}

/// Serializable checkpoint of an [`EnergyBreakdown`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRecord {
    pub time: f64,
    pub h2_sq: f64,
    pub r2_terms: BTreeMap<String, f64>,
    pub r2: f64,
    pub e2: f64,
    pub f2: Option<f64>,
    pub bound: Option<f64>,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn record(&self, time: f64) -> BreakdownRecord {
        BreakdownRecord {
            time,
            h2_sq: self.h2_sq.to_f64_lossy(),
            r2_terms: self.r2_terms.to_map(),
            r2: self.r2.to_f64_lossy(),
            e2: self.e2.to_f64_lossy(),
            f2: self.f2.map(|v| v.to_f64_lossy()),
            bound: self.bound.map(|v| v.to_f64_lossy()),
        }
    }
}

pub const DEFAULT_M0: i32 = 10;

/// The `k = 1` modified energy for one sign of the nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModifiedEnergy {
    pub sigma: Sigma,
    pub coefficients: Corrections,
    /// Exponent of `||u||_{H^1}` in the smoothing and Lipschitz bounds.
    pub m0: i32,
}

/// Pointwise samples of `u`, `u_x`, `u_xx` on a quadrature grid.
struct Samples<T: Real> {
    len: usize,
    u: Vec<Complex<T>>,
    ux: Vec<Complex<T>>,
    uxx: Vec<Complex<T>>,
}

impl<T: Real> Samples<T> {
    fn new(u: &FourierField<T>, len: usize) -> Self {
        Self {
            len,
            u: u.values_on(len, 0),
            ux: u.values_on(len, 1),
            uxx: u.values_on(len, 2),
        }
    }
}

impl ModifiedEnergy {
    /// Energy controlling `H^{2k}`. Only `k = 1` has closed-form corrections.
    pub fn new(k: u32, sigma: Sigma) -> Result<Self> {
        if k != 1 {
            return Err(Error::UnsupportedOrder(k));
        }
        Ok(Self {
            sigma,
            coefficients: Corrections::default(),
            m0: DEFAULT_M0,
        })
    }

    pub fn h2(sigma: Sigma) -> Self {
        Self::new(1, sigma).expect("k = 1 is supported")
    }

    pub fn with_coefficients(mut self, c: Corrections) -> Self {
        self.coefficients = c;
        self
    }

    pub fn with_m0(mut self, m0: i32) -> Self {
        self.m0 = m0;
        self
    }

    fn quadrature_len<T: Real>(u: &FourierField<T>) -> usize {
        // int N^5 is the highest-degree integrand.
        u.grid().quadrature_size(10)
    }

    /// `R_2(u)` and its weighted terms.
    pub fn r2<T: Real>(&self, u: &FourierField<T>) -> (T, CorrectionTerms<T>) {
        let s = Samples::new(u, Self::quadrature_len(u));
        let two = T::lit(2.0);
        let mut a = T::zero();
        let mut b = T::zero();
        let mut c = T::zero();
        let mut d = T::zero();
        for k in 0..s.len {
            let (v, vx, vxx) = (s.u[k], s.ux[k], s.uxx[k]);
            let n = v.norm_sqr();
            let nx = two * (v.conj() * vx).re;
            let j = two * (v.conj() * vx).im;
            a += (vxx * v.conj()).re * n * n;
            b += n * nx * nx;
            c += n * j * j;
            d += n.powi(5);
        }
        let w = T::TAU() / T::from_usize(s.len).unwrap();
        let sigma: T = self.sigma.value();
        let co = self.coefficients;
        let terms = CorrectionTerms {
            curvature: sigma * T::lit(co.curvature) * a * w,
            gradient: sigma * T::lit(co.gradient) * b * w,
            current: sigma * T::lit(co.current) * c * w,
            potential: T::lit(co.potential) * d * w,
        };
        (terms.total(), terms)
    }

    pub fn e2<T: Real>(&self, u: &FourierField<T>) -> EnergyBreakdown<T> {
        let h2_sq = u.sobolev_norm_sq(T::lit(2.0));
        let (r2, r2_terms) = self.r2(u);
        EnergyBreakdown {
            h2_sq,
            r2_terms,
            r2,
            e2: h2_sq + r2,
            f2: None,
            bound: None,
        }
    }

    /// First variation of `||.||_{H^2}^2` at `u` in direction `v`.
    pub fn h2_directional<T: Real>(u: &FourierField<T>, v: &FourierField<T>) -> Result<T> {
        u.ensure_same_grid(v)?;
        let s: T = u
            .modes_with_coeffs()
            .zip(v.coeffs())
            .map(|((n, a), b)| {
                let w = T::one() + T::from_index(n * n);
                w * w * (a * b.conj()).re
            })
            .sum();
        Ok(T::lit(2.0) * T::TAU() * s)
    }

    /// First variation of `R_2` at `u` in direction `v`, term by term.
    pub fn r2_directional<T: Real>(&self, u: &FourierField<T>, v: &FourierField<T>) -> Result<CorrectionTerms<T>> {
        u.ensure_same_grid(v)?;
        let len = Self::quadrature_len(u);
        let s = Samples::new(u, len);
        let w = Samples::new(v, len);
        let two = T::lit(2.0);
        let (mut da, mut db, mut dc, mut dd) = (T::zero(), T::zero(), T::zero(), T::zero());
        for k in 0..len {
            let (a, ax, axx) = (s.u[k], s.ux[k], s.uxx[k]);
            let (b, bx, bxx) = (w.u[k], w.ux[k], w.uxx[k]);
            let n = a.norm_sqr();
            let dn = two * (a.conj() * b).re;
            let nx = two * (a.conj() * ax).re;
            let dnx = two * (b.conj() * ax + a.conj() * bx).re;
            let j = two * (a.conj() * ax).im;
            let dj = two * (b.conj() * ax + a.conj() * bx).im;
            da += (bxx * a.conj() * (n * n) + axx * b.conj() * (n * n) + axx * a.conj() * (two * n * dn)).re;
            db += dn * nx * nx + two * n * nx * dnx;
            dc += dn * j * j + two * n * j * dj;
            dd += T::lit(5.0) * n.powi(4) * dn;
        }
        let weight = T::TAU() / T::from_usize(len).unwrap();
        let sigma: T = self.sigma.value();
        let co = self.coefficients;
        Ok(CorrectionTerms {
            curvature: sigma * T::lit(co.curvature) * da * weight,
            gradient: sigma * T::lit(co.gradient) * db * weight,
            current: sigma * T::lit(co.current) * dc * weight,
            potential: T::lit(co.potential) * dd * weight,
        })
    }

    /// `lim (E_2(u + eps v) - E_2(u)) / eps`, evaluated analytically.
    pub fn e2_directional<T: Real>(&self, u: &FourierField<T>, v: &FourierField<T>) -> Result<T> {
        Ok(Self::h2_directional(u, v)? + self.r2_directional(u, v)?.total())
    }

    fn check_sigma<T: Real>(&self, p: &FlowParams<T>) -> Result<()> {
        if p.sigma != self.sigma {
            return Err(Error::InvalidParameter(format!(
                "energy built for sigma = {} but flow has sigma = {}",
                self.sigma, p.sigma
            )));
        }
        Ok(())
    }

    /// Projected state and projected velocity `(pi_M u, pi_M rhs(u))`.
    fn projected_motion<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<(FourierField<T>, FourierField<T>)> {
        let v = flow::rhs(u, p)?;
        Ok((p.cutoff.apply(u), p.cutoff.apply(&v)))
    }

    /// `F_2^{(M)}`: the time derivative of `E_2(pi_M u)` along the flow with cutoff `M`.
    pub fn f2<T: Real>(&self, u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
        self.check_sigma(p)?;
        let (um, vm) = Self::projected_motion(u, p)?;
        self.e2_directional(&um, &vm)
    }

    /// Time derivative of `||pi_M u||_{H^2}^2` alone (no corrections).
    pub fn uncorrected_rate<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
        let (um, vm) = Self::projected_motion(u, p)?;
        Self::h2_directional(&um, &vm)
    }

    /// `(1 + ||u||_{H^1}^{m0}) (1 + ||u_x||_{L^4}^4)`, with the quartic
    /// integral computed exactly.
    pub fn smoothing_bound<T: Real>(&self, u: &FourierField<T>) -> T {
        let h1 = u.sobolev_norm_sq(T::one()).sqrt();
        let len = u.grid().quadrature_size(4);
        let l4 = transform::integrate(u.values_on(len, 1).iter().map(|z| z.norm_sqr().powi(2)), len);
        (T::one() + h1.powi(self.m0)) * (T::one() + l4)
    }

    /// `|F_2| / bound`.
    pub fn bound_ratio<T: Real>(&self, u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
        let um = p.cutoff.apply(u);
        Ok(self.f2(u, p)?.abs() / self.smoothing_bound(&um))
    }

    /// `|d/dt ||pi_M u||_{H^2}^2| / bound`.
    pub fn uncorrected_ratio<T: Real>(&self, u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
        let um = p.cutoff.apply(u);
        Ok(Self::uncorrected_rate(u, p)?.abs() / self.smoothing_bound(&um))
    }

    /// Full breakdown including `F_2` and the smoothing bound at `pi_M u`.
    pub fn breakdown<T: Real>(&self, u: &FourierField<T>, p: &FlowParams<T>) -> Result<EnergyBreakdown<T>> {
        let um = p.cutoff.apply(u);
        let mut b = self.e2(&um);
        b.f2 = Some(self.f2(u, p)?);
        b.bound = Some(self.smoothing_bound(&um));
        Ok(b)
    }

    /// `|R_2(u) - R_2(v)| / (||u - v||_{H^1} (1 + ||u||_{H^1}^{m0} + ||v||_{H^1}^{m0}))`,
    /// or `None` when `u = v`.
    pub fn r2_lipschitz_probe<T: Real>(&self, u: &FourierField<T>, v: &FourierField<T>) -> Result<Option<T>> {
        u.ensure_same_grid(v)?;
        let dist = (u - v).sobolev_norm_sq(T::one()).sqrt();
        if dist == T::zero() {
            return Ok(None);
        }
        let nu = u.sobolev_norm_sq(T::one()).sqrt();
        let nv = v.sobolev_norm_sq(T::one()).sqrt();
        let diff = (self.r2(u).0 - self.r2(v).0).abs();
        Ok(Some(diff / (dist * (T::one() + nu.powi(self.m0) + nv.powi(self.m0)))))
    }

    /// `|R_2(pi_M u) - R_2(u)|` for each `M` in a strictly increasing list.
    pub fn r2_truncation_curve<T: Real>(&self, u: &FourierField<T>, cutoffs: &[usize]) -> Result<Vec<T>> {
        if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("cutoff list must be strictly increasing".into()));
        }
        let full = self.r2(u).0;
        Ok(cutoffs
            .iter()
            .map(|&m| (self.r2(&u.project(m)).0 - full).abs())
            .collect())
    }
}

/// `R_2` with the default coefficients.
pub fn r2<T: Real>(u: &FourierField<T>, sigma: Sigma) -> (T, CorrectionTerms<T>) {
    ModifiedEnergy::h2(sigma).r2(u)
}

/// `E_2` breakdown with the default coefficients (no `F_2` or bound).
pub fn e2<T: Real>(u: &FourierField<T>, sigma: Sigma) -> EnergyBreakdown<T> {
    ModifiedEnergy::h2(sigma).e2(u)
}

/// `F_2^{(M)}` with the default coefficients and the flow's sign.
pub fn f2<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<T> {
    ModifiedEnergy::h2(p.sigma).f2(u, p)
}

/// Fills every column of the observable stream and keeps per-checkpoint breakdowns.
#[derive(Clone, Debug)]
pub struct EnergyObserver<T: Real> {
    pub energy: ModifiedEnergy,
    pub params: FlowParams<T>,
    pub rows: Vec<ObservableRow>,
    pub breakdowns: Vec<BreakdownRecord>,
}

impl<T: Real> EnergyObserver<T> {
    pub fn new(params: FlowParams<T>) -> Self {
        Self {
            energy: ModifiedEnergy::h2(params.sigma),
            params,
            rows: Vec::new(),
            breakdowns: Vec::new(),
        }
    }
}

impl<T: Real> Observer<T> for EnergyObserver<T> {
    fn observe(&mut self, t: T, u: &FourierField<T>) -> Result<()> {
        let b = self.energy.breakdown(u, &self.params)?;
        let mut row = ObservableRow::conserved(t, u, self.params.sigma);
        row.h1_sq = Some(u.sobolev_norm_sq(T::one()).to_f64_lossy());
        row.h2_sq = Some(b.h2_sq.to_f64_lossy());
        row.e2 = Some(b.e2.to_f64_lossy());
        row.f2 = b.f2.map(|v| v.to_f64_lossy());
        row.bound = b.bound.map(|v| v.to_f64_lossy());
        self.rows.push(row);
        self.breakdowns.push(b.record(t.to_f64_lossy()));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::flow::{Cutoff, Integrator};
    use crate::spectral::GridSpec;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn field(m: usize, seed: u64, amp: f64) -> FourierField<f64> {
        let mut s = seed.wrapping_add(0x9E3779B97F4A7C15);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 20_000) as f64 / 10_000.0 - 1.0
        };
        FourierField::from_fn(GridSpec::with_modes(m), |n| c(next(), next()) * amp / (1.0 + (n * n) as f64))
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let u = FourierField::<f64>::zeros(GridSpec::with_modes(8));
        let b = e2(&u, Sigma::Defocusing);
        assert_eq!((b.e2, b.r2, b.h2_sq), (0.0, 0.0, 0.0));
        assert_eq!(b.r2_terms, CorrectionTerms::default());
        let e = ModifiedEnergy::h2(Sigma::Defocusing);
        assert_eq!(e.smoothing_bound(&u), 1.0);
        assert_eq!(e.bound_ratio(&u, &FlowParams::rk4(1e-3)).unwrap(), 0.0);
        assert_eq!(e.r2_truncation_curve(&u, &[1, 2, 4]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn plane_wave_values() {
        for n in [1i64, 2, 3] {
            let u = FourierField::plane_wave(GridSpec::with_modes(4), n, c(1.0, 0.0));
            let (r, terms) = r2(&u, Sigma::Defocusing);
            let nn = (n * n) as f64;
            // Re int u_xx conj(u) N^2 = -2 pi n^2, int N J^2 = 8 pi n^2, int N^5 = 2 pi
            assert!((terms.curvature - 4.0 * PI * nn).abs() < 1e-11);
            assert!(terms.gradient.abs() < 1e-11);
            assert!((terms.current - 4.0 * PI * nn).abs() < 1e-11);
            assert!((terms.potential - 8.0 * PI / 15.0).abs() < 1e-12);
            assert!((r - (8.0 * PI * nn + 8.0 * PI / 15.0)).abs() < 1e-10);
        }
        let u = FourierField::plane_wave(GridSpec::with_modes(4), 1, c(1.0, 0.0));
        let b = e2(&u, Sigma::Defocusing);
        assert!((b.h2_sq - 8.0 * PI).abs() < 1e-12);
        assert!((b.e2 - b.h2_sq - b.r2).abs() < 1e-12);
    }

    #[test]
    fn higher_orders_are_rejected() {
        assert!(matches!(ModifiedEnergy::new(2, Sigma::Defocusing), Err(Error::UnsupportedOrder(2))));
        assert!(ModifiedEnergy::new(1, Sigma::Focusing).is_ok());
    }

    #[test]
    fn directional_derivative_basics() {
        let e = ModifiedEnergy::h2(Sigma::Defocusing);
        let u = field(8, 3, 0.7);
        let zero = FourierField::zeros(*u.grid());
        assert_eq!(e.e2_directional(&u, &zero).unwrap(), 0.0);
        let dh = ModifiedEnergy::h2_directional(&u, &u).unwrap();
        assert!((dh - 2.0 * u.sobolev_norm_sq(2.0)).abs() < 1e-12 * dh);
        assert!(e.e2_directional(&u, &field(9, 1, 1.0)).is_err());
    }

    #[test]
    fn directional_derivative_matches_finite_differences() {
        for sigma in [Sigma::Defocusing, Sigma::Focusing] {
            let e = ModifiedEnergy::h2(sigma);
            for seed in 0..10 {
                let u = field(10, seed, 1.0);
                let v = field(10, seed + 100, 1.0);
                let analytic = e.e2_directional(&u, &v).unwrap();
                let central = |eps: f64| (e.e2(&u.add_scaled(eps, &v)).e2 - e.e2(&u.add_scaled(-eps, &v)).e2) / (2.0 * eps);
                let eps = 1e-5;
                let fd = (4.0 * central(eps / 2.0) - central(eps)) / 3.0;
                assert!((analytic - fd).abs() <= 1e-6 * analytic.abs(), "{analytic} vs {fd}");
            }
        }
    }

    #[test]
    fn plane_wave_has_constant_energy() {
        let u = FourierField::plane_wave(GridSpec::with_modes(6), 3, c(1.0, 0.0));
        let p = FlowParams::rk4(1e-3);
        let f = f2(&u, &p).unwrap();
        let scale = 1.0 + e2(&u, Sigma::Defocusing).e2.abs();
        assert!(f.abs() < 1e-9 * scale);
        let e = ModifiedEnergy::h2(Sigma::Defocusing);
        assert!(e.bound_ratio(&u, &p).unwrap() < 1e-9);
    }

    #[test]
    fn energy_is_gauge_and_translation_invariant() {
        let u = field(12, 4, 1.2);
        for sigma in [Sigma::Defocusing, Sigma::Focusing] {
            let e0 = e2(&u, sigma).e2;
            let rotated = u.scale(Complex::from_polar(1.0, 0.83));
            assert!((e2(&rotated, sigma).e2 - e0).abs() < 1e-12 * e0.abs());
            let shifted = u.shift_by_points(5);
            assert!((e2(&shifted, sigma).e2 - e0).abs() < 1e-10 * e0.abs());
        }
    }

    #[test]
    fn sigma_mismatch_is_rejected() {
        let e = ModifiedEnergy::h2(Sigma::Focusing);
        let u = field(4, 2, 1.0);
        assert!(e.f2(&u, &FlowParams::rk4(1e-3)).is_err());
    }

    #[test]
    fn lipschitz_probe() {
        let e = ModifiedEnergy::h2(Sigma::Defocusing);
        let u = field(8, 7, 1.0);
        assert_eq!(e.r2_lipschitz_probe(&u, &u).unwrap(), None);
        let z = FourierField::zeros(*u.grid());
        let q = e.r2_lipschitz_probe(&u, &z).unwrap().unwrap();
        assert!(q.is_finite() && q > 0.0);
    }

    #[test]
    fn truncation_curve() {
        let e = ModifiedEnergy::h2(Sigma::Defocusing);
        let u = field(4, 5, 1.0).regrid(GridSpec::with_modes(16));
        let curve = e.r2_truncation_curve(&u, &[1, 2, 4, 8, 16]).unwrap();
        assert!(curve[0] > 0.0);
        assert_eq!(&curve[2..], &[0.0, 0.0, 0.0]);
        assert!(e.r2_truncation_curve(&u, &[4, 2]).is_err());
    }

    #[test]
    fn observer_fills_every_column() {
        let u = field(6, 9, 0.5);
        let p = FlowParams::new(Sigma::Defocusing, Cutoff::Modes(4), Integrator::Rk4, 1e-3);
        let mut obs = EnergyObserver::new(p);
        flow::evolve(&u, &p, 0.01, 5, &mut [&mut obs]).unwrap();
        assert_eq!(obs.rows.len(), 3);
        let r = obs.rows[1];
        assert!(r.h1_sq.is_some() && r.h2_sq.is_some() && r.e2.is_some() && r.f2.is_some() && r.bound.is_some());
        assert_eq!(obs.breakdowns[0].r2_terms.len(), 4);
    }
}
