//! Linear, full and Galerkin-truncated quintic Schrödinger flows.
//!
//! The equation is `(i d_t + d_x^2) u = sigma pi_M(|pi_M u|^4 pi_M u)`, i.e.
//! `d_t u = i u_xx - i sigma pi_M(|pi_M u|^4 pi_M u)`. With [`Cutoff::Full`]
//! both projectors are dropped (the grid's own truncation to `M_g` remains).

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Sigma};
use crate::spectral::{transform, FourierField};

/// Galerkin cutoff `M` of the truncated flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cutoff {
    #[serde(with = "full_literal")]
    Full,
    Modes(usize),
}

mod full_literal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("full")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s.eq_ignore_ascii_case("full") {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected \"full\" or an integer, got {s:?}")))
        }
    }
}

impl Cutoff {
    /// Projects onto the cutoff (identity for `Full`).
    pub fn apply<T: Real>(self, u: &FourierField<T>) -> FourierField<T> {
        match self {
            Cutoff::Full => u.clone(),
            Cutoff::Modes(m) => u.project(m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta on the coefficient ODE.
    Rk4,
    /// Half linear step, exact pointwise phase rotation, half linear step.
    Strang,
}

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams<T: Real> {
    pub sigma: Sigma,
    pub cutoff: Cutoff,
    pub integrator: Integrator,
    pub dt: T,
    /// Cap on `||u||_{H^1}`.
    pub blowup_threshold: T,
}

impl<T: Real> FlowParams<T> {
    pub fn new(sigma: Sigma, cutoff: Cutoff, integrator: Integrator, dt: T) -> Self {
        Self {
            sigma,
            cutoff,
            integrator,
            dt,
            blowup_threshold: T::lit(DEFAULT_BLOWUP_THRESHOLD),
        }
    }

    /// Defocusing, untruncated, rk4.
    pub fn rk4(dt: T) -> Self {
        Self::new(Sigma::Defocusing, Cutoff::Full, Integrator::Rk4, dt)
    }

    pub fn with_sigma(mut self, sigma: Sigma) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.blowup_threshold > T::zero()) {
            return Err(Error::InvalidParameter("blowup_threshold must be positive".into()));
        }
        if let Cutoff::Modes(m) = self.cutoff {
            if m > modes {
                return Err(Error::InvalidParameter(format!(
                    "cutoff {m} exceeds grid modes {modes}"
                )));
            }
        }
        if self.integrator == Integrator::Strang && self.cutoff != Cutoff::Full {
            return Err(Error::StrangNeedsFullCutoff);
        }
        Ok(())
    }
}

/// Exact free evolution: coefficient `n` times `e^{-i t n^2}`.
pub fn linear_flow<T: Real>(u0: &FourierField<T>, t: T) -> FourierField<T> {
    FourierField::from_fn(*u0.grid(), |n| {
        u0.coeff(n) * Complex::from_polar(T::one(), -t * T::from_index(n * n))
    })
}

/// Time derivative `i u_xx - i sigma pi_M(|pi_M u|^4 pi_M u)`.
pub fn rhs<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<FourierField<T>> {
    let nonlinear = match p.cutoff {
        Cutoff::Full => u.quintic()?,
        Cutoff::Modes(m) => u.project(m).quintic()?.project(m),
    };
    let sigma: T = p.sigma.value();
    Ok(FourierField::from_fn(*u.grid(), |n| {
        let lin = u.coeff(n) * T::from_index(n * n);
        let q = nonlinear.coeff(n) * sigma;
        // -i (n^2 u_n + sigma q_n)
        let s = lin + q;
        Complex::new(s.im, -s.re)
    }))
}

fn rk4_step<T: Real>(u: &FourierField<T>, p: &FlowParams<T>, h: T) -> Result<FourierField<T>> {
    let half = h / T::lit(2.0);
    let k1 = rhs(u, p)?;
    let k2 = rhs(&u.add_scaled(half, &k1), p)?;
    let k3 = rhs(&u.add_scaled(half, &k2), p)?;
    let k4 = rhs(&u.add_scaled(h, &k3), p)?;
    let sixth = h / T::lit(6.0);
    let third = h / T::lit(3.0);
    Ok(u
        .add_scaled(sixth, &k1)
        .add_scaled(third, &k2)
        .add_scaled(third, &k3)
        .add_scaled(sixth, &k4))
}

fn strang_step<T: Real>(u: &FourierField<T>, p: &FlowParams<T>, h: T) -> Result<FourierField<T>> {
    if p.cutoff != Cutoff::Full {
        return Err(Error::StrangNeedsFullCutoff);
    }
    let grid = *u.grid();
    let pad = grid.quintic_pad()?;
    let sigma: T = p.sigma.value();
    let half = linear_flow(u, h / T::lit(2.0));
    let values: Vec<Complex<T>> = half
        .values_on(pad, 0)
        .into_iter()
        .map(|v| {
            let n = v.norm_sqr();
            v * Complex::from_polar(T::one(), -sigma * n * n * h)
        })
        .collect();
    let rotated = FourierField::from_coeffs(grid, transform::analyze(values, grid.modes))?;
    Ok(linear_flow(&rotated, h / T::lit(2.0)))
}

/// Single step of length `h` without the guard check.
fn advance<T: Real>(u: &FourierField<T>, p: &FlowParams<T>, h: T) -> Result<FourierField<T>> {
    match p.integrator {
        Integrator::Rk4 => rk4_step(u, p, h),
        Integrator::Strang => strang_step(u, p, h),
    }
}

fn check_guard<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<()> {
    let norm = u.sobolev_norm_sq(T::one()).sqrt();
    if !norm.is_finite() || norm >= p.blowup_threshold {
        return Err(Error::GuardTripped {
            norm: norm.to_f64_lossy(),
            threshold: p.blowup_threshold.to_f64_lossy(),
        });
    }
    Ok(())
}

/// One step of size `p.dt` with the configured scheme.
///
/// Fails with [`Error::GuardTripped`] if `||u||_{H^1}` is at or above the
/// blow-up guard, either before or after the step.
pub fn step<T: Real>(u: &FourierField<T>, p: &FlowParams<T>) -> Result<FourierField<T>> {
    p.validate(u.grid().modes)?;
    check_guard(u, p)?;
    let next = advance(u, p, p.dt)?;
    check_guard(&next, p)?;
    Ok(next)
}

/// Callback invoked along a trajectory.
pub trait Observer<T: Real> {
    fn observe(&mut self, t: T, u: &FourierField<T>) -> Result<()>;
}

impl<T: Real, F: FnMut(T, &FourierField<T>)> Observer<T> for F {
    fn observe(&mut self, t: T, u: &FourierField<T>) -> Result<()> {
        self(t, u);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowUpEvent {
    pub time: f64,
    pub norm: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    /// Strictly increasing recording times.
    pub times: Vec<T>,
    pub states: Vec<FourierField<T>>,
    /// Set when a focusing run stopped at the blow-up guard.
    pub blowup: Option<BlowUpEvent>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &FourierField<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory holds at least the initial time")
    }
}

/// Integrates from `0` to `t_end`, recording the state and calling the
/// observers at `t = 0`, every `stride` steps, and at the final time.
///
/// The last step is shortened so the run lands exactly on `t_end`. A guard
/// trip in a focusing run ends the trajectory early and is recorded in
/// [`Trajectory::blowup`]; in a defocusing run it is an error.
pub fn evolve<T: Real>(
    u0: &FourierField<T>,
    p: &FlowParams<T>,
    t_end: T,
    stride: usize,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<Trajectory<T>> {
    p.validate(u0.grid().modes)?;
    if !(t_end > T::zero()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let stride = stride.max(1);
    let ratio = (t_end / p.dt).to_f64_lossy();
    let mut full_steps = ratio.floor() as usize;
    let mut last = t_end - T::from_usize(full_steps).unwrap() * p.dt;
    // Treat a remainder at rounding level as no remainder.
    if last <= p.dt * T::lit(1e-9) {
        last = T::zero();
    } else if last >= p.dt * (T::one() - T::lit(1e-9)) {
        full_steps += 1;
        last = T::zero();
    }
    let total = full_steps + usize::from(last > T::zero());

    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![u0.clone()],
        blowup: None,
    };
    for obs in observers.iter_mut() {
        obs.observe(T::zero(), u0)?;
    }

    let mut u = u0.clone();
    let mut t = T::zero();
    for k in 1..=total {
        let h = if k <= full_steps { p.dt } else { last };
        let guarded = check_guard(&u, p)
            .and_then(|_| advance(&u, p, h))
            .map_err(|e| match e {
                // an overflowing stage is a guard trip, not a numerical bug
                Error::NonFinite(_) => Error::GuardTripped {
                    norm: f64::INFINITY,
                    threshold: p.blowup_threshold.to_f64_lossy(),
                },
                e => e,
            })
            .and_then(|next| {
            check_guard(&next, p)?;
            Ok(next)
        });
        let next = match guarded {
            Ok(next) => next,
            Err(Error::GuardTripped { norm, threshold }) => {
                let time = t.to_f64_lossy();
                if p.sigma == Sigma::Focusing {
                    traj.blowup = Some(BlowUpEvent {
                        time,
                        norm,
                        threshold,
                    });
                    if *traj.times.last().unwrap() < t {
                        traj.times.push(t);
                        traj.states.push(u.clone());
                    }
                    return Ok(traj);
                }
                return Err(Error::BlowUp {
                    time,
                    norm,
                    threshold,
                });
            }
            Err(e) => return Err(e),
        };
        u = next;
        t = if k == total { t_end } else { T::from_usize(k).unwrap() * p.dt };
        if k % stride == 0 || k == total {
            traj.times.push(t);
            traj.states.push(u.clone());
            for obs in observers.iter_mut() {
                obs.observe(t, &u)?;
            }
        }
    }
    Ok(traj)
}

/// `int |u|^2 dx`.
pub fn mass<T: Real>(u: &FourierField<T>) -> T {
    u.sobolev_norm_sq(T::zero())
}

/// `2 Im int conj(u) u_x dx = 4 pi sum_n n |u_n|^2`.
pub fn momentum<T: Real>(u: &FourierField<T>) -> T {
    let s: T = u
        .modes_with_coeffs()
        .map(|(n, c)| T::from_index(n) * c.norm_sqr())
        .sum();
    T::lit(2.0) * T::TAU() * s
}

/// `(1/2) int |u_x|^2 + (sigma / 6) int |u|^6`, the sextic integral computed exactly.
pub fn hamiltonian<T: Real>(u: &FourierField<T>, sigma: Sigma) -> T {
    let kinetic: T = u
        .modes_with_coeffs()
        .map(|(n, c)| T::from_index(n * n) * c.norm_sqr())
        .sum::<T>()
        * T::TAU();
    let len = u.grid().quadrature_size(6);
    let l6 = transform::integrate(u.values_on(len, 0).iter().map(|v| v.norm_sqr().powi(3)), len);
    kinetic / T::lit(2.0) + sigma.value::<T>() * l6 / T::lit(6.0)
}

/// One row of the trajectory observable stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub time: f64,
    pub mass: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
    pub h1_sq: Option<f64>,
    pub h2_sq: Option<f64>,
    pub e2: Option<f64>,
    pub f2: Option<f64>,
    pub bound: Option<f64>,
}

pub const OBSERVABLE_COLUMNS: [&str; 9] = [
    "time",
    "mass",
    "momentum",
    "hamiltonian",
    "h1_sq",
    "h2_sq",
    "e2",
    "f2",
    "bound",
];

impl ObservableRow {
    pub fn conserved<T: Real>(t: T, u: &FourierField<T>, sigma: Sigma) -> Self {
        Self {
            time: t.to_f64_lossy(),
            mass: mass(u).to_f64_lossy(),
            momentum: momentum(u).to_f64_lossy(),
            hamiltonian: hamiltonian(u, sigma).to_f64_lossy(),
            ..Default::default()
        }
    }
}

/// Records mass, momentum and Hamiltonian; energy columns stay empty.
#[derive(Clone, Debug)]
pub struct ConservationObserver {
    pub sigma: Sigma,
    pub rows: Vec<ObservableRow>,
}

impl ConservationObserver {
    pub fn new(sigma: Sigma) -> Self {
        Self {
            sigma,
            rows: Vec::new(),
        }
    }
}

impl<T: Real> Observer<T> for ConservationObserver {
    fn observe(&mut self, t: T, u: &FourierField<T>) -> Result<()> {
        self.rows.push(ObservableRow::conserved(t, u, self.sigma));
        Ok(())
    }
}

/// Writes rows as CSV with the nine documented columns; missing values are empty cells.
pub fn write_observables_csv<W: Write>(w: W, rows: &[ObservableRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(OBSERVABLE_COLUMNS)?;
    for r in rows {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        wtr.write_record([
            format!("{:e}", r.time),
            format!("{:e}", r.mass),
            format!("{:e}", r.momentum),
            format!("{:e}", r.hamiltonian),
            opt(r.h1_sq),
            opt(r.h2_sq),
            opt(r.e2),
            opt(r.f2),
            opt(r.bound),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::GridSpec;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn smooth(g: GridSpec) -> FourierField<f64> {
        FourierField::from_fn(g, |n| {
            let k = n as f64;
            c((0.7 * k + 0.3).cos(), (1.3 * k - 0.2).sin()) * (-k.abs()).exp() * 0.8
        })
    }

    #[test]
    fn linear_flow_examples() {
        let g = GridSpec::with_modes(4);
        let u = smooth(g);
        assert_eq!(linear_flow(&u, 0.0), u);
        let e2 = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        let t = 0.37;
        let exact = FourierField::plane_wave(g, 2, Complex::from_polar(1.0, -4.0 * t));
        assert!(linear_flow(&e2, t).max_coeff_diff(&exact) < 1e-15);
        let two = linear_flow(&linear_flow(&u, 0.4), 1.1);
        assert!(two.max_coeff_diff(&linear_flow(&u, 1.5)) < 1e-12);
        assert!((linear_flow(&u, 2.3).sobolev_norm_sq(3.0) - u.sobolev_norm_sq(3.0)).abs() < 1e-10);
    }

    #[test]
    fn rhs_examples() {
        let g = GridSpec::with_modes(4);
        let p = FlowParams::rk4(1e-3);
        assert_eq!(rhs(&FourierField::zeros(g), &p).unwrap().max_abs_coeff(), 0.0);
        let n = 3;
        let u = FourierField::plane_wave(g, n, c(1.0, 0.0));
        let expected = FourierField::plane_wave(g, n, c(0.0, -((n * n + 1) as f64)));
        assert!(rhs(&u, &p).unwrap().max_coeff_diff(&expected) < 1e-12);
        let high = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        let truncated = p.with_cutoff(Cutoff::Modes(1));
        let expected = FourierField::plane_wave(g, 2, c(0.0, -4.0));
        assert!(rhs(&high, &truncated).unwrap().max_coeff_diff(&expected) < 1e-14);
    }

    #[test]
    fn step_of_zero_is_zero() {
        let g = GridSpec::with_modes(8);
        let p = FlowParams::rk4(1e-2);
        assert_eq!(step(&FourierField::zeros(g), &p).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn rk4_mass_drift_single_step() {
        let g = GridSpec::with_modes(32);
        let u = smooth(g);
        let p = FlowParams::rk4(1e-3);
        let v = step(&u, &p).unwrap();
        assert!((mass(&v) - mass(&u)).abs() < 1e-10 * mass(&u));
    }

    #[test]
    fn strang_rejects_truncated_cutoff() {
        let g = GridSpec::with_modes(8);
        let p = FlowParams::new(Sigma::Defocusing, Cutoff::Modes(4), Integrator::Strang, 1e-3);
        assert!(matches!(step(&smooth(g), &p), Err(Error::StrangNeedsFullCutoff)));
    }

    #[test]
    fn strang_solves_plane_wave_exactly() {
        let g = GridSpec::with_modes(8);
        let u = FourierField::plane_wave(g, 2, c(1.0, 0.0));
        let p = FlowParams::new(Sigma::Defocusing, Cutoff::Full, Integrator::Strang, 0.01);
        let traj = evolve(&u, &p, 0.5, 10, &mut []).unwrap();
        let exact = FourierField::plane_wave(g, 2, Complex::from_polar(1.0, -5.0 * 0.5));
        assert!(traj.final_state().max_coeff_diff(&exact) < 1e-12);
    }

    #[test]
    fn guard_trips() {
        let g = GridSpec::with_modes(4);
        let u = FourierField::plane_wave(g, 1, c(10.0, 0.0));
        let p = FlowParams::rk4(1e-3).with_threshold(5.0);
        assert!(matches!(step(&u, &p), Err(Error::GuardTripped { .. })));
        assert!(matches!(
            evolve(&u, &p, 1.0, 1, &mut []),
            Err(Error::BlowUp { time, .. }) if time == 0.0
        ));
        let focusing = p.with_sigma(Sigma::Focusing);
        let traj = evolve(&u, &focusing, 1.0, 1, &mut []).unwrap();
        assert_eq!(traj.blowup.unwrap().time, 0.0);
    }

    #[test]
    fn evolve_lands_on_t_end() {
        let g = GridSpec::with_modes(4);
        let u = smooth(g);
        let p = FlowParams::rk4(0.03);
        let mut seen = Vec::new();
        let mut obs = |t: f64, _: &FourierField<f64>| seen.push(t);
        let traj = evolve(&u, &p, 0.1, 2, &mut [&mut obs]).unwrap();
        assert_eq!(traj.final_time(), 0.1);
        // t = 0, after step 2, and the final partial step 4
        assert_eq!(seen.len(), 3);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert!(evolve(&u, &p, 0.0, 1, &mut []).is_err());
    }

    #[test]
    fn invariants_of_plane_wave() {
        let g = GridSpec::with_modes(4);
        let u = FourierField::plane_wave(g, 3, c(1.0, 0.0));
        assert!((mass(&u) - 2.0 * PI).abs() < 1e-12);
        assert!((momentum(&u) - 12.0 * PI).abs() < 1e-12);
        assert!((hamiltonian(&u, Sigma::Defocusing) - (9.0 * PI + PI / 3.0)).abs() < 1e-12);
        let z = FourierField::<f64>::zeros(g);
        assert_eq!((mass(&z), momentum(&z), hamiltonian(&z, Sigma::Focusing)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn momentum_matches_quadrature() {
        let g = GridSpec::with_modes(6);
        let u = smooth(g);
        let len = 64;
        let v = u.values_on(len, 0);
        let dv = u.values_on(len, 1);
        let q = transform::integrate(v.iter().zip(&dv).map(|(a, b)| 2.0 * (a.conj() * b).im), len);
        assert!((q - momentum(&u)).abs() < 1e-12);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_observables_csv(&mut buf, &[ObservableRow::default()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,mass,momentum,hamiltonian,h1_sq,h2_sq,e2,f2,bound\n"));
    }

    #[test]
    fn cutoff_serde() {
        let full: Cutoff = serde_json::from_str("\"full\"").unwrap();
        assert_eq!(full, Cutoff::Full);
        let m: Cutoff = serde_json::from_str("16").unwrap();
        assert_eq!(m, Cutoff::Modes(16));
        assert!(serde_json::from_str::<Cutoff>("\"half\"").is_err());
    }
}
