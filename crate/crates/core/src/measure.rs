//! Gaussian measures `mu_s`, ensembles with reproducible seeds, scalar
//! observables and two-sample statistics.
//!
//! A sample of `mu_s` truncated at `M` is
//! `u = sum_{|n|<=M} (h_n + i l_n) / (1+n^2)^{s/2} e^{inx}` with independent
//! standard normals `h_n, l_n`, so `E|g_n|^2 = 2`.
//!
//! # Seeds
//!
//! Sample `index` of an ensemble uses the seed
//! `mix(base_seed ^ mix(index + 0x9E3779B97F4A7C15))`, where `mix` is the
//! SplitMix64 finalizer. The seed keys a ChaCha8 stream; normals are drawn
//! with the ziggurat sampler of `rand_distr`, `h_n` then `l_n` for
//! `n = -M, ..., M`. A sample therefore depends only on `(spec, index)` and
//! ensembles may be evaluated in any order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::ModifiedEnergy;
use crate::error::{Error, Result};
use crate::scalar::{Real, Sigma};
use crate::spectral::{FourierField, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// Regularity index.
    pub s: f64,
    /// Highest sampled mode.
    #[serde(rename = "M")]
    pub modes: usize,
    pub base_seed: u64,
}

impl MeasureSpec {
    pub fn new(s: f64, modes: usize, base_seed: u64) -> Self {
        Self { s, modes, base_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("measure index s = {} is not finite", self.s)));
        }
        Ok(())
    }

    pub fn seed(&self, index: u64) -> u64 {
        derive_seed(self.base_seed, index)
    }

    /// `E|u_n|^2 = 2 / (1+n^2)^s`.
    pub fn mode_variance(&self, n: i64) -> f64 {
        2.0 / (1.0 + (n * n) as f64).powf(self.s)
    }

    /// `E ||u||_{L^2}^2 = 2 pi sum_{|n|<=M} 2 / (1+n^2)^s`.
    pub fn expected_mass(&self) -> f64 {
        let m = self.modes as i64;
        std::f64::consts::TAU * (-m..=m).map(|n| self.mode_variance(n)).sum::<f64>()
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-sample seed `mix(base_seed ^ mix(index + 0x9E3779B97F4A7C15))`.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    mix(base_seed ^ mix(index.wrapping_add(0x9E3779B97F4A7C15)))
}

/// Sample `index` of `mu_s` truncated at `spec.modes`, stored on `grid`.
pub fn sample_mu<T: Real>(spec: &MeasureSpec, grid: GridSpec, index: u64) -> Result<FourierField<T>> {
    spec.validate()?;
    if grid.modes < spec.modes {
        return Err(Error::InvalidGrid(format!(
            "grid holds {} modes but the measure samples {}",
            grid.modes, spec.modes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed(index));
    let mut u = FourierField::zeros(grid);
    let m = spec.modes as i64;
    for n in -m..=m {
        let h: f64 = rng.sample(StandardNormal);
        let l: f64 = rng.sample(StandardNormal);
        let w = (1.0 + (n * n) as f64).powf(-spec.s / 2.0);
        let i = grid.index(n);
        u.coeffs_mut()[i] = Complex::new(T::lit(h * w), T::lit(l * w));
    }
    Ok(u)
}

/// Samples `indices` in parallel; the result is in index order.
pub fn sample_ensemble<T: Real>(spec: &MeasureSpec, grid: GridSpec, indices: std::ops::Range<u64>) -> Result<Vec<FourierField<T>>> {
    indices.into_par_iter().map(|i| sample_mu(spec, grid, i)).collect()
}

pub const OBSERVABLE_NAMES: [&str; 6] = ["mass", "h1_sq", "hs_half_eps", "zero_mode_sq", "l6_pow6", "e2"];

/// Scalar observables of one field.
///
/// `hs_half_eps` is `||u||^2_{H^{s-3/4}}`, the norm of the space the measure
/// lives on with `eps = 1/4`; `e2` is the modified energy for `sigma`.
pub fn observables<T: Real>(u: &FourierField<T>, s: f64, sigma: Sigma) -> BTreeMap<String, f64> {
    let len = u.grid().quadrature_size(6);
    let l6 = crate::spectral::transform::integrate(u.values_on(len, 0).iter().map(|z| z.norm_sqr().powi(3)), len);
    let values = [
        u.sobolev_norm_sq(T::zero()),
        u.sobolev_norm_sq(T::one()),
        u.sobolev_norm_sq(T::lit(s - 0.75)),
        u.coeff(0).norm_sqr(),
        l6,
        ModifiedEnergy::h2(sigma).e2(u).e2,
    ];
    OBSERVABLE_NAMES
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), v.to_f64_lossy()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub index: u64,
    pub seed: u64,
    pub observables: BTreeMap<String, f64>,
}

impl EnsembleRecord {
    pub fn new<T: Real>(spec: &MeasureSpec, index: u64, u: &FourierField<T>, sigma: Sigma) -> Self {
        Self {
            index,
            seed: spec.seed(index),
            observables: observables(u, spec.s, sigma),
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.observables.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// One JSON object per line.
pub fn write_records<W: Write>(mut w: W, records: &[EnsembleRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EnsembleRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Column `name` of a record list.
pub fn column(records: &[EnsembleRecord], name: &str) -> Vec<f64> {
    records.iter().map(|r| r.get(name)).collect()
}

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `c(alpha) sqrt((n+m)/(nm))` with
/// `c(alpha) = sqrt(-ln(alpha/2)/2)`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRatio {
    Finite(f64),
    /// Exceedances after, none before.
    Unbounded,
}

impl TailRatio {
    pub fn is_finite(&self) -> bool {
        matches!(self, TailRatio::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            TailRatio::Finite(v) => *v,
            TailRatio::Unbounded => f64::INFINITY,
        }
    }
}

pub const MIN_TAIL_SAMPLES: usize = 100;

/// `P(after > threshold) / P(before > threshold)`, with `0/0 = 1`.
pub fn tail_ratio(before: &[f64], after: &[f64], threshold: f64) -> Result<TailRatio> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch(before.len(), after.len()));
    }
    if before.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "tail ratio needs at least {MIN_TAIL_SAMPLES} samples, got {}",
            before.len()
        )));
    }
    let count = |v: &[f64]| v.iter().filter(|&&x| x > threshold).count();
    let (b, a) = (count(before), count(after));
    Ok(match (a, b) {
        (0, 0) => TailRatio::Finite(1.0),
        (_, 0) => TailRatio::Unbounded,
        _ => TailRatio::Finite(a as f64 / b as f64),
    })
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(1, 2), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
        assert_ne!(derive_seed(1, 2), derive_seed(2, 2));
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = MeasureSpec::new(2.0, 8, 42);
        let g = GridSpec::with_modes(16);
        let a: FourierField<f64> = sample_mu(&spec, g, 5).unwrap();
        let b: FourierField<f64> = sample_mu(&spec, g, 5).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert!(a.modes_with_coeffs().all(|(n, c)| n.abs() <= 8 || c.norm() == 0.0));
        let c: FourierField<f64> = sample_mu(&spec, g, 6).unwrap();
        assert_ne!(a.coeffs(), c.coeffs());
        let ens = sample_ensemble::<f64>(&spec, g, 4..7).unwrap();
        assert_eq!(ens[1].coeffs(), a.coeffs());
    }

    #[test]
    fn small_grid_is_rejected() {
        let spec = MeasureSpec::new(2.0, 8, 42);
        assert!(sample_mu::<f64>(&spec, GridSpec::with_modes(4), 0).is_err());
    }

    #[test]
    fn expected_mass() {
        let spec = MeasureSpec::new(2.0, 1, 0);
        assert!((spec.expected_mass() - 6.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn observables_of_simple_fields() {
        let g = GridSpec::with_modes(4);
        let z = FourierField::<f64>::zeros(g);
        let o = observables(&z, 2.0, Sigma::Defocusing);
        assert_eq!(o.len(), 6);
        assert!(o.values().all(|&v| v == 0.0));
        let u = FourierField::plane_wave(g, 1, Complex::new(1.0, 0.0));
        let o = observables(&u, 2.0, Sigma::Defocusing);
        assert!((o["mass"] - std::f64::consts::TAU).abs() < 1e-12);
        assert_eq!(o["zero_mode_sq"], 0.0);
        assert!((o["l6_pow6"] - std::f64::consts::TAU).abs() < 1e-12);
        let e = ModifiedEnergy::h2(Sigma::Defocusing).e2(&u).e2;
        assert!((o["e2"] - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn ks_trivial_cases() {
        let a = [0.3, 1.2, -0.4];
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0; 3], &[1.0; 3]).unwrap(), 1.0);
        assert!(matches!(ks_statistic(&[], &a), Err(Error::EmptySample)));
        assert!((ks_critical_value(1000, 1000, 0.05) - 1.3581 * (0.002f64).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn tail_ratio_conventions() {
        let before: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(tail_ratio(&before, &before, 89.5).unwrap(), TailRatio::Finite(1.0));
        assert_eq!(tail_ratio(&before, &before, 1e3).unwrap(), TailRatio::Finite(1.0));
        let after: Vec<f64> = before.iter().map(|x| x + 1e3).collect();
        assert_eq!(tail_ratio(&before, &after, 500.0).unwrap(), TailRatio::Unbounded);
        assert!(matches!(tail_ratio(&before, &after[..99], 1.0), Err(Error::LengthMismatch(100, 99))));
        assert!(tail_ratio(&before[..50], &after[..50], 1.0).is_err());
    }

    #[test]
    fn records_round_trip() {
        let spec = MeasureSpec::new(2.0, 4, 7);
        let g = GridSpec::with_modes(4);
        let recs: Vec<_> = (0..3)
            .map(|i| EnsembleRecord::new(&spec, i, &sample_mu::<f64>(&spec, g, i).unwrap(), Sigma::Defocusing))
            .collect();
        let dir = std::env::temp_dir().join(format!("qnls-records-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("e.jsonl");
        write_records(std::fs::File::create(&path).unwrap(), &recs).unwrap();
        assert_eq!(read_records(&path).unwrap(), recs);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn quantile_interpolates() {
        let v = [3.0, 1.0, 2.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&v, 0.9).unwrap(), 4.6);
    }
}
