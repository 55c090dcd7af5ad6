//! The nine experiments. Each writes its data files through a [`Context`]
//! and returns an [`Outcome`] with named checks and measured statistics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qnls::{Complex, Field, GridSpec};

use crate::config::{Experiment, ExperimentConfig};

pub mod conservation;
pub mod continuity;
pub mod focusing_local;
pub mod growth;
pub mod linear_invariance;
pub mod plane_wave_order;
pub mod smoothing_sweep;
pub mod transport_mc;
pub mod truncation_convergence;

/// One pass/fail comparison of a measured value against a threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: Value,
    pub threshold: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, measured: impl Serialize, threshold: impl Serialize) -> Self {
        Self {
            name: name.into(),
            passed,
            measured: serde_json::to_value(measured).unwrap_or(Value::Null),
            threshold: serde_json::to_value(threshold).unwrap_or(Value::Null),
        }
    }

    /// `measured < limit`.
    pub fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured < limit, finite_or_null(measured), limit)
    }
}

fn finite_or_null(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub statistics: Map<String, Value>,
    /// Expected events that are not failures (e.g. a guard trip on large data).
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn stat(&mut self, key: &str, v: impl Serialize) {
        self.statistics
            .insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Output directory plus the list of files written into it.
pub struct Context {
    pub dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Context {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Relative paths of the files written so far, in write order.
    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        if !self.files.iter().any(|p| p == Path::new(name)) {
            self.files.push(PathBuf::from(name));
        }
        Ok(BufWriter::new(f))
    }

    /// CSV with a header row; numbers in shortest round-trip form.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

/// Files each experiment is expected to produce.
pub fn expected_files(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::Conservation => &["observables.csv", "summary.json"],
        Experiment::PlaneWaveOrder => &["order.csv", "summary.json"],
        Experiment::Continuity => &["residuals.csv", "densities.csv", "summary.json"],
        Experiment::LinearInvariance => &["ensemble.jsonl", "ks.csv", "summary.json"],
        Experiment::SmoothingSweep => &["sweep.csv", "samples.csv", "perturbations.csv", "summary.json"],
        Experiment::Growth => &["observables.csv", "energy.jsonl", "summary.json"],
        Experiment::TransportMc => &["ensemble.jsonl", "tails.csv", "summary.json"],
        Experiment::TruncationConvergence => &["truncation.csv", "lipschitz.csv", "flow_convergence.csv", "summary.json"],
        Experiment::FocusingLocal => &["local_times.csv", "summary.json"],
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let mut out = match cfg.experiment {
        Experiment::Conservation => conservation::run(cfg, ctx),
        Experiment::PlaneWaveOrder => plane_wave_order::run(cfg, ctx),
        Experiment::Continuity => continuity::run(cfg, ctx),
        Experiment::LinearInvariance => linear_invariance::run(cfg, ctx),
        Experiment::SmoothingSweep => smoothing_sweep::run(cfg, ctx),
        Experiment::Growth => growth::run(cfg, ctx),
        Experiment::TransportMc => transport_mc::run(cfg, ctx),
        Experiment::TruncationConvergence => truncation_convergence::run(cfg, ctx),
        Experiment::FocusingLocal => focusing_local::run(cfg, ctx),
    }?;
    out.stat("passed", out.passed());
    ctx.write_json("summary.json", &out)?;
    Ok(out)
}

/// Deterministic smooth data `a e^{-|n|/w} (1 + sign(n)/2) e^{0.7 i n}`; the
/// asymmetry gives it nonzero momentum.
pub fn smooth_field(grid: GridSpec, amplitude: f64, width: f64) -> Field {
    Field::from_fn(grid, |n| {
        let tilt = 1.0 + 0.5 * (n.signum() as f64);
        Complex::from_polar(amplitude * (-(n.abs() as f64) / width).exp() * tilt, 0.7 * n as f64)
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `log2 y` against `log2 x`.
pub fn log2_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    fit_slope(&lx, &ly)
}

pub fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        assert!((log2_slope(&x, &y) - 2.0).abs() < 1e-12);
        assert!((fit_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_outcome_does_not_pass() {
        let mut o = Outcome::default();
        assert!(!o.passed());
        o.check(Check::below("x", 0.5, 1.0));
        assert!(o.passed());
        o.check(Check::below("y", f64::NAN, 1.0));
        assert!(!o.passed());
        assert_eq!(o.failed_checks(), vec!["y"]);
    }
}
