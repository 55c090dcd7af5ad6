//! Experiment configuration.
//!
//! A config is a single TOML file describing one experiment. Only
//! `experiment` is required; every other key falls back to that experiment's
//! defaults (see [`ExperimentConfig::defaults`]). Unknown keys are rejected.
//!
//! ```toml
//! experiment = "smoothing_sweep"
//! output_dir = "out/smoothing"
//! ensemble_size = 64
//! m_sweep = [16, 32, 64, 128]
//!
//! [grid]
//! modes = 128
//! phys_size = 270
//! pad_rule = "exact_quintic"
//!
//! [flow]
//! sigma = 1            # +1 defocusing, -1 focusing
//! cutoff = "full"      # or an integer M
//! integrator = "rk4"   # or "strang"
//! dt = 1e-4
//! blowup_threshold = 1000.0
//!
//! [measure]
//! s = 2.0
//! M = 128
//! base_seed = 1
//!
//! [thresholds]
//! ratio_factor = 2.0
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qnls::{Cutoff, GridSpec, Integrator, MeasureSpec, Params, Sigma};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Conservation,
    PlaneWaveOrder,
    Continuity,
    LinearInvariance,
    SmoothingSweep,
    Growth,
    TransportMc,
    TruncationConvergence,
    FocusingLocal,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Conservation,
        Experiment::PlaneWaveOrder,
        Experiment::Continuity,
        Experiment::LinearInvariance,
        Experiment::SmoothingSweep,
        Experiment::Growth,
        Experiment::TransportMc,
        Experiment::TruncationConvergence,
        Experiment::FocusingLocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Conservation => "conservation",
            Experiment::PlaneWaveOrder => "plane_wave_order",
            Experiment::Continuity => "continuity",
            Experiment::LinearInvariance => "linear_invariance",
            Experiment::SmoothingSweep => "smoothing_sweep",
            Experiment::Growth => "growth",
            Experiment::TransportMc => "transport_mc",
            Experiment::TruncationConvergence => "truncation_convergence",
            Experiment::FocusingLocal => "focusing_local",
        }
    }

    /// Whether the experiment samples from a Gaussian measure.
    pub fn uses_measure(self) -> bool {
        !matches!(
            self,
            Experiment::Conservation | Experiment::PlaneWaveOrder | Experiment::FocusingLocal
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub sigma: Sigma,
    pub cutoff: Cutoff,
    pub integrator: Integrator,
    pub dt: f64,
    pub blowup_threshold: f64,
}

impl FlowSection {
    pub fn params(&self) -> Params {
        Params::new(self.sigma, self.cutoff, self.integrator, self.dt).with_threshold(self.blowup_threshold)
    }
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            sigma: Sigma::Defocusing,
            cutoff: Cutoff::Full,
            integrator: Integrator::Rk4,
            dt: 1e-3,
            blowup_threshold: qnls::flow::DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

/// Verdict thresholds. Each experiment reads the ones it needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative drift of mass, momentum and Hamiltonian.
    pub drift: f64,
    /// Accepted range of the measured convergence order.
    pub order_min: f64,
    pub order_max: f64,
    /// Scaled pointwise identity and `J_0` residuals.
    pub identity: f64,
    /// Scaled continuity residuals.
    pub continuity: f64,
    /// Allowed spread (max/min) of a cutoff-uniform quantity across the sweep.
    pub ratio_factor: f64,
    /// Minimum log2-log2 slope of the uncorrected ratio.
    pub uncorrected_slope: f64,
    /// Relative size of the coefficient perturbations.
    pub perturbation: f64,
    pub ks_alpha: f64,
    /// Tail threshold as a quantile of the initial ensemble.
    pub tail_quantile: f64,
    /// Standard errors of slack in the linear tail-growth check.
    pub tail_slack: f64,
    /// Final/initial value of the truncation curve.
    pub truncation_drop: f64,
    /// Relative change of the Lipschitz probe under regridding.
    pub grid_stability: f64,
    /// `H^1` radius of the Lipschitz probe pairs.
    pub lipschitz_radius: f64,
    /// Fraction of the run used to fit the linear energy bound.
    pub growth_fit_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            drift: 1e-8,
            order_min: 3.7,
            order_max: 4.3,
            identity: 1e-9,
            continuity: 1e-8,
            ratio_factor: 2.0,
            uncorrected_slope: 1.0,
            perturbation: 0.1,
            ks_alpha: 0.05,
            tail_quantile: 0.9,
            tail_slack: 3.0,
            truncation_drop: 1e-3,
            grid_stability: 1e-8,
            lipschitz_radius: 5.0,
            growth_fit_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub t_end: f64,
    /// Steps between recorded checkpoints.
    pub stride: usize,
    pub ensemble_size: usize,
    /// Galerkin cutoffs swept by the experiment.
    pub m_sweep: Vec<usize>,
    /// Cutoffs of the truncated flows compared with the full flow (truncation_convergence).
    pub flow_sweep: Vec<usize>,
    /// Evaluation times (linear_invariance, transport_mc).
    pub times: Vec<f64>,
    /// `||u_0||_{H^{7/4}}` values (focusing_local); the last one is expected to trip the guard.
    pub amplitudes: Vec<f64>,
    /// Plane-wave mode (plane_wave_order).
    pub wavenumber: i64,
    /// Number of dt halvings (plane_wave_order).
    pub refinements: usize,
    pub grid: GridSpec,
    pub flow: FlowSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let measure = |s: f64, modes: usize| Some(MeasureSpec::new(s, modes, 20_240_601));
        let mut c = Self {
            experiment,
            output_dir: PathBuf::from("out").join(experiment.name()),
            workers: 0,
            t_end: 1.0,
            stride: 100,
            ensemble_size: 0,
            m_sweep: Vec::new(),
            flow_sweep: Vec::new(),
            times: Vec::new(),
            amplitudes: Vec::new(),
            wavenumber: 3,
            refinements: 3,
            grid: GridSpec::with_modes(32),
            flow: FlowSection::default(),
            measure: None,
            thresholds: Thresholds::default(),
        };
        match experiment {
            Experiment::Conservation => {}
            Experiment::PlaneWaveOrder => {
                c.grid = GridSpec::with_modes(4);
                c.flow.dt = 0.02;
            }
            Experiment::Continuity => {
                c.grid = GridSpec::with_modes(64);
                c.ensemble_size = 1000;
                c.measure = measure(1.0, 64);
            }
            Experiment::LinearInvariance => {
                c.ensemble_size = 1000;
                c.times = vec![0.1, 1.0, PI, 1.0 + 2f64.sqrt()];
                c.measure = measure(2.0, 32);
            }
            Experiment::SmoothingSweep => {
                c.grid = GridSpec::with_modes(128);
                c.ensemble_size = 64;
                c.m_sweep = vec![16, 32, 64, 128];
                c.measure = measure(2.0, 128);
            }
            Experiment::Growth => {
                c.t_end = 200.0;
                c.stride = 2000;
                c.measure = measure(2.0, 32);
            }
            Experiment::TransportMc => {
                c.ensemble_size = 256;
                c.times = vec![0.25, 0.5];
                c.measure = measure(2.0, 32);
            }
            Experiment::TruncationConvergence => {
                c.grid = GridSpec::with_modes(256);
                c.ensemble_size = 1000;
                c.m_sweep = vec![1, 2, 4, 8, 16, 32, 64, 128];
                c.flow_sweep = vec![8, 16, 32, 64];
                c.times = vec![1.0];
                c.flow.dt = 1e-4;
                c.measure = measure(2.0, 256);
            }
            Experiment::FocusingLocal => {
                c.flow.sigma = Sigma::Focusing;
                c.flow.dt = 1e-4;
                c.amplitudes = vec![0.5, 1.0, 2.0, 200.0];
            }
        }
        c
    }

    /// Parses TOML text, filling missing keys from the experiment's defaults.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let exp = match user.get("experiment") {
            Some(toml::Value::String(s)) => s.parse::<Experiment>().map_err(ConfigError::Parse)?,
            Some(_) => return Err(ConfigError::Parse("`experiment` must be a string".into())),
            None => return Err(ConfigError::Parse("missing `experiment`".into())),
        };
        let mut merged = toml::Table::try_from(Self::defaults(exp)).map_err(|e| ConfigError::Parse(e.to_string()))?;
        merge(&mut merged, user);
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn measure(&self) -> MeasureSpec {
        self.measure.expect("validated config has a measure")
    }

    /// Field-level diagnostics for every invalid setting.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        if let Err(e) = self.grid.validate() {
            check(false, format!("grid: {e}"));
        }
        if let Err(e) = self.flow.params().validate(self.grid.modes) {
            check(false, format!("flow: {e}"));
        }
        check(self.t_end > 0.0 && self.t_end.is_finite(), format!("t_end: must be positive, got {}", self.t_end));
        check(self.stride >= 1, "stride: must be at least 1".into());
        check(
            self.m_sweep.windows(2).all(|w| w[0] < w[1]),
            format!("m_sweep: must be strictly increasing, got {:?}", self.m_sweep),
        );
        check(
            self.times.iter().all(|t| t.is_finite()),
            "times: must be finite".into(),
        );
        let th = &self.thresholds;
        for (name, v) in [
            ("drift", th.drift),
            ("identity", th.identity),
            ("continuity", th.continuity),
            ("ratio_factor", th.ratio_factor),
            ("perturbation", th.perturbation),
            ("truncation_drop", th.truncation_drop),
            ("grid_stability", th.grid_stability),
            ("lipschitz_radius", th.lipschitz_radius),
        ] {
            check(v > 0.0 && v.is_finite(), format!("thresholds.{name}: must be positive, got {v}"));
        }
        check(th.order_min <= th.order_max, "thresholds.order_min: exceeds order_max".into());
        for (name, v) in [
            ("ks_alpha", th.ks_alpha),
            ("tail_quantile", th.tail_quantile),
            ("growth_fit_fraction", th.growth_fit_fraction),
        ] {
            check(v > 0.0 && v < 1.0, format!("thresholds.{name}: must lie in (0, 1), got {v}"));
        }
        let exp = self.experiment;
        if exp.uses_measure() {
            match &self.measure {
                None => check(false, format!("measure: required by {exp}")),
                Some(m) => {
                    if let Err(e) = m.validate() {
                        check(false, format!("measure: {e}"));
                    }
                    check(
                        m.modes <= self.grid.modes,
                        format!("measure.M: {} exceeds grid.modes {}", m.modes, self.grid.modes),
                    );
                }
            }
        }
        let need_sweep = matches!(exp, Experiment::SmoothingSweep | Experiment::TruncationConvergence);
        if need_sweep {
            check(self.m_sweep.len() >= 2, "m_sweep: needs at least two cutoffs".into());
            check(
                self.m_sweep.iter().all(|&m| m >= 1 && m <= self.grid.modes),
                format!("m_sweep: cutoffs must lie in 1..={}", self.grid.modes),
            );
        }
        match exp {
            Experiment::Continuity | Experiment::LinearInvariance | Experiment::SmoothingSweep => {
                check(self.ensemble_size >= 1, "ensemble_size: must be positive".into());
            }
            Experiment::TransportMc => {
                check(
                    self.ensemble_size >= qnls::measure::MIN_TAIL_SAMPLES,
                    format!("ensemble_size: tail ratios need at least {}", qnls::measure::MIN_TAIL_SAMPLES),
                );
                check(self.times.len() >= 2, "times: need at least two".into());
                check(
                    self.times.windows(2).all(|w| w[0] < w[1]) && self.times.iter().all(|&t| t > 0.0),
                    "times: must be positive and increasing".into(),
                );
            }
            Experiment::TruncationConvergence => {
                check(self.ensemble_size >= 1, "ensemble_size: must be positive".into());
                check(self.times.len() == 1 && self.times[0] > 0.0, "times: needs exactly one positive flow time".into());
                check(
                    self.flow_sweep.len() >= 2 && self.flow_sweep.windows(2).all(|w| w[0] < w[1]) && self.flow_sweep[0] >= 1,
                    format!("flow_sweep: needs at least two increasing cutoffs, got {:?}", self.flow_sweep),
                );
                check(self.flow.cutoff == Cutoff::Full, "flow.cutoff: the reference flow must be \"full\"".into());
            }
            Experiment::FocusingLocal => {
                check(self.flow.sigma == Sigma::Focusing, "flow.sigma: focusing_local needs sigma = -1".into());
                check(self.amplitudes.len() >= 2, "amplitudes: need at least two".into());
                check(self.amplitudes.iter().all(|&a| a > 0.0), "amplitudes: must be positive".into());
            }
            Experiment::PlaneWaveOrder => {
                check(self.refinements >= 1, "refinements: need at least one halving".into());
                check(
                    self.wavenumber.unsigned_abs() as usize <= self.grid.modes,
                    format!("wavenumber: {} is outside the grid", self.wavenumber),
                );
                check(self.flow.sigma == Sigma::Defocusing, "flow.sigma: the exact solution is for sigma = +1".into());
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        for e in Experiment::ALL {
            let c = ExperimentConfig::defaults(e);
            c.validate().unwrap_or_else(|err| panic!("{e}: {err}"));
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml("experiment = \"growth\"\n[flow]\ndt = 5e-4\n").unwrap();
        assert_eq!(c.flow.dt, 5e-4);
        assert_eq!(c.t_end, 200.0);
        assert_eq!(c.flow.sigma, Sigma::Defocusing);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            ExperimentConfig::from_toml("experiment = \"growth\"\nbogus = 1\n"),
            Err(ConfigError::Parse(_))
        ));
        assert!(ExperimentConfig::from_toml("experiment = \"growth\"\n[flow]\nstep = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"nope\"\n").is_err());
        assert!(ExperimentConfig::from_toml("t_end = 1.0\n").is_err());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = ExperimentConfig::from_toml("experiment = \"smoothing_sweep\"\nm_sweep = [64, 32]\nt_end = -1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("m_sweep") && msg.contains("t_end"), "{msg}");
    }

    #[test]
    fn cutoff_accepts_integer() {
        let c = ExperimentConfig::from_toml("experiment = \"conservation\"\n[flow]\ncutoff = 8\n").unwrap();
        assert_eq!(c.flow.cutoff, Cutoff::Modes(8));
    }
}
