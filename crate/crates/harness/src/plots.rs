//! Plot-ready output: the data files are already CSV, so this checks they
//! exist and writes a gnuplot script next to them.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use crate::config::Experiment;
use crate::experiments::expected_files;
use crate::manifest::RunManifest;

pub const SCRIPT_NAME: &str = "plot.gp";

fn script(e: Experiment) -> &'static str {
    match e {
        Experiment::Conservation => {
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n\
             plot 'observables.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n"
        }
        Experiment::PlaneWaveOrder => {
            "set datafile separator ','\nset logscale xy\nset xlabel 'dt'\nset ylabel 'error'\n\
             plot 'order.csv' using 1:2 with linespoints title 'rk4'\n"
        }
        Experiment::Continuity => {
            "set datafile separator ','\nset logscale y\nset xlabel 'sample'\nset key autotitle columnhead\n\
             plot 'residuals.csv' using 1:3 with points, '' using 1:6 with points, '' using 1:7 with points\n"
        }
        Experiment::LinearInvariance => {
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'KS'\n\
             plot for [c=2:7] 'ks.csv' using 1:c with linespoints\n"
        }
        Experiment::SmoothingSweep => {
            "set datafile separator ','\nset logscale xy 2\nset xlabel 'M'\nset key autotitle columnhead\n\
             plot 'sweep.csv' using 1:2 with linespoints, '' using 1:3 with linespoints\n"
        }
        Experiment::Growth => {
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n\
             plot 'observables.csv' using 1:7 with lines, '' using 1:6 with lines\n"
        }
        Experiment::TransportMc => {
            "set datafile separator ','\nset xlabel 't'\nset ylabel 'log tail ratio'\n\
             plot 'tails.csv' using 2:5:1 with points palette notitle\n"
        }
        Experiment::TruncationConvergence => {
            "set datafile separator ','\nset logscale xy\nset xlabel 'M'\nset key autotitle columnhead\n\
             plot 'flow_convergence.csv' using 1:2 with linespoints, 'truncation.csv' using 2:3 with dots\n"
        }
        Experiment::FocusingLocal => {
            "set datafile separator ','\nset xlabel 'R'\nset ylabel 'T(R)'\n\
             plot 'local_times.csv' using 1:2 with linespoints notitle\n"
        }
    }
}

/// Files the manifest should list but does not, or lists but are absent from `dir`.
pub fn missing_artifacts(manifest: &RunManifest, dir: &Path) -> Vec<String> {
    expected_files(manifest.experiment)
        .iter()
        .filter(|name| manifest.checksum(name).is_none() || !dir.join(name).is_file())
        .map(|s| s.to_string())
        .collect()
}

/// Checks the data files of `manifest` in `dir` and writes the plot script.
pub fn emit_plots(manifest: &RunManifest, dir: &Path) -> Result<Vec<PathBuf>> {
    let missing = missing_artifacts(manifest, dir);
    if !missing.is_empty() {
        bail!("missing artifacts for {}: {}", manifest.experiment, missing.join(", "));
    }
    let script_path = dir.join(SCRIPT_NAME);
    std::fs::write(&script_path, script(manifest.experiment))?;
    let mut out: Vec<PathBuf> = expected_files(manifest.experiment)
        .iter()
        .filter(|f| f.ends_with(".csv"))
        .map(|f| dir.join(f))
        .collect();
    out.push(script_path);
    Ok(out)
}
