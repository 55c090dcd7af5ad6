//! Cutoff-uniformity of `|F_2| / bound` over a `mu_2` ensemble, against the
//! divergence of the uncorrected `d/dt ||pi_M u||_{H^2}^2`, and the
//! sensitivity of the former to the correction coefficients.

use anyhow::Result;
use qnls::energy::{Corrections, ModifiedEnergy};
use qnls::measure::sample_mu;
use qnls::{Cutoff, Field};
use rayon::prelude::*;

use super::{log2_slope, max_of, Check, Context, Outcome};
use crate::config::ExperimentConfig;

/// Per-sample values at one cutoff.
#[derive(Clone, Copy, Debug)]
struct Point {
    f2: f64,
    bound: f64,
    ratio: f64,
    uncorrected: f64,
}

fn evaluate(energy: &ModifiedEnergy, cfg: &ExperimentConfig, u: &Field, m: usize, with_uncorrected: bool) -> qnls::Result<Point> {
    let p = cfg.flow.params().with_cutoff(Cutoff::Modes(m));
    let bound = energy.smoothing_bound(&u.project(m));
    let f2 = energy.f2(u, &p)?;
    let uncorrected = if with_uncorrected {
        ModifiedEnergy::uncorrected_rate(u, &p)?.abs() / bound
    } else {
        f64::NAN
    };
    Ok(Point {
        f2,
        bound,
        ratio: f2.abs() / bound,
        uncorrected,
    })
}

/// `max_M max(r_M / r_0, r_0 / r_M)` for the per-cutoff maxima `r`.
pub fn spread(maxima: &[f64]) -> f64 {
    let r0 = maxima[0];
    max_of(maxima.iter().map(|r| (r / r0).max(r0 / r)))
}

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let spec = cfg.measure();
    let samples: Vec<Field> = (0..cfg.ensemble_size as u64)
        .into_par_iter()
        .map(|i| sample_mu(&spec, cfg.grid, i))
        .collect::<qnls::Result<_>>()?;
    let base = ModifiedEnergy::h2(cfg.flow.sigma);
    let sweep = &cfg.m_sweep;

    let grid_of = |energy: &ModifiedEnergy, with_uncorrected: bool| -> qnls::Result<Vec<Vec<Point>>> {
        sweep
            .iter()
            .map(|&m| samples.par_iter().map(|u| evaluate(energy, cfg, u, m, with_uncorrected)).collect())
            .collect()
    };
    let points = grid_of(&base, true)?;
    let max_ratio: Vec<f64> = points.iter().map(|row| max_of(row.iter().map(|p| p.ratio))).collect();
    let max_unc: Vec<f64> = points.iter().map(|row| max_of(row.iter().map(|p| p.uncorrected))).collect();
    let ms: Vec<f64> = sweep.iter().map(|&m| m as f64).collect();
    ctx.write_table(
        "sweep.csv",
        &["M", "max_ratio", "max_uncorrected_ratio"],
        &sweep.iter().enumerate().map(|(k, _)| vec![ms[k], max_ratio[k], max_unc[k]]).collect::<Vec<_>>(),
    )?;
    let mut sample_rows = Vec::new();
    for (k, row) in points.iter().enumerate() {
        for (i, p) in row.iter().enumerate() {
            sample_rows.push(vec![i as f64, ms[k], p.f2, p.ratio, p.uncorrected]);
        }
    }
    ctx.write_table("samples.csv", &["index", "M", "f2", "ratio", "uncorrected_ratio"], &sample_rows)?;

    let th = &cfg.thresholds;
    let mut out = Outcome::default();
    let s = spread(&max_ratio);
    out.check(Check::below("max_ratio_spread", s, th.ratio_factor));
    let slope = log2_slope(&ms, &max_unc);
    out.check(Check::new("uncorrected_slope", slope >= th.uncorrected_slope, slope, th.uncorrected_slope));
    out.stat("max_ratio", &max_ratio);
    out.stat("max_uncorrected_ratio", &max_unc);

    // Coefficient sensitivity. Besides the spread of the maxima, record the
    // per-sample Cauchy defect |F_2^{(M)} - F_2^{(M_max)}| / bound, which
    // decays in M only for the right coefficients.
    let last = sweep.len() - 1;
    let cauchy = |pts: &[Vec<Point>]| -> Vec<f64> {
        (0..last)
            .map(|k| {
                max_of(pts[k].iter().zip(&pts[last]).map(|(a, b)| (a.f2 - b.f2).abs() / b.bound))
            })
            .collect()
    };
    let base_cauchy = cauchy(&points);
    out.stat("cauchy_defect", &base_cauchy);
    let mut perturb_rows = Vec::new();
    for (idx, name) in Corrections::NAMES.iter().enumerate() {
        let c = base.coefficients.perturbed(idx, 1.0 + th.perturbation);
        let e = base.with_coefficients(c);
        let pts = grid_of(&e, false)?;
        let maxima: Vec<f64> = pts.iter().map(|row| max_of(row.iter().map(|p| p.ratio))).collect();
        let sp = spread(&maxima);
        let cd = cauchy(&pts);
        out.check(Check::new(format!("perturbed_{name}_breaks"), sp >= th.ratio_factor, sp, th.ratio_factor));
        out.stat(&format!("perturbed_{name}_max_ratio"), &maxima);
        out.stat(&format!("perturbed_{name}_cauchy_defect"), &cd);
        let mut row = vec![idx as f64, sp];
        row.extend(maxima);
        row.push(cd.first().copied().unwrap_or(f64::NAN));
        row.push(cd.last().copied().unwrap_or(f64::NAN));
        perturb_rows.push(row);
    }
    let mut header = vec!["coefficient".to_string(), "spread".to_string()];
    header.extend(sweep.iter().map(|m| format!("max_ratio_M{m}")));
    header.push("cauchy_first".into());
    header.push("cauchy_last".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.write_table("perturbations.csv", &header, &perturb_rows)?;
    out.stat("coefficient_order", Corrections::NAMES);
    Ok(out)
}
