//! Convergence in the cutoff: the truncation curve of `R_2`, its Lipschitz
//! probe, and the distance between truncated and full flows.

use anyhow::Result;
use qnls::energy::ModifiedEnergy;
use qnls::flow::evolve;
use qnls::measure::sample_mu;
use qnls::{Complex, Cutoff, Field, GridSpec};
use rayon::prelude::*;

use super::{max_of, min_of, Check, Context, Outcome};
use crate::config::ExperimentConfig;

/// Smooth data `(1 + i/2) / (1+n^2)^{3/2}` for the flow comparison.
pub fn flow_data(grid: GridSpec) -> Field {
    Field::from_fn(grid, |n| Complex::new(1.0, 0.5) / (1.0 + (n * n) as f64).powf(1.5))
}

/// Scales `u` down to `||u||_{H^1} <= radius`.
fn capped(u: Field, radius: f64) -> Field {
    let norm = u.sobolev_norm_sq(1.0).sqrt();
    if norm > radius {
        u.scale_real(radius / norm)
    } else {
        u
    }
}

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let spec = cfg.measure();
    let energy = ModifiedEnergy::h2(cfg.flow.sigma);
    let th = &cfg.thresholds;
    let mut out = Outcome::default();
    let n = cfg.ensemble_size;

    // R_2 truncation curves, one per sample
    let curves: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u: Field = sample_mu(&spec, cfg.grid, i)?;
            energy.r2_truncation_curve(&u, &cfg.m_sweep)
        })
        .collect::<qnls::Result<_>>()?;
    let mut rows = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        for (m, v) in cfg.m_sweep.iter().zip(c) {
            rows.push(vec![i as f64, *m as f64, *v]);
        }
    }
    ctx.write_table("truncation.csv", &["index", "M", "r2_error"], &rows)?;
    // the cutoff limit is an L^1(mu) statement, so the checks use the
    // ensemble mean of |R_2(pi_M u) - R_2(u)|; per-sample figures are reported
    let k = cfg.m_sweep.len();
    let mean: Vec<f64> = (0..k).map(|j| curves.iter().map(|c| c[j]).sum::<f64>() / n as f64).collect();
    out.check(Check::new(
        "truncation_monotone",
        mean.windows(2).all(|w| w[1] < w[0]),
        &mean,
        "strictly decreasing",
    ));
    out.check(Check::below("truncation_final_over_initial", mean[k - 1] / mean[0], th.truncation_drop));
    let mut drops: Vec<f64> = curves.iter().map(|c| c[k - 1] / c[0]).collect();
    drops.sort_by(f64::total_cmp);
    out.stat("truncation_mean_curve", &mean);
    out.stat(
        "per_sample_monotone",
        curves.iter().filter(|c| c.windows(2).all(|w| w[1] < w[0])).count(),
    );
    out.stat("per_sample_drop_median", drops[drops.len() / 2]);
    out.stat("per_sample_drop_max", drops[drops.len() - 1]);

    // Lipschitz probe on independent pairs, on the sample grid and on a
    // doubled grid holding the same fields
    let fine = GridSpec::with_modes(2 * cfg.grid.modes);
    let probes: Vec<[f64; 2]> = (0..n as u64)
        .into_par_iter()
        .map(|i| -> qnls::Result<[f64; 2]> {
            let u = capped(sample_mu(&spec, cfg.grid, 2 * i + n as u64)?, th.lipschitz_radius);
            let v = capped(sample_mu(&spec, cfg.grid, 2 * i + 1 + n as u64)?, th.lipschitz_radius);
            let a = energy.r2_lipschitz_probe(&u, &v)?.unwrap_or(0.0);
            let b = energy.r2_lipschitz_probe(&u.regrid(fine), &v.regrid(fine))?.unwrap_or(0.0);
            Ok([a, b])
        })
        .collect::<qnls::Result<_>>()?;
    ctx.write_table(
        "lipschitz.csv",
        &["pair", "probe", "probe_fine"],
        &probes.iter().enumerate().map(|(i, p)| vec![i as f64, p[0], p[1]]).collect::<Vec<_>>(),
    )?;
    let probe_max = max_of(probes.iter().map(|p| p[0]));
    let grid_change = max_of(probes.iter().map(|p| (p[0] - p[1]).abs() / p[0].abs().max(f64::MIN_POSITIVE)));
    out.check(Check::new("lipschitz_finite", probe_max.is_finite(), probe_max, "finite"));
    out.check(Check::below("lipschitz_grid_change", grid_change, th.grid_stability));
    out.stat("lipschitz_max", probe_max);
    out.stat("lipschitz_min", min_of(probes.iter().map(|p| p[0])));

    // truncated flows against the full flow
    let top = *cfg.flow_sweep.last().unwrap();
    let grid = GridSpec::with_modes(2 * top);
    let u0 = flow_data(grid);
    let t = cfg.times[0];
    let full = evolve(&u0, &cfg.flow.params(), t, usize::MAX, &mut [])?;
    let errs: Vec<[f64; 2]> = cfg
        .flow_sweep
        .par_iter()
        .map(|&m| -> qnls::Result<[f64; 2]> {
            let p = cfg.flow.params().with_cutoff(Cutoff::Modes(m));
            let v = evolve(&u0, &p, t, usize::MAX, &mut [])?;
            let d = full.final_state() - v.final_state();
            Ok([d.sobolev_norm_sq(1.75).sqrt(), d.sobolev_norm_sq(1.25).sqrt()])
        })
        .collect::<qnls::Result<_>>()?;
    ctx.write_table(
        "flow_convergence.csv",
        &["M", "error_h7_4", "error_h5_4"],
        &cfg.flow_sweep.iter().zip(&errs).map(|(m, e)| vec![*m as f64, e[0], e[1]]).collect::<Vec<_>>(),
    )?;
    let strictly = errs.windows(2).all(|w| w[1][0] < w[0][0]);
    let e: Vec<f64> = errs.iter().map(|e| e[0]).collect();
    out.check(Check::new("flow_error_decreasing", strictly, &e, "strictly decreasing"));
    out.stat("flow_grid_modes", grid.modes);
    Ok(out)
}
