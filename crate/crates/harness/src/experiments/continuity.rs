//! Pointwise identities of the densities on random fields: the
//! `J^2 + N_x^2 = 4 N |u_x|^2` identity, both local conservation laws and the
//! vanishing of `J_0`, for both signs.

use anyhow::Result;
use qnls::densities::{self, continuity_residuals, continuity_scale, eleele_residual, eleele_scale, j0_diag, j0_scale, n1_diag};
use qnls::measure::sample_mu;
use qnls::{Field, MeasureSpec, Params, Sigma};
use rayon::prelude::*;

use super::{max_of, Check, Context, Outcome};
use crate::config::ExperimentConfig;

const COLUMNS: [&str; 10] = [
    "index",
    "modes",
    "eleele",
    "j0_plus",
    "j0_minus",
    "mass_law_plus",
    "momentum_law_plus",
    "mass_law_minus",
    "momentum_law_minus",
    "n1_plus",
];

fn row(spec: &MeasureSpec, cfg: &ExperimentConfig, index: u64) -> qnls::Result<(Vec<f64>, Field)> {
    // sample cutoffs cycle through 1..=M
    let m = 1 + (index as usize % spec.modes.max(1));
    let sub = MeasureSpec { modes: m.min(spec.modes), ..*spec };
    let u: Field = sample_mu(&sub, cfg.grid, index)?;
    let mut r = vec![index as f64, sub.modes as f64, eleele_residual(&u) / eleele_scale(&u)];
    let plus = Params::rk4(cfg.flow.dt).with_sigma(Sigma::Defocusing);
    let minus = plus.with_sigma(Sigma::Focusing);
    for p in [&plus, &minus] {
        r.push(j0_diag(&u, p)?.abs() / j0_scale(&u, p)?);
    }
    let scale = continuity_scale(&u);
    for p in [&plus, &minus] {
        let c = continuity_residuals(&u, p)?;
        r.push(c.mass / scale);
        r.push(c.momentum / scale);
    }
    r.push(n1_diag(&u, &plus)? / j0_scale(&u, &plus)?);
    Ok((r, u))
}

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let spec = cfg.measure();
    let rows: Vec<Vec<f64>> = (0..cfg.ensemble_size as u64)
        .into_par_iter()
        .map(|i| row(&spec, cfg, i).map(|(r, _)| r))
        .collect::<qnls::Result<_>>()?;
    ctx.write_table("residuals.csv", &COLUMNS, &rows)?;
    let (_, u0) = row(&spec, cfg, 0)?;
    let mut w = ctx.create("densities.csv")?;
    densities::write_density_csv(&mut w, &densities::densities(&u0, cfg.flow.sigma))?;
    drop(w);

    let col = |k: usize| max_of(rows.iter().map(|r| r[k]));
    let th = &cfg.thresholds;
    let mut out = Outcome::default();
    out.check(Check::below("eleele_scaled_max", col(2), th.identity));
    out.check(Check::below("j0_scaled_max", col(3).max(col(4)), th.identity));
    out.check(Check::below("continuity_plus_scaled_max", col(5).max(col(6)), th.continuity));
    out.check(Check::below("continuity_minus_scaled_max", col(7).max(col(8)), th.continuity));
    out.stat("samples", rows.len());
    out.stat("n1_scaled_max_abs", max_of(rows.iter().map(|r| r[9].abs())));
    Ok(out)
}
