//! Invariance of `mu_s` under the free flow: each observable's law before
//! and after `e^{it d_x^2}` agrees in the two-sample KS sense.

use anyhow::Result;
use qnls::flow::linear_flow;
use qnls::measure::{self, column, ks_critical_value, ks_statistic, sample_mu, EnsembleRecord, OBSERVABLE_NAMES};
use qnls::Field;
use rayon::prelude::*;

use super::{Check, Context, Outcome};
use crate::config::ExperimentConfig;

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let spec = cfg.measure();
    let n = cfg.ensemble_size;
    let samples: Vec<Field> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_mu(&spec, cfg.grid, i))
        .collect::<qnls::Result<_>>()?;
    let record = |i: usize, u: &Field| EnsembleRecord::new(&spec, i as u64, u, cfg.flow.sigma);
    let before: Vec<EnsembleRecord> = samples.par_iter().enumerate().map(|(i, u)| record(i, u)).collect();
    measure::write_records(ctx.create("ensemble.jsonl")?, &before)?;

    let crit = ks_critical_value(n, n, cfg.thresholds.ks_alpha);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &t in &cfg.times {
        let after: Vec<EnsembleRecord> = samples
            .par_iter()
            .enumerate()
            .map(|(i, u)| record(i, &linear_flow(u, t)))
            .collect();
        let mut row = vec![t];
        for name in OBSERVABLE_NAMES {
            let d = ks_statistic(&column(&before, name), &column(&after, name))?;
            worst = worst.max(d);
            row.push(d);
        }
        rows.push(row);
    }
    let header: Vec<&str> = std::iter::once("t").chain(OBSERVABLE_NAMES).collect();
    ctx.write_table("ks.csv", &header, &rows)?;

    let mut out = Outcome::default();
    for (row, t) in rows.iter().zip(&cfg.times) {
        for (name, d) in OBSERVABLE_NAMES.iter().zip(&row[1..]) {
            out.check(Check::below(format!("ks_{name}_t{t}"), *d, crit));
        }
    }
    out.stat("ks_max", worst);
    out.stat("critical_value", crit);
    out.stat("samples", n);
    Ok(out)
}
