//! Monte Carlo proxy for the transport bound: tail probabilities of
//! observables after the nonlinear flow, relative to the initial ensemble.

use anyhow::Result;
use qnls::flow::evolve;
use qnls::measure::{column, quantile, sample_mu, tail_ratio, EnsembleRecord, OBSERVABLE_NAMES};
use qnls::Field;
use rayon::prelude::*;
use serde::Serialize;

use super::{Check, Context, Outcome};
use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct TimedRecord<'a> {
    time: f64,
    #[serde(flatten)]
    record: &'a EnsembleRecord,
}

/// Delta-method standard error of `log(p_after / p_before)`.
fn log_ratio_se(before: f64, after: f64, n: usize) -> f64 {
    let var = |p: f64| if p > 0.0 { (1.0 - p) / (n as f64 * p) } else { f64::INFINITY };
    (var(before) + var(after)).sqrt()
}

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let spec = cfg.measure();
    let p = cfg.flow.params();
    let n = cfg.ensemble_size;
    let sigma = cfg.flow.sigma;
    let samples: Vec<Field> = (0..n as u64)
        .into_par_iter()
        .map(|i| sample_mu(&spec, cfg.grid, i))
        .collect::<qnls::Result<_>>()?;

    // one trajectory per sample, recorded at each evaluation time
    let runs: Vec<Vec<EnsembleRecord>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, u0)| -> qnls::Result<Vec<EnsembleRecord>> {
            let mut recs = vec![EnsembleRecord::new(&spec, i as u64, u0, sigma)];
            let mut u = u0.clone();
            let mut t0 = 0.0;
            for &t in &cfg.times {
                u = evolve(&u, &p, t - t0, usize::MAX, &mut [])?.final_state().clone();
                recs.push(EnsembleRecord::new(&spec, i as u64, &u, sigma));
                t0 = t;
            }
            Ok(recs)
        })
        .collect::<qnls::Result<_>>()?;
    let at = |k: usize| -> Vec<EnsembleRecord> { runs.iter().map(|r| r[k].clone()).collect() };
    let before = at(0);

    let mut w = ctx.create("ensemble.jsonl")?;
    let times: Vec<f64> = std::iter::once(0.0).chain(cfg.times.iter().copied()).collect();
    for (k, &t) in times.iter().enumerate() {
        for r in runs.iter() {
            serde_json::to_writer(&mut w, &TimedRecord { time: t, record: &r[k] })?;
            std::io::Write::write_all(&mut w, b"\n")?;
        }
    }
    std::io::Write::flush(&mut w)?;
    drop(w);

    let th = &cfg.thresholds;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for (oi, name) in OBSERVABLE_NAMES.iter().enumerate() {
        let b = column(&before, name);
        let threshold = quantile(&b, th.tail_quantile)?;
        let frac = |v: &[f64]| v.iter().filter(|&&x| x > threshold).count() as f64 / v.len() as f64;
        let pb = frac(&b);
        let mut logs = Vec::new();
        for (k, &t) in cfg.times.iter().enumerate() {
            let a = column(&at(k + 1), name);
            let r = tail_ratio(&b, &a, threshold)?;
            let pa = frac(&a);
            let se = log_ratio_se(pb, pa, n);
            out.check(Check::new(format!("{name}_finite_t{t}"), r.is_finite(), r, "finite"));
            logs.push((t, r.value().ln(), se));
            rows.push(vec![oi as f64, t, threshold, r.value(), r.value().ln(), se]);
        }
        // log r(t) <= C t for the rate C calibrated at the first time
        let (t1, l1, _) = logs[0];
        let c = l1.max(0.0) / t1;
        let excess = logs[1..]
            .iter()
            .map(|(t, l, se)| l - c * t - th.tail_slack * se)
            .fold(f64::NEG_INFINITY, f64::max);
        out.check(Check::new(format!("{name}_log_growth_linear"), excess <= 0.0, excess, 0.0));
        out.stat(&format!("{name}_rate"), c);
    }
    ctx.write_table("tails.csv", &["observable", "t", "threshold", "ratio", "log_ratio", "se"], &rows)?;
    out.stat("observables", OBSERVABLE_NAMES);
    out.stat("samples", n);
    Ok(out)
}
