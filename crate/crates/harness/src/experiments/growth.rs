//! Long defocusing run from smooth `mu_2`-type data: fitted growth exponent
//! of `||u(t)||_{H^2}` and a linear bound on `E_2(t) - E_2(0)`.

use std::io::Write;

use anyhow::Result;
use qnls::energy::EnergyObserver;
use qnls::flow::{evolve, write_observables_csv};
use qnls::measure::sample_mu;
use qnls::Field;

use super::{fit_slope, max_of, Check, Context, Outcome};
use crate::config::ExperimentConfig;

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let p = cfg.flow.params();
    let u0: Field = sample_mu(&cfg.measure(), cfg.grid, 0)?;
    let mut obs = EnergyObserver::new(p);
    evolve(&u0, &p, cfg.t_end, cfg.stride, &mut [&mut obs])?;
    write_observables_csv(ctx.create("observables.csv")?, &obs.rows)?;
    let mut w = ctx.create("energy.jsonl")?;
    for b in &obs.breakdowns {
        serde_json::to_writer(&mut w, b)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;

    let t: Vec<f64> = obs.rows.iter().map(|r| r.time).collect();
    let e2: Vec<f64> = obs.rows.iter().map(|r| r.e2.unwrap_or(f64::NAN)).collect();
    let h2: Vec<f64> = obs.rows.iter().map(|r| r.h2_sq.unwrap_or(f64::NAN).sqrt()).collect();
    let split = cfg.thresholds.growth_fit_fraction * cfg.t_end;

    // exponent of ||u||_{H^2} ~ t^a, fitted past the first decile
    let (lt, lh): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&h2)
        .filter(|(t, _)| **t > split)
        .map(|(t, h)| (t.ln(), h.ln()))
        .unzip();
    let exponent = if lt.len() >= 2 { fit_slope(&lt, &lh) } else { f64::NAN };

    let c = max_of(
        t.iter()
            .zip(&e2)
            .filter(|(t, _)| **t > 0.0 && **t <= split)
            .map(|(t, e)| (e - e2[0]) / t),
    )
    .max(0.0);
    let excess = max_of(
        t.iter()
            .zip(&e2)
            .filter(|(t, _)| **t > split)
            .map(|(t, e)| e - e2[0] - c * t),
    );

    let mut out = Outcome::default();
    out.check(Check::new("e2_linear_bound", excess <= 0.0, excess, 0.0));
    out.stat("h2_exponent", exponent);
    out.stat("fitted_rate", c);
    out.stat("e2_initial", e2[0]);
    out.stat("e2_final", *e2.last().unwrap());
    out.stat("h2_initial", h2[0]);
    out.stat("h2_final", *h2.last().unwrap());
    Ok(out)
}
