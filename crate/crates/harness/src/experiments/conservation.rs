//! Mass, momentum and Hamiltonian drift along one trajectory.

use anyhow::Result;
use qnls::energy::EnergyObserver;
use qnls::flow::{self, evolve, OBSERVABLE_COLUMNS};

use super::{smooth_field, Check, Context, Outcome};
use crate::config::ExperimentConfig;

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let p = cfg.flow.params();
    let amplitude = cfg.amplitudes.first().copied().unwrap_or(0.5);
    let u0 = smooth_field(cfg.grid, amplitude, 1.0);
    let mut obs = EnergyObserver::new(p);
    let traj = evolve(&u0, &p, cfg.t_end, cfg.stride, &mut [&mut obs])?;
    let mut w = ctx.create("observables.csv")?;
    flow::write_observables_csv(&mut w, &obs.rows)?;
    drop(w);

    let mut out = Outcome::default();
    let first = obs.rows[0];
    let drift = |f: fn(&flow::ObservableRow) -> f64| {
        let q0 = f(&first);
        obs.rows.iter().map(|r| (f(r) - q0).abs()).fold(0.0, f64::max) / q0.abs()
    };
    let th = cfg.thresholds.drift;
    out.check(Check::below("mass_drift", drift(|r| r.mass), th));
    out.check(Check::below("momentum_drift", drift(|r| r.momentum), th));
    out.check(Check::below("hamiltonian_drift", drift(|r| r.hamiltonian), th));
    out.stat("columns", OBSERVABLE_COLUMNS);
    out.stat("checkpoints", obs.rows.len());
    out.stat("final_time", traj.final_time());
    Ok(out)
}
