//! Local existence for the focusing flow: data of size `R` in `H^{7/4}` run
//! for a positive time without tripping the guard; large data trip it.

use anyhow::Result;
use qnls::flow::evolve;

use super::{smooth_field, Check, Context, Outcome};
use crate::config::ExperimentConfig;

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let p = cfg.flow.params();
    let profile = smooth_field(cfg.grid, 1.0, 1.0);
    let unit = profile.sobolev_norm_sq(1.75).sqrt();
    let mut rows = Vec::new();
    let mut local = Vec::new();
    for &r in &cfg.amplitudes {
        let u0 = profile.scale_real(r / unit);
        let traj = evolve(&u0, &p, cfg.t_end, cfg.stride, &mut [])?;
        let reached = traj.blowup.map(|b| b.time).unwrap_or(cfg.t_end);
        let max_h1 = traj
            .states
            .iter()
            .map(|s| s.sobolev_norm_sq(1.0).sqrt())
            .fold(0.0, f64::max);
        rows.push(vec![r, reached, f64::from(u8::from(traj.blowup.is_some())), max_h1]);
        local.push((r, reached, traj.blowup));
    }
    ctx.write_table("local_times.csv", &["R", "T", "guard_tripped", "max_h1"], &rows)?;

    let mut out = Outcome::default();
    let (tested, large) = local.split_at(local.len() - 1);
    for (r, t, blowup) in tested {
        out.check(Check::new(format!("R{r}_completes"), blowup.is_none() && *t > 0.0, t, "positive, no guard trip"));
    }
    let times: Vec<f64> = tested.iter().map(|l| l.1).collect();
    out.check(Check::new(
        "local_time_nonincreasing",
        times.windows(2).all(|w| w[1] <= w[0]),
        &times,
        "non-increasing in R",
    ));
    let (r, _, blowup) = large[0];
    out.check(Check::new(format!("R{r}_trips_guard"), blowup.is_some(), blowup.map(|b| b.time), "guard trip"));
    if let Some(b) = blowup {
        out.notes.push(format!(
            "R = {r}: guard tripped at t = {} with ||u||_H1 = {} (threshold {}), expected for large data",
            b.time, b.norm, b.threshold
        ));
    }
    out.stat("local_times", &times);
    Ok(out)
}
