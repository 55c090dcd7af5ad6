//! Convergence order of the integrator on the exact plane-wave solution
//! `u = e^{i(nx - (n^2 + 1) t)}` (sigma = +1).

use anyhow::Result;
use qnls::flow::evolve;
use qnls::{Complex, Field};

use super::{Check, Context, Outcome};
use crate::config::ExperimentConfig;

pub fn run(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<Outcome> {
    let n = cfg.wavenumber;
    let t = cfg.t_end;
    let u0 = Field::plane_wave(cfg.grid, n, Complex::new(1.0, 0.0));
    let omega = (n * n) as f64 + 1.0;
    let exact = Field::plane_wave(cfg.grid, n, Complex::from_polar(1.0, -omega * t));
    let mut rows = Vec::new();
    let mut dt = cfg.flow.dt;
    for _ in 0..=cfg.refinements {
        let mut p = cfg.flow.params();
        p.dt = dt;
        let traj = evolve(&u0, &p, t, usize::MAX, &mut [])?;
        let err = (traj.final_state() - &exact).sobolev_norm_sq(0.0).sqrt();
        rows.push(vec![dt, err]);
        dt /= 2.0;
    }
    let orders: Vec<f64> = rows.windows(2).map(|w| (w[0][1] / w[1][1]).log2()).collect();
    let table: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vec![r[0], r[1], if i == 0 { f64::NAN } else { orders[i - 1] }])
        .collect();
    ctx.write_table("order.csv", &["dt", "error", "order"], &table)?;

    let th = &cfg.thresholds;
    let mut out = Outcome::default();
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = orders.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out.check(Check::new("order_min", lo >= th.order_min, lo, th.order_min));
    out.check(Check::new("order_max", hi <= th.order_max, hi, th.order_max));
    out.stat("orders", &orders);
    out.stat("errors", rows.iter().map(|r| r[1]).collect::<Vec<_>>());
    Ok(out)
}
