//! Desk-scale acceptance suite. Runs every criterion at its pinned sizes and
//! tolerances, prints one PASS/FAIL line each, and fails if any criterion does.

use std::time::{Duration, Instant};

use qnls::energy::ModifiedEnergy;
use qnls::flow::evolve;
use qnls::measure::sample_mu;
use qnls::{Field, GridSpec, MeasureSpec, Params, Sigma};
use qnls_harness::config::{Experiment, ExperimentConfig};
use qnls_harness::manifest::run;
use qnls_harness::Outcome;

struct Verdict {
    passed: bool,
    detail: String,
}

fn run_default(experiment: Experiment) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(experiment);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let m = run(&cfg).unwrap();
    for note in m.outcome.iter().flat_map(|o| &o.notes) {
        println!("    note: {note}");
    }
    m.outcome
        .unwrap_or_else(|| panic!("{experiment} did not produce an outcome: {:?}", m.failure))
}

/// Verdict over the named checks of an outcome (all checks when `names` is empty).
fn checks(o: &Outcome, names: &[&str]) -> Verdict {
    let picked: Vec<_> = o
        .checks
        .iter()
        .filter(|c| names.is_empty() || names.contains(&c.name.as_str()))
        .collect();
    assert!(names.is_empty() || picked.len() == names.len(), "missing checks among {names:?}");
    let failed: Vec<String> = picked
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}={} (limit {})", c.name, c.measured, c.threshold))
        .collect();
    let passed = !picked.is_empty() && failed.is_empty();
    let detail = if passed {
        picked
            .iter()
            .filter(|c| c.measured.is_number() || c.measured.is_array())
            .map(|c| format!("{}={}", c.name, c.measured))
            .collect::<Vec<_>>()
            .join(" ")
    } else {
        format!("failed: {}", failed.join("; "))
    };
    Verdict { passed, detail }
}

fn identities() -> Verdict {
    checks(&run_default(Experiment::Continuity), &[])
}

fn conservation() -> Verdict {
    let a = checks(&run_default(Experiment::Conservation), &[]);
    let b = checks(&run_default(Experiment::PlaneWaveOrder), &["order_min"]);
    Verdict {
        passed: a.passed && b.passed,
        detail: format!("{} {}", a.detail, b.detail),
    }
}

/// Fourth-order differences of `E_2` along rk4 trajectories against `F_2`,
/// and Richardson-extrapolated central differences against the directional
/// derivative.
fn energy_correctness() -> Verdict {
    let grid = GridSpec::with_modes(16);
    let spec = MeasureSpec::new(2.0, 16, 7);
    let unit = |i: u64| -> Field {
        let u: Field = sample_mu(&spec, grid, i).unwrap();
        let norm = u.sobolev_norm_sq(1.0).sqrt();
        u.scale_real(1.0 / norm)
    };

    let mut f2_worst = 0.0f64;
    for i in 0..10u64 {
        let sigma = if i % 2 == 0 { Sigma::Defocusing } else { Sigma::Focusing };
        let e = ModifiedEnergy::h2(sigma);
        let dt = 2e-5;
        let p = Params::rk4(dt).with_sigma(sigma);
        let traj = evolve(&unit(i), &p, 40.0 * dt, 10, &mut []).unwrap();
        let e2: Vec<f64> = traj.states.iter().map(|s| e.e2(s).e2).collect();
        let h = 10.0 * dt;
        let fd = (e2[0] - 8.0 * e2[1] + 8.0 * e2[3] - e2[4]) / (12.0 * h);
        let f = e.f2(&traj.states[2], &p).unwrap();
        f2_worst = f2_worst.max((f - fd).abs() / f.abs());
    }

    let mut dir_worst = 0.0f64;
    for i in 0..100u64 {
        let sigma = if i % 2 == 0 { Sigma::Defocusing } else { Sigma::Focusing };
        let e = ModifiedEnergy::h2(sigma);
        let u: Field = sample_mu(&spec, grid, 1000 + 2 * i).unwrap();
        let v: Field = sample_mu(&spec, grid, 1001 + 2 * i).unwrap();
        let analytic = e.e2_directional(&u, &v).unwrap();
        let central = |eps: f64| (e.e2(&u.add_scaled(eps, &v)).e2 - e.e2(&u.add_scaled(-eps, &v)).e2) / (2.0 * eps);
        let fd = (4.0 * central(5e-6) - central(1e-5)) / 3.0;
        dir_worst = dir_worst.max((analytic - fd).abs() / analytic.abs());
    }
    Verdict {
        passed: f2_worst < 1e-5 && dir_worst < 1e-6,
        detail: format!("f2_rel_max={f2_worst:.3e} (limit 1e-5) directional_rel_max={dir_worst:.3e} (limit 1e-6)"),
    }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 9] = [
        ("algebraic identities", Duration::from_secs(60), identities),
        ("conservation and order", Duration::from_secs(60), conservation),
        ("energy correctness", Duration::from_secs(120), energy_correctness),
        ("smoothing signature", Duration::from_secs(600), || {
            checks(&run_default(Experiment::SmoothingSweep), &[])
        }),
        ("lipschitz and truncation", Duration::from_secs(300), || {
            checks(
                &run_default(Experiment::TruncationConvergence),
                &[
                    "truncation_monotone",
                    "truncation_final_over_initial",
                    "lipschitz_finite",
                    "lipschitz_grid_change",
                ],
            )
        }),
        ("linear invariance", Duration::from_secs(120), || {
            checks(&run_default(Experiment::LinearInvariance), &[])
        }),
        ("flow convergence", Duration::from_secs(120), || {
            checks(&run_default(Experiment::TruncationConvergence), &["flow_error_decreasing"])
        }),
        ("focusing locality", Duration::from_secs(120), || {
            checks(&run_default(Experiment::FocusingLocal), &[])
        }),
        ("transport monte carlo", Duration::from_secs(600), || {
            checks(&run_default(Experiment::TransportMc), &[])
        }),
    ];

    let mut failures = Vec::new();
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let ok = v.passed && took < *limit;
        println!(
            "criterion {} {name}: {} [{:.1}s of {}s] {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
        if !ok {
            failures.push(i + 1);
        }
    }
    if !failures.is_empty() {
        println!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
