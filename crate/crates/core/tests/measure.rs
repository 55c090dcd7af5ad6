use qnls::flow::linear_flow;
use qnls::measure::{column, ks_critical_value, ks_statistic, observables, sample_ensemble, sample_mu, EnsembleRecord, OBSERVABLE_NAMES};
use qnls::{Field, GridSpec, MeasureSpec, Sigma};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn second_moments() {
    let spec = MeasureSpec::new(2.0, 8, 11);
    let grid = GridSpec::with_modes(8);
    let samples = sample_ensemble::<f64>(&spec, grid, 0..10_000).unwrap();
    for n in -8i64..=8 {
        let v: Vec<f64> = samples.iter().map(|u| u.coeff(n).norm_sqr()).collect();
        let (m, se) = mean_and_se(&v);
        assert!((m - spec.mode_variance(n)).abs() < 4.0 * se, "mode {n}: {m} vs {}", spec.mode_variance(n));
    }
}

#[test]
fn expected_mass_small_case() {
    let spec = MeasureSpec::new(2.0, 1, 3);
    let samples = sample_ensemble::<f64>(&spec, GridSpec::with_modes(1), 0..10_000).unwrap();
    let v: Vec<f64> = samples.iter().map(|u| u.sobolev_norm_sq(0.0)).collect();
    let (m, se) = mean_and_se(&v);
    assert!((m - 6.0 * std::f64::consts::PI).abs() < 3.0 * se, "{m}");
}

#[test]
fn constant_mode_only() {
    let spec = MeasureSpec::new(5.0, 0, 9);
    let samples = sample_ensemble::<f64>(&spec, GridSpec::with_modes(2), 0..10_000).unwrap();
    assert!(samples.iter().all(|u| u.modes_with_coeffs().all(|(n, c)| n == 0 || c.norm() == 0.0)));
    let v: Vec<f64> = samples.iter().map(|u| u.coeff(0).norm_sqr()).collect();
    let (m, se) = mean_and_se(&v);
    assert!((m - 2.0).abs() < 4.0 * se);
}

#[test]
fn real_and_imaginary_parts_share_a_law() {
    let spec = MeasureSpec::new(2.0, 4, 5);
    let samples = sample_ensemble::<f64>(&spec, GridSpec::with_modes(4), 0..1000).unwrap();
    for n in -4i64..=4 {
        let re: Vec<f64> = samples.iter().map(|u| u.coeff(n).re).collect();
        let im: Vec<f64> = samples.iter().map(|u| u.coeff(n).im).collect();
        assert!(ks_statistic(&re, &im).unwrap() < ks_critical_value(1000, 1000, 0.05), "mode {n}");
    }
}

#[test]
fn ks_same_law_usually_small() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut below = 0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        if ks_statistic(&a, &b).unwrap() < 0.09 {
            below += 1;
        }
    }
    assert!(below as f64 >= 0.95 * 200.0, "{below}");
}

#[test]
fn linear_flow_preserves_the_measure() {
    let spec = MeasureSpec::new(2.0, 16, 21);
    let grid = GridSpec::with_modes(16);
    let samples = sample_ensemble::<f64>(&spec, grid, 0..1000).unwrap();
    let before: Vec<EnsembleRecord> = samples.iter().enumerate().map(|(i, u)| EnsembleRecord::new(&spec, i as u64, u, Sigma::Defocusing)).collect();
    let crit = ks_critical_value(1000, 1000, 0.05);
    for t in [0.1, 1.0, std::f64::consts::PI, 1.0 + 2f64.sqrt()] {
        let after: Vec<EnsembleRecord> = samples
            .iter()
            .enumerate()
            .map(|(i, u)| EnsembleRecord::new(&spec, i as u64, &linear_flow(u, t), Sigma::Defocusing))
            .collect();
        for name in OBSERVABLE_NAMES {
            let d = ks_statistic(&column(&before, name), &column(&after, name)).unwrap();
            assert!(d < crit, "t = {t}, {name}: {d}");
        }
    }
}

#[test]
fn observables_delegate_to_energy() {
    let spec = MeasureSpec::new(2.0, 6, 2);
    let u: Field = sample_mu(&spec, GridSpec::with_modes(6), 0).unwrap();
    for sigma in [Sigma::Defocusing, Sigma::Focusing] {
        let o = observables(&u, 2.0, sigma);
        let e = qnls::energy::e2(&u, sigma).e2;
        assert!((o["e2"] - e).abs() <= 1e-12 * e.abs().max(1.0));
    }
}
