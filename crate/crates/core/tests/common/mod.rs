#![allow(dead_code)]

use proptest::prelude::*;
use qnls::{Complex, Field, GridSpec};

/// Field on `GridSpec::with_modes(modes)` with coefficients `c_n / (1 + n^2)^{decay/2}`.
pub fn field_from(modes: usize, raw: &[(f64, f64)], decay: f64) -> Field {
    let grid = GridSpec::with_modes(modes);
    Field::from_fn(grid, |n| {
        let (re, im) = raw[grid.index(n)];
        Complex::new(re, im) * (1.0 + (n * n) as f64).powf(-decay / 2.0)
    })
}

/// Random fields with `1..=max_modes` modes and amplitude at most `amp`.
pub fn fields(max_modes: usize, amp: f64, decay: f64) -> impl Strategy<Value = Field> {
    (1..=max_modes).prop_flat_map(move |m| {
        prop::collection::vec((-amp..amp, -amp..amp), 2 * m + 1).prop_map(move |raw| field_from(m, &raw, decay))
    })
}

/// Two random fields on the same grid.
pub fn field_pairs(max_modes: usize, amp: f64, decay: f64) -> impl Strategy<Value = (Field, Field)> {
    (1..=max_modes).prop_flat_map(move |m| {
        let v = prop::collection::vec((-amp..amp, -amp..amp), 2 * m + 1);
        (v.clone(), v).prop_map(move |(a, b)| (field_from(m, &a, decay), field_from(m, &b, decay)))
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
