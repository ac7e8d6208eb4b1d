use std::f64::consts::PI;
use std::sync::Arc;

use boussinesq_core::spectral::{
    apply_symbol, from_spectral, make_grid, mode_index, nonlinearity, to_spectral, Grid, RealField, SpectralField,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn field(grid: &Arc<Grid>, samples: Vec<f64>) -> SpectralField {
    let mut f = to_spectral(&RealField::new(Arc::clone(grid), samples).unwrap()).unwrap();
    f.zero_nyquist();
    f
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Coefficients of `u^degree` on the modes `|j| < n/2` by explicit convolution.
fn brute_power(u: &SpectralField, degree: u32) -> Vec<Complex64> {
    let n = u.grid.n();
    let half = (n / 2) as i64;
    let modes: Vec<i64> = (-half + 1..half).collect();
    let mut acc: Vec<(i64, Complex64)> = vec![(0, Complex64::new(1.0, 0.0))];
    for _ in 0..degree {
        let mut next = std::collections::BTreeMap::<i64, Complex64>::new();
        for &(j, c) in &acc {
            for &m in &modes {
                *next.entry(j + m).or_insert(Complex64::new(0.0, 0.0)) += c * u.mode(m);
            }
        }
        acc = next.into_iter().collect();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (p, slot) in out.iter_mut().enumerate() {
        let j = mode_index(p, n);
        if j.abs() < half {
            *slot = acc.iter().find(|(m, _)| *m == j).map_or(Complex64::new(0.0, 0.0), |(_, c)| *c);
        }
    }
    out
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dealiased_quintic_matches_convolution(s in samples(8), sign in prop::sample::select(vec![1.0, -1.0])) {
        let grid = make_grid(2.0 * PI, 8).unwrap();
        let u = field(&grid, s);
        let fast = nonlinearity(&u, 2, sign).unwrap();
        let slow: Vec<Complex64> = brute_power(&u, 5).into_iter().map(|c| c * sign).collect();
        prop_assert!(max_diff(&fast.coeffs, &slow) < 1e-12);
    }

    #[test]
    fn dealiased_septic_matches_convolution(s in samples(8)) {
        let grid = make_grid(3.0, 8).unwrap();
        let u = field(&grid, s);
        let fast = nonlinearity(&u, 3, 1.0).unwrap();
        prop_assert!(max_diff(&fast.coeffs, &brute_power(&u, 7)) < 1e-12);
    }

    #[test]
    fn transform_round_trip_and_parseval(s in samples(32), length in 0.5f64..50.0) {
        let grid = make_grid(length, 32).unwrap();
        let real = RealField::new(Arc::clone(&grid), s.clone()).unwrap();
        let spec = to_spectral(&real).unwrap();
        let back = from_spectral(&spec);
        for (a, b) in s.iter().zip(&back.samples) {
            prop_assert!((a - b).abs() < 1e-13);
        }
        let physical: f64 = s.iter().map(|v| v * v).sum::<f64>() * grid.dx();
        let spectral = spec.l2_norm_sq();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1.0));
        prop_assert!(spec.hermitian_defect() < 1e-13);
    }

    #[test]
    fn symbols_act_linearly(a in samples(16), b in samples(16), c in -3.0f64..3.0) {
        let grid = make_grid(2.0 * PI, 16).unwrap();
        let (fa, fb) = (field(&grid, a), field(&grid, b));
        let sym = |xi: f64| Complex64::new(1.0 + xi * xi, 0.0);
        let lhs = apply_symbol(&fa.scale(c).add(&fb).unwrap(), sym).unwrap();
        let rhs = apply_symbol(&fa, sym).unwrap().scale(c).add(&apply_symbol(&fb, sym).unwrap()).unwrap();
        prop_assert!(max_diff(&lhs.coeffs, &rhs.coeffs) < 1e-12);
    }

    #[test]
    fn symbols_compose_multiplicatively(a in samples(16), p in 0.0f64..3.0, q in -2.0f64..2.0) {
        let grid = make_grid(7.0, 16).unwrap();
        let f = field(&grid, a);
        let s1 = |xi: f64| Complex64::new((1.0 + xi * xi).powf(p / 2.0), 0.0);
        let s2 = |xi: f64| Complex64::new(0.0, q * xi);
        let twice = apply_symbol(&apply_symbol(&f, s1).unwrap(), s2).unwrap();
        let once = apply_symbol(&f, |xi| s1(xi) * s2(xi)).unwrap();
        let scale = once.max_abs().max(1.0);
        prop_assert!(max_diff(&twice.coeffs, &once.coeffs) < 1e-12 * scale);
    }

    #[test]
    fn derivative_symbol_matches_sampled_derivative(amp in -2.0f64..2.0, j in 1i64..7, phase in 0.0f64..6.0) {
        let grid = make_grid(5.0, 16).unwrap();
        let k = 2.0 * PI * j as f64 / 5.0;
        let u = to_spectral(&grid.sample(|x| amp * (k * x + phase).sin())).unwrap();
        let du = from_spectral(&apply_symbol(&u, |xi| Complex64::new(0.0, xi)).unwrap());
        let exact = grid.sample(|x| amp * k * (k * x + phase).cos());
        for (a, b) in du.samples.iter().zip(&exact.samples) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }
}
