use std::f64::consts::PI;

use biharmonic_core::initial::random_state;
use biharmonic_core::spectral::{
    dyadic_blocks, hs_norm, l2_norm, project, project_band, to_physical, to_spectral, Transform,
};
use biharmonic_core::{FourierState, SpectralConfig, Trajectory};
use num_complex::Complex;
use proptest::prelude::*;

type C = Complex<f64>;

fn rel_err(a: &FourierState<f64>, b: &FourierState<f64>) -> f64 {
    l2_norm(&a.sub(b).unwrap()) / l2_norm(a).max(1e-300)
}

#[test]
fn single_modes_on_the_grid() {
    let cfg = SpectralConfig::new(3);
    assert!(cfg.grid_points >= 14 && cfg.grid_points.is_power_of_two());
    let phys = to_physical(&FourierState::single_mode(3, 1, C::new(1.0, 0.0)), &cfg).unwrap();
    let l = cfg.grid_points as f64;
    for (k, z) in phys.iter().enumerate() {
        let x = 2.0 * PI * k as f64 / l;
        assert!((z - C::from_polar(1.0, x)).norm() < 1e-14);
    }
    let samples: Vec<C> = (0..cfg.grid_points).map(|k| C::from_polar(1.0, 2.0 * 2.0 * PI * k as f64 / l)).collect();
    let s = to_spectral::<f64>(&samples, &cfg).unwrap();
    for n in -3..=3 {
        let expect = if n == 2 { 1.0 } else { 0.0 };
        assert!((s.get(n) - expect).norm() < 1e-14);
    }
}

#[test]
fn hs_norm_reference_values() {
    let u = FourierState::single_mode(4, 3, C::new(1.0, 0.0));
    assert!((hs_norm(&u, 1.0, 2.0) - 13f64.sqrt()).abs() < 1e-14);
    let one = FourierState::single_mode(4, 0, C::new(1.0, 0.0));
    for s in [-1.0, 0.0, 0.7] {
        assert_eq!(hs_norm(&one, s, 1.0), 1.0);
    }
    let f = random_state::<f64>(16, 4);
    let vals: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].iter().map(|&m| hs_norm(&f, -0.5, m)).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals[3] < 0.1 * vals[0]);
    assert_eq!(hs_norm(&f, 0.0, 1.0), hs_norm(&f, 0.0, 37.0));
}

#[test]
fn l2_matches_physical_quadrature() {
    // Trapezoid rule on the padded grid is exact for |u|^2 of a band-limited u.
    let u = random_state::<f64>(12, 1);
    let cfg = SpectralConfig::new(12);
    let phys = to_physical(&u, &cfg).unwrap();
    let mean = phys.iter().map(|z| z.norm_sqr()).sum::<f64>() / phys.len() as f64;
    assert!((l2_norm(&u).powi(2) - mean).abs() < 1e-12 * mean);
    let pair = FourierState::from_fn(2, |n| if n.abs() == 1 { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) });
    assert!((l2_norm(&pair) - 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn projections() {
    let u = FourierState::from_fn(8, |n| if n == 1 || n == 5 { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) });
    let band = project_band(&u, 4, 7);
    assert_eq!(band.get(5), C::new(1.0, 0.0));
    assert_eq!(band.get(1), C::new(0.0, 0.0));
    assert_eq!(project(&u, -8, 8), u);
    let f = random_state::<f64>(37, 2);
    for m in [1, 2, 8] {
        let mut sum = FourierState::zeros(37);
        for (lo, hi) in dyadic_blocks(37, m) {
            let p = project_band(&f, lo, hi);
            sum = FourierState::from_fn(37, |n| sum.get(n) + p.get(n));
        }
        assert_eq!(sum, f);
    }
}

#[test]
fn json_schema() {
    let u = FourierState::from_fn(1, |n| C::new(n as f64, 0.5)).with_time(0.25);
    let v = u.to_json();
    assert_eq!(v["N"], 1);
    assert_eq!(v["t"], 0.25);
    assert_eq!(v["re"], serde_json::json!([-1.0, 0.0, 1.0]));
    assert_eq!(v["im"], serde_json::json!([0.5, 0.5, 0.5]));
    assert_eq!(FourierState::<f64>::from_json(&v).unwrap(), u);
    let traj = Trajectory::new(vec![u.clone(), u.clone().with_time(0.5)]).unwrap();
    assert_eq!(Trajectory::<f64>::from_json(&traj.to_json()).unwrap(), traj);
}

#[test]
fn single_precision_round_trip() {
    let u = random_state::<f32>(10, 3);
    let t = Transform::<f32>::new(SpectralConfig::new(10));
    let back = t.to_spectral(&t.to_physical(&u).unwrap(), 0.0).unwrap();
    let err: f32 = l2_norm(&back.sub(&u).unwrap()) / l2_norm(&u);
    assert!(err < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_round_trip(cutoff in 0usize..40, seed in any::<u64>(), extra in 0usize..3) {
        let base = SpectralConfig::new(cutoff);
        let cfg = SpectralConfig::with_grid(cutoff, base.grid_points << extra).unwrap();
        let u = random_state::<f64>(cutoff, seed);
        let back = to_spectral::<f64>(&to_physical(&u, &cfg).unwrap(), &cfg).unwrap();
        prop_assert!(rel_err(&u, &back) < 1e-12);
    }

    #[test]
    fn negative_s_norm_decreases_in_m(seed in any::<u64>(), s in -2.0f64..-0.01, m in 1.0f64..100.0) {
        let f = random_state::<f64>(9, seed);
        prop_assert!(hs_norm(&f, s, 2.0 * m) <= hs_norm(&f, s, m));
        prop_assert!((hs_norm(&f, 0.0, m) - l2_norm(&f)).abs() <= 1e-12 * l2_norm(&f));
    }
}
