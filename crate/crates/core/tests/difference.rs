use biharmonic_core::dynamics::{evolve, EquationKind, IntegratorConfig};
use biharmonic_core::initial::random_state;
use biharmonic_core::normal_form::{diff_energy_check, diff_energy_terms};
use biharmonic_core::spectral::l2_norm;
use biharmonic_core::{FourierState, InitialData, Trajectory64};
use num_complex::Complex;

type C = Complex<f64>;

fn run(u0: &FourierState<f64>, t: f64, dt: f64, every: usize) -> Trajectory64 {
    evolve(u0, EquationKind::wick(), t, IntegratorConfig::new(dt, every).unwrap()).unwrap()
}

/// `u0` and `u0 + 1e-3 w` with `w` a normalized random perturbation.
fn nearby_pair(cutoff: usize) -> (FourierState<f64>, FourierState<f64>) {
    let u0 = InitialData::Gaussian { sigma: 1.0 }.build::<f64>(cutoff, 7).unwrap();
    let w = random_state::<f64>(cutoff, 8);
    let w = w.scale(C::new(1e-3 / l2_norm(&w), 0.0));
    let v0 = FourierState::from_fn(cutoff, |n| u0.get(n) + w.get(n));
    (u0, v0)
}

#[test]
fn identical_solutions() {
    let u0 = InitialData::Gaussian { sigma: 1.5 }.build::<f64>(6, 1).unwrap();
    let traj = run(&u0, 0.01, 1e-3, 1);
    for x in diff_energy_terms(&traj, &traj, -0.3, 1, false).unwrap() {
        assert_eq!(x.i_uu, x.i_uv);
        assert_eq!(x.i_vu, x.i_vv);
        assert_eq!(x.i_total(), 0.0);
        assert_eq!(x.ii, 0.0);
    }
}

#[test]
fn distinct_data_need_the_flag() {
    let (u0, v0) = nearby_pair(4);
    let (u, v) = (run(&u0, 0.002, 1e-3, 1), run(&v0, 0.002, 1e-3, 1));
    assert!(diff_energy_terms(&u, &v, 0.0, 1, false).is_err());
    assert!(diff_energy_terms(&u, &v, 0.0, 1, true).is_ok());
    let w = run(&u0, 0.003, 1e-3, 1);
    assert!(diff_energy_terms(&u, &w, 0.0, 1, true).is_err());
}

#[test]
fn single_mode_pair_closed_form() {
    // Both solutions are a e^{-i(1 - |a|^2) t}; only the resonant term survives.
    let (a, b) = (C::new(0.8, 0.0), C::new(0.0, 0.5));
    let s = -0.25;
    let u = run(&FourierState::single_mode(3, 1, a), 0.2, 1e-4, 10);
    let v = run(&FourierState::single_mode(3, 1, b), 0.2, 1e-4, 10);
    let delta = a.norm_sqr() - b.norm_sqr();
    let weight = 2f64.powf(s);
    for x in diff_energy_terms(&u, &v, s, 1, true).unwrap() {
        assert!(x.i_total().abs() < 1e-15);
        let expected = -2.0 * weight * (C::i() * delta * a * b.conj() * C::from_polar(1.0, delta * x.t)).re;
        assert!((x.ii - expected).abs() < 1e-10, "t={}: {} vs {expected}", x.t, x.ii);
    }
    let closed = |t: f64| weight * (a * C::from_polar(1.0, a.norm_sqr() * t) - b * C::from_polar(1.0, b.norm_sqr() * t)).norm_sqr();
    let rep = diff_energy_check(&u, &v, s, 1, true).unwrap();
    assert!((rep.direct - (closed(0.2) - closed(0.0))).abs() < 1e-10);
    assert!(rep.residual < 1e-12);
}

#[test]
fn nearby_solutions_energy_balance() {
    let (u0, v0) = nearby_pair(16);
    let (u, v) = (run(&u0, 0.1, 1e-5, 10), run(&v0, 0.1, 1e-5, 10));
    let rep = diff_energy_check(&u, &v, -1.0 / 3.0, 1, true).unwrap();
    assert!(rep.direct.abs() > 1e-9, "{rep:?}");
    assert!(rep.residual <= 1e-8 * 1e-2, "{rep:?}");
}
