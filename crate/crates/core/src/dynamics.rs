//! Nonlinearities, gauge maps, the linear group and time integration for
//! `i u_t = u_xxxx + sigma (|u|^2 - gamma mu(u)) u`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, ci, cis, to_f64, Real};
use crate::spectral::{check_same, l2_norm, FourierState, SpectralConfig, Trajectory, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Original,
    Wick,
    Renormalized(f64),
}

/// Equation variant plus the sign of the nonlinearity (+1 defocusing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationKind {
    pub variant: Variant,
    pub sign: i8,
}

impl EquationKind {
    pub fn original() -> Self {
        Self { variant: Variant::Original, sign: 1 }
    }

    pub fn wick() -> Self {
        Self { variant: Variant::Wick, sign: 1 }
    }

    pub fn renormalized(gamma: f64) -> Self {
        Self { variant: Variant::Renormalized(gamma), sign: 1 }
    }

    pub fn focusing(self) -> Self {
        Self { sign: -1, ..self }
    }

    pub fn gamma(&self) -> f64 {
        match self.variant {
            Variant::Original => 0.0,
            Variant::Wick => 2.0,
            Variant::Renormalized(g) => g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {}", self.sign)));
        }
        if !self.gamma().is_finite() {
            return Err(Error::InvalidParameter("gamma must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub store_every: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, store_every: usize) -> Result<Self> {
        let cfg = Self { dt, store_every };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.store_every == 0 {
            return Err(Error::InvalidParameter("store_every must be positive".into()));
        }
        Ok(())
    }
}

/// `sum_n |u_n|^2`, the mean of `|u|^2` over the circle.
pub fn mean_mass<T: Real>(u: &FourierState<T>) -> T {
    let l = l2_norm(u);
    l * l
}

fn check3<T: Real>(a: &FourierState<T>, b: &FourierState<T>, d: &FourierState<T>) -> Result<()> {
    check_same(a, b)?;
    check_same(a, d)
}

/// `sum_{Gamma(n)} u1(n1) conj(u2(n2)) u3(n3)` over the box, for every `|n| <= N`.
pub fn nonresonant_n<T: Real>(
    u1: &FourierState<T>,
    u2: &FourierState<T>,
    u3: &FourierState<T>,
) -> Result<FourierState<T>> {
    check3(u1, u2, u3)?;
    let big = u1.cutoff() as i64;
    let mut out = FourierState::zeros(u1.cutoff()).with_time(u1.time());
    for n in -big..=big {
        let mut acc = Complex::new(T::zero(), T::zero());
        for n1 in -big..=big {
            if n1 == n {
                continue;
            }
            let a = u1.get(n1);
            for n3 in (-big).max(n - n1 - big)..=big.min(n - n1 + big) {
                if n3 == n {
                    continue;
                }
                acc = acc + a * u2.get(n1 + n3 - n).conj() * u3.get(n3);
            }
        }
        out.set(n, acc);
    }
    Ok(out)
}

/// Pointwise `u1(n) conj(u2(n)) u3(n)`.
pub fn resonant_r<T: Real>(
    u1: &FourierState<T>,
    u2: &FourierState<T>,
    u3: &FourierState<T>,
) -> Result<FourierState<T>> {
    check3(u1, u2, u3)?;
    Ok(u1.map(|n, a| a * u2.get(n).conj() * u3.get(n)))
}

/// `N(u,u,u) - R(u,u,u)` by direct summation.
pub fn wick_nonlinearity<T: Real>(u: &FourierState<T>) -> FourierState<T> {
    let nn = nonresonant_n(u, u, u).expect("same state");
    let rr = resonant_r(u, u, u).expect("same state");
    nn.sub(&rr).expect("same cutoff")
}

/// `(|u|^2 - 2 mean|u|^2) u` through the padded physical grid.
pub fn wick_nonlinearity_physical<T: Real>(u: &FourierState<T>) -> FourierState<T> {
    CubicTerm::new(SpectralConfig::new(u.cutoff())).eval(u, c(2.0))
}

/// Padded-grid evaluation of `P_{<=N}[(|u|^2 - gamma mu(u)) u]`.
pub struct CubicTerm<T: Real> {
    transform: Transform<T>,
}

impl<T: Real> CubicTerm<T> {
    pub fn new(cfg: SpectralConfig) -> Self {
        Self { transform: Transform::new(cfg) }
    }

    /// Panics when `u` does not match the transform or the cube overflows;
    /// see [`Self::try_eval`].
    pub fn eval(&self, u: &FourierState<T>, gamma: T) -> FourierState<T> {
        self.try_eval(u, gamma).expect("finite state matching the transform")
    }

    pub fn try_eval(&self, u: &FourierState<T>, gamma: T) -> Result<FourierState<T>> {
        let mut phys = self.transform.to_physical(u)?;
        for z in phys.iter_mut() {
            *z = *z * z.norm_sqr();
        }
        let cubic = self.transform.to_spectral(&phys, u.time())?;
        let gm = gamma * mean_mass(u);
        Ok(cubic.map(|n, z| z - u.get(n) * gm))
    }
}

/// Multiplies every sample by `e^{i direction gamma t mu}`, with `mu` the
/// (checked constant) mean mass.
pub fn gauge_transform<T: Real>(traj: &Trajectory<T>, gamma: T, direction: i8) -> Result<Trajectory<T>> {
    if direction != 1 && direction != -1 {
        return Err(Error::InvalidParameter(format!("direction must be +1 or -1, got {direction}")));
    }
    let mu0 = mean_mass(traj.first());
    let scale = mu0.max(T::min_positive_value());
    let drift = traj
        .samples()
        .iter()
        .map(|s| ((mean_mass(s) - mu0) / scale).abs())
        .fold(T::zero(), T::max);
    if drift > c(1e-6) {
        return Err(Error::MassNotConserved(to_f64(drift)));
    }
    let d: T = ci(direction as i64);
    Ok(traj.map(|s| s.scale(cis(d * gamma * s.time() * mu0))))
}

/// `u_n -> e^{-i n^4 t} u_n`.
pub fn linear_propagate<T: Real>(u: &FourierState<T>, t: T) -> FourierState<T> {
    u.map(|n, z| z * quartic_phase(n, -t))
}

/// `e^{i n^4 t}` with the product `n^4 t` formed in `f64`.
#[inline]
pub(crate) fn quartic_phase<T: Real>(n: i64, t: T) -> Complex<T> {
    let arg = ((n * n * n * n) as f64) * to_f64(t);
    Complex::new(c(arg.cos()), c(arg.sin()))
}

/// `w_n(t) = e^{i t n^4} u_n(t)` at every sample.
pub fn interaction_rep<T: Real>(traj: &Trajectory<T>) -> Trajectory<T> {
    traj.map(|s| s.map(|n, z| z * quartic_phase(n, s.time())))
}

pub fn interaction_rep_inverse<T: Real>(traj: &Trajectory<T>) -> Trajectory<T> {
    traj.map(|s| s.map(|n, z| z * quartic_phase(n, -s.time())))
}

/// Largest relative deviation of the mean mass from its initial value.
pub fn mass_drift<T: Real>(traj: &Trajectory<T>) -> T {
    let m0 = mean_mass(traj.first());
    let scale = m0.max(T::min_positive_value());
    traj.samples().iter().map(|s| ((mean_mass(s) - m0) / scale).abs()).fold(T::zero(), T::max)
}

/// Integrating-factor RK4 on the Galerkin system. Samples are stored every
/// `store_every` steps and at `T`; the step is shrunk so that it divides `T`.
pub fn evolve<T: Real>(
    u0: &FourierState<T>,
    kind: EquationKind,
    t_final: T,
    cfg: IntegratorConfig,
) -> Result<Trajectory<T>> {
    kind.validate()?;
    cfg.validate()?;
    if !(t_final > T::zero()) {
        return Err(Error::InvalidParameter("final time must be positive".into()));
    }
    if !u0.is_finite() {
        return Err(Error::NonFinite(to_f64(u0.time())));
    }
    let steps = (to_f64(t_final) / cfg.dt).ceil().max(1.0) as usize;
    let dt = t_final / ci(steps as i64);
    let half = dt / c(2.0);
    let sixth = dt / c(6.0);
    let cutoff = u0.cutoff();
    let cubic = CubicTerm::new(SpectralConfig::new(cutoff));
    let gamma: T = c(kind.gamma());
    let minus_i_sigma = Complex::new(T::zero(), -ci::<T>(kind.sign as i64));
    let big = cutoff as i64;
    let e_half: Vec<Complex<T>> = (-big..=big).map(|n| quartic_phase(n, -half)).collect();
    let e_full: Vec<Complex<T>> = e_half.iter().map(|z| z * z).collect();

    let rhs = |u: &FourierState<T>| -> Result<FourierState<T>> {
        match cubic.try_eval(u, gamma) {
            Ok(v) => Ok(v.scale(minus_i_sigma)),
            Err(Error::NonFinite(_)) => Err(Error::NonFinite(to_f64(u.time()))),
            Err(e) => Err(e),
        }
    };
    let lin = |u: &FourierState<T>, e: &[Complex<T>]| {
        let mut v = u.clone();
        for (z, f) in v.coeffs_mut().iter_mut().zip(e) {
            *z = *z * f;
        }
        v
    };
    let axpy = |u: &FourierState<T>, a: T, k: &FourierState<T>| u.map(|n, z| z + k.get(n) * a);

    let t0 = u0.time();
    let mut u = u0.clone();
    let mut samples = vec![u.clone()];
    for step in 1..=steps {
        let k1 = rhs(&u)?;
        let k2 = rhs(&lin(&axpy(&u, half, &k1), &e_half))?;
        let eu = lin(&u, &e_half);
        let k3 = rhs(&axpy(&eu, half, &k2))?;
        let k4 = rhs(&axpy(&lin(&eu, &e_half), dt, &lin(&k3, &e_half)))?;
        let k1e = lin(&k1, &e_full);
        let k23e = lin(&k2.map(|n, z| z + k3.get(n)), &e_half);
        let mut next = lin(&u, &e_full);
        for (i, z) in next.coeffs_mut().iter_mut().enumerate() {
            let incr: Complex<T> = k1e.coeffs()[i] + k23e.coeffs()[i] * c::<T>(2.0) + k4.coeffs()[i];
            *z = *z + incr * sixth;
        }
        let t = t0 + dt * ci(step as i64);
        next.set_time(t);
        if !next.is_finite() {
            return Err(Error::NonFinite(to_f64(t)));
        }
        u = next;
        if step % cfg.store_every == 0 || step == steps {
            samples.push(u.clone());
        }
    }
    Trajectory::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn nonlinear_pieces_on_simple_data() {
        let e1 = FourierState::single_mode(3, 1, z(1.0, 0.0));
        assert!(l2_norm(&nonresonant_n(&e1, &e1, &e1).unwrap()) < 1e-15);
        let em1 = FourierState::single_mode(3, -1, z(1.0, 0.0));
        let out = nonresonant_n(&e1, &em1, &e1).unwrap();
        assert_eq!(out.get(3), z(1.0, 0.0));
        assert!(l2_norm(&out.sub(&FourierState::single_mode(3, 3, z(1.0, 0.0))).unwrap()) < 1e-15);
        assert_eq!(resonant_r(&e1, &e1, &e1).unwrap(), e1);
        assert!(l2_norm(&resonant_r(&e1, &em1, &e1).unwrap()) == 0.0);
        let w = wick_nonlinearity(&e1);
        assert!(l2_norm(&w.sub(&e1.scale(z(-1.0, 0.0))).unwrap()) < 1e-15);
        let wp = wick_nonlinearity_physical(&e1);
        assert!(l2_norm(&wp.sub(&w).unwrap()) < 1e-14);
    }

    #[test]
    fn mean_mass_and_propagator() {
        let s = FourierState::single_mode(2, 1, z(2.0, 0.0));
        assert_eq!(mean_mass(&s), 4.0);
        let p = linear_propagate(&FourierState::single_mode(2, 1, z(1.0, 0.0)), 1.0);
        assert!((p.get(1) - z(1f64.cos(), -1f64.sin())).norm() < 1e-15);
        assert_eq!(linear_propagate(&s, 0.0), s);
    }

    #[test]
    fn single_mode_closed_forms() {
        let a = z(1.0, 0.0);
        let u0 = FourierState::single_mode(4, 1, a);
        let cfg = IntegratorConfig::new(1e-3, 100).unwrap();
        for (kind, freq) in [(EquationKind::wick(), 0.0), (EquationKind::original(), 2.0)] {
            let tr = evolve(&u0, kind, 1.0, cfg).unwrap();
            let got = tr.last().get(1);
            let want = a * Complex::new(0.0, -freq).exp();
            assert!((got - want).norm() < 1e-10, "{kind:?}: {got} vs {want}");
            assert!((tr.last().time() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let u0 = FourierState::<f64>::zeros(4);
        let tr = evolve(&u0, EquationKind::wick(), 0.1, IntegratorConfig::new(1e-2, 1).unwrap()).unwrap();
        assert_eq!(tr.len(), 11);
        assert!(tr.samples().iter().all(|s| l2_norm(s) == 0.0));
    }

    #[test]
    fn gauge_refuses_drifting_mass() {
        let a = FourierState::single_mode(1, 0, z(1.0, 0.0));
        let b = FourierState::single_mode(1, 0, z(1.1, 0.0)).with_time(1.0);
        let tr = Trajectory::new(vec![a, b]).unwrap();
        assert!(matches!(gauge_transform(&tr, 2.0, 1), Err(Error::MassNotConserved(_))));
    }

    #[test]
    fn invalid_configs() {
        assert!(IntegratorConfig::new(0.0, 1).is_err());
        assert!(IntegratorConfig::new(1e-3, 0).is_err());
        let u0 = FourierState::<f64>::zeros(1);
        assert!(evolve(&u0, EquationKind::wick(), 0.0, IntegratorConfig::new(1e-3, 1).unwrap()).is_err());
    }
}
