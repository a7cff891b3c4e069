use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbol::EnergySymbol;
use crate::error::{Error, Result};
use crate::quadrature::{simpson, uniform_step};
use crate::scalar::{c, to_f64, Real};
use crate::spectral::{l2_norm, project_band, FourierState, Trajectory};

/// Frequencies with `n1 - n2 + n3 - n4 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
    pub n4: i64,
}

impl Quadruple {
    pub fn new(n1: i64, n2: i64, n3: i64, n4: i64) -> Result<Self> {
        if n1 - n2 + n3 - n4 != 0 {
            return Err(Error::InvalidParameter(format!("({n1}, {n2}, {n3}, {n4}) violates n1 - n2 + n3 - n4 = 0")));
        }
        Ok(Self { n1, n2, n3, n4 })
    }

    pub fn max_abs(&self) -> i64 {
        self.n1.abs().max(self.n2.abs()).max(self.n3.abs()).max(self.n4.abs())
    }
}

/// A weight on integer frequencies.
pub trait Weight: Sync {
    fn at(&self, n: i64) -> f64;
}

impl Weight for EnergySymbol {
    fn at(&self, n: i64) -> f64 {
        self.eval(n as f64)
    }
}

/// The same value at every frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantWeight(pub f64);

impl Weight for ConstantWeight {
    fn at(&self, _: i64) -> f64 {
        self.0
    }
}

/// `a(n1) - a(n2) + a(n3) - a(n4)`.
pub fn psi(q: &Quadruple, a: &impl Weight) -> f64 {
    a.at(q.n1) - a.at(q.n2) + a.at(q.n3) - a.at(q.n4)
}

/// `sum_n a(n) |u_n|^2`.
pub fn energy_e<T: Real>(u: &FourierState<T>, a: &impl Weight) -> T {
    u.modes().map(|(n, z)| c::<T>(a.at(n)) * z.norm_sqr()).fold(T::zero(), |x, y| x + y)
}

/// `E(u) / (2^{2 k0 s} ||P_{k0} u||^2)`, where `P_{k0}` keeps `2^{k0-1} <= |n| < 2^{k0}`.
/// `None` when the block is empty.
pub fn es5_ratio<T: Real>(u: &FourierState<T>, sym: &EnergySymbol) -> Option<f64> {
    let hi = 1i64 << sym.k0;
    let lo = if sym.k0 == 0 { 0 } else { hi / 2 };
    let block = to_f64(l2_norm(&project_band(u, lo, hi - 1)));
    if block == 0.0 {
        return None;
    }
    let scale = (2.0 * sym.k0 as f64 * sym.s).exp2() * block * block;
    Some(to_f64(energy_e(u, sym)) / scale)
}

/// `sum Psi u1 conj(u2) u3 conj(u4)` over the box with `n2 != n1, n3`.
pub fn psi_sum<T: Real>(u: &FourierState<T>, weight: &impl Weight) -> Complex<T> {
    let big = u.cutoff() as i64;
    let a: Vec<f64> = (-big..=big).map(|n| weight.at(n)).collect();
    let at = |n: i64| a[(n + big) as usize];
    let zero = Complex::new(T::zero(), T::zero());
    (-big..=big)
        .into_par_iter()
        .map(|n1| {
            let mut acc = zero;
            let z1 = u.get(n1);
            for n2 in -big..=big {
                if n2 == n1 {
                    continue;
                }
                let z12 = z1 * u.get(n2).conj();
                for n3 in (-big).max(n2 - n1 - big)..=big.min(n2 - n1 + big) {
                    if n3 == n2 {
                        continue;
                    }
                    let n4 = n1 - n2 + n3;
                    let p = at(n1) - at(n2) + at(n3) - at(n4);
                    acc = acc + z12 * u.get(n3) * u.get(n4).conj() * c::<T>(p);
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(zero, |x, y| x + y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub t: f64,
    pub e0: f64,
    pub e1: f64,
    /// `R(t)`, the Simpson integral of `(i sigma / 2) sum Psi ...`.
    pub flux: f64,
    pub residual: f64,
    /// Largest imaginary part of the integrand (zero up to rounding).
    pub max_imag: f64,
    pub dt_sample: f64,
}

/// `|E(t) - E(0) - R(t)|` along a Wick trajectory in the original variables,
/// using the samples with time `<= t`.
pub fn flux_identity_check<T: Real>(traj: &Trajectory<T>, weight: &impl Weight, t: f64, sign: i8) -> Result<FluxReport> {
    let samples: Vec<&FourierState<T>> =
        traj.samples().iter().filter(|s| to_f64(s.time()) <= t + 1e-12).collect();
    if samples.len() < 3 || samples.len() % 2 == 0 {
        return Err(Error::InsufficientSamples(format!(
            "Simpson quadrature needs an odd number >= 3 of samples up to t = {t}, got {}",
            samples.len()
        )));
    }
    let times: Vec<f64> = samples.iter().map(|s| to_f64(s.time())).collect();
    let h = uniform_step(&times)?;
    let rates: Vec<Complex<f64>> = samples
        .iter()
        .map(|s| {
            let z = psi_sum(s, weight);
            Complex::new(0.0, 0.5 * sign as f64) * Complex::new(to_f64(z.re), to_f64(z.im))
        })
        .collect();
    let re: Vec<f64> = rates.iter().map(|z| z.re).collect();
    let flux = simpson(&re, h)?;
    let e0 = to_f64(energy_e(samples[0], weight));
    let e1 = to_f64(energy_e(samples[samples.len() - 1], weight));
    Ok(FluxReport {
        t: times[times.len() - 1],
        e0,
        e1,
        flux,
        residual: (e1 - e0 - flux).abs(),
        max_imag: rates.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        dt_sample: h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmtReport {
    /// Largest `|Psi| (M^2 + n*^2) / (a(n*) |h1 h3|)`.
    pub constant: f64,
    pub worst: Quadruple,
    pub samples: usize,
}

/// Samples `Psi` at `n4 = n*`, `n1 = n* + h1`, `n3 = n* + h3` with
/// `0 < |h1|, |h3| <= n*/8`, for `8 <= n* <= n_max`, and measures the
/// constant in `|Psi| <~ |a''(n*)| |h1 h3|` with `|a''| <~ a / (M^2 + xi^2)`.
pub fn dmt_check(sym: &EnergySymbol, n_max: i64) -> DmtReport {
    let m = sym.m as f64;
    let results: Vec<(f64, Quadruple, usize)> = (8..=n_max.max(8))
        .into_par_iter()
        .map(|ns| {
            let r = ns / 8;
            let mut best = (0.0, Quadruple { n1: ns, n2: ns, n3: ns, n4: ns }, 0);
            for h1 in -r..=r {
                for h3 in -r..=r {
                    if h1 == 0 || h3 == 0 {
                        continue;
                    }
                    let q = Quadruple { n1: ns + h1, n2: ns + h1 + h3, n3: ns + h3, n4: ns };
                    let star = q.max_abs() as f64;
                    let v = psi(&q, sym).abs() * (m * m + star * star) / (sym.eval(star) * (h1 * h3).abs() as f64);
                    best.2 += 1;
                    if v > best.0 {
                        best.0 = v;
                        best.1 = q;
                    }
                }
            }
            best
        })
        .collect();
    let samples = results.iter().map(|r| r.2).sum();
    let (constant, worst, _) = results
        .into_iter()
        .fold((0.0, Quadruple { n1: 0, n2: 0, n3: 0, n4: 0 }, 0), |a, b| if b.0 > a.0 { b } else { a });
    DmtReport { constant, worst, samples }
}
