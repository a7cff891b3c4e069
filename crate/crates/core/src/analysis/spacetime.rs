use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::linear_propagate;
use crate::error::{Error, Result};
use crate::initial::random_state;
use crate::scalar::{c, to_f64, Real};
use crate::spectral::{l2_norm, FourierState};

/// `n_t` equally spaced times `j T_w / n_t` on a periodized window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    pub cutoff: usize,
    pub t_w: f64,
    pub n_t: usize,
}

impl SpaceTimeGrid {
    pub fn new(cutoff: usize, t_w: f64, n_t: usize) -> Result<Self> {
        if n_t == 0 || n_t % 2 != 0 {
            return Err(Error::InvalidParameter(format!("n_t must be even and positive, got {n_t}")));
        }
        if !(t_w > 0.0 && t_w.is_finite()) {
            return Err(Error::InvalidParameter(format!("window length must be positive, got {t_w}")));
        }
        Ok(Self { cutoff, t_w, n_t })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_t).map(move |j| j as f64 * self.t_w / self.n_t as f64)
    }

    /// Temporal frequency of DFT bin `m`, `m` in `-n_t/2 .. n_t/2`.
    pub fn tau(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.t_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    /// Periodic Hann window, rescaled to unit mean square.
    Hann,
}

impl Window {
    fn weights(&self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::Hann => {
                let w: Vec<f64> = (0..n).map(|j| (PI * j as f64 / n as f64).sin().powi(2)).collect();
                let rms = (w.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
                w.into_iter().map(|x| x / rms).collect()
            }
        }
    }
}

/// Samples of a space-time field on a [`SpaceTimeGrid`].
#[derive(Debug, Clone)]
pub struct SpaceTimeField<T> {
    pub grid: SpaceTimeGrid,
    samples: Vec<FourierState<T>>,
}

impl<T: Real> SpaceTimeField<T> {
    pub fn from_samples(grid: SpaceTimeGrid, samples: Vec<FourierState<T>>) -> Result<Self> {
        if samples.len() != grid.n_t {
            return Err(Error::SizeMismatch { expected: grid.n_t, got: samples.len() });
        }
        if let Some(s) = samples.iter().find(|s| s.cutoff() != grid.cutoff) {
            return Err(Error::SizeMismatch { expected: grid.cutoff, got: s.cutoff() });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: SpaceTimeGrid, f: impl Fn(f64) -> FourierState<T>) -> Result<Self> {
        Self::from_samples(grid, grid.times().map(f).collect())
    }

    /// `S(t) f` on the grid.
    pub fn linear(grid: SpaceTimeGrid, f: &FourierState<T>) -> Result<Self> {
        Self::from_fn(grid, |t| linear_propagate(f, c(t)))
    }

    pub fn samples(&self) -> &[FourierState<T>] {
        &self.samples
    }

    /// Coefficients `c(n, m)` with `u(t_j)_n = sum_m c(n, m) e^{i tau_m t_j}`,
    /// indexed `[n + N][m + n_t/2]`.
    pub fn transform(&self, window: Window) -> Vec<Vec<Complex<f64>>> {
        let nt = self.grid.n_t;
        let w = window.weights(nt);
        let fft = FftPlanner::<f64>::new().plan_fft_forward(nt);
        let big = self.grid.cutoff as i64;
        (-big..=big)
            .map(|n| {
                let mut buf: Vec<Complex<f64>> = self
                    .samples
                    .iter()
                    .zip(&w)
                    .map(|(s, wj)| {
                        let z = s.get(n);
                        Complex::new(to_f64(z.re), to_f64(z.im)) * *wj
                    })
                    .collect();
                fft.process(&mut buf);
                (0..nt).map(|k| buf[(k + nt / 2) % nt] / nt as f64).collect()
            })
            .collect()
    }
}

/// `||<n>^s <tau + n^4>^b c(n, tau)||_{l^2}` with the coefficients of
/// [`SpaceTimeField::transform`].
pub fn xsb_norm<T: Real>(field: &SpaceTimeField<T>, s: f64, b: f64, window: Window) -> f64 {
    let coeffs = field.transform(window);
    let big = field.grid.cutoff as i64;
    let half = (field.grid.n_t / 2) as i64;
    let mut acc = 0.0;
    for n in -big..=big {
        let row = &coeffs[(n + big) as usize];
        let wn = (1.0 + (n * n) as f64).powf(s);
        let n4 = (n * n * n * n) as f64;
        for m in -half..half {
            let tau = field.grid.tau(m);
            let wt = (1.0 + (tau + n4).powi(2)).powf(b);
            acc += wn * wt * row[(m + half) as usize].norm_sqr();
        }
    }
    acc.sqrt()
}

/// `(mean_j sum_n <n>^{2s} |u(t_j)_n|^2)^{1/2}`, the space-time `L^2` norm with
/// normalized measure.
pub fn spacetime_l2<T: Real>(field: &SpaceTimeField<T>, s: f64) -> f64 {
    let total: f64 = field
        .samples
        .iter()
        .map(|u| u.modes().map(|(n, z)| (1.0 + (n * n) as f64).powf(s) * to_f64(z.norm_sqr())).sum::<f64>())
        .sum();
    (total / field.grid.n_t as f64).sqrt()
}

/// Ceiling on the number of monomials grouped for `p = 6`.
pub const STRICHARTZ6_MAX_TERMS: usize = 5_000_000;

/// `int_0^T e^{-i d t} dt`.
fn kernel(d: f64, t: f64) -> Complex<f64> {
    if d == 0.0 {
        Complex::new(t, 0.0)
    } else {
        let (s, co) = (d * t).sin_cos();
        Complex::new(s / d, (co - 1.0) / d)
    }
}

/// `int_0^T int_0^{2pi} |S(t) f|^p dx dt` for `p = 4, 6`, exactly: `S(t)f^{p/2}`
/// is expanded into monomials `C e^{i(kx - omega t)}` grouped by `(k, omega)`,
/// and the time integrals are done in closed form.
fn lp_power(f: &FourierState<f64>, p: u32, t_w: f64) -> Result<f64> {
    let modes: Vec<(i64, Complex<f64>)> = f.modes().filter(|(_, z)| z.norm_sqr() > 0.0).collect();
    let q4 = |n: i64| (n as i128).pow(4);
    let mut terms: Vec<(i64, i128, Complex<f64>)> = match p {
        4 => {
            let mut v = Vec::with_capacity(modes.len() * modes.len());
            for &(a, za) in &modes {
                for &(b, zb) in &modes {
                    v.push((a + b, q4(a) + q4(b), za * zb));
                }
            }
            v
        }
        6 => {
            let count = modes.len().pow(3);
            if count > STRICHARTZ6_MAX_TERMS {
                return Err(Error::Budget { cost: count as f64, budget: STRICHARTZ6_MAX_TERMS as f64 });
            }
            let mut v = Vec::with_capacity(count);
            for &(a, za) in &modes {
                for &(b, zb) in &modes {
                    for &(d, zd) in &modes {
                        v.push((a + b + d, q4(a) + q4(b) + q4(d), za * zb * zd));
                    }
                }
            }
            v
        }
        _ => return Err(Error::InvalidParameter(format!("only p = 4 and p = 6 are supported, got {p}"))),
    };
    terms.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut grouped: Vec<(i64, i128, Complex<f64>)> = Vec::new();
    for (k, w, z) in terms {
        match grouped.last_mut() {
            Some(last) if last.0 == k && last.1 == w => last.2 += z,
            _ => grouped.push((k, w, z)),
        }
    }
    let mut blocks: Vec<&[(i64, i128, Complex<f64>)]> = Vec::new();
    let mut start = 0;
    for i in 1..=grouped.len() {
        if i == grouped.len() || grouped[i].0 != grouped[start].0 {
            blocks.push(&grouped[start..i]);
            start = i;
        }
    }
    let total: f64 = blocks
        .par_iter()
        .map(|blk| {
            let mut acc = 0.0;
            for (i, a) in blk.iter().enumerate() {
                acc += a.2.norm_sqr() * t_w;
                for b in &blk[i + 1..] {
                    acc += 2.0 * (a.2 * b.2.conj() * kernel((a.1 - b.1) as f64, t_w)).re;
                }
            }
            acc
        })
        .sum();
    Ok(2.0 * PI * total)
}

/// `||S(t) f||_{L^p(T x [0, T_w])} / ||f||_{l^2}` with the measure `dx dt`.
pub fn strichartz_ratio<T: Real>(f: &FourierState<T>, p: u32, t_w: f64) -> Result<f64> {
    if !(t_w > 0.0 && t_w.is_finite()) {
        return Err(Error::InvalidParameter(format!("window length must be positive, got {t_w}")));
    }
    let norm = to_f64(l2_norm(f));
    if norm == 0.0 {
        return Err(Error::InvalidParameter("Strichartz ratio of the zero state".into()));
    }
    let g = FourierState::from_fn(f.cutoff(), |n| {
        let z = f.get(n);
        Complex::new(to_f64(z.re) / norm, to_f64(z.im) / norm)
    });
    Ok(lp_power(&g, p, t_w)?.max(0.0).powf(1.0 / p as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSweep {
    pub cutoff: usize,
    pub p: u32,
    pub t_w: f64,
    pub samples: usize,
    pub sup: f64,
    pub mean: f64,
    pub argmax_seed: u64,
}

/// Ratios over `samples` seeded Gaussian data (seeds `seed0..seed0 + samples`).
pub fn strichartz_sweep(cutoff: usize, p: u32, t_w: f64, samples: usize, seed0: u64) -> Result<StrichartzSweep> {
    let ratios: Vec<(u64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let f = random_state::<f64>(cutoff, seed0 + i);
            strichartz_ratio(&f, p, t_w).map(|r| (seed0 + i, r))
        })
        .collect::<Result<_>>()?;
    let (argmax_seed, sup) = ratios.iter().cloned().fold((seed0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let mean = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len().max(1) as f64;
    Ok(StrichartzSweep { cutoff, p, t_w, samples, sup, mean, argmax_seed })
}
