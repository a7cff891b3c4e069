//! Fourier-side states, norms and projections on the circle.
//!
//! The convention is `u(x) = sum_n u_n e^{inx}` with `u_n = (1/2pi) int u e^{-inx}`,
//! so the mean mass of `u` is `sum_n |u_n|^2`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, ci, to_f64, Real};

/// Mode cutoff and size of the padded physical grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub cutoff: usize,
    pub grid_points: usize,
}

impl SpectralConfig {
    /// Smallest power of two with at least `4N + 2` points.
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff, grid_points: (4 * cutoff + 2).next_power_of_two() }
    }

    pub fn with_grid(cutoff: usize, grid_points: usize) -> Result<Self> {
        if grid_points < 4 * cutoff + 2 {
            return Err(Error::InvalidParameter(format!(
                "grid_points = {grid_points} is below 4N+2 = {}",
                4 * cutoff + 2
            )));
        }
        Ok(Self { cutoff, grid_points })
    }

    pub fn modes(&self) -> usize {
        2 * self.cutoff + 1
    }
}

/// Complex amplitudes `u_n`, `|n| <= N`, stored at index `n + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState<T> {
    cutoff: usize,
    time: T,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FourierState<T> {
    pub fn zeros(cutoff: usize) -> Self {
        Self { cutoff, time: T::zero(), coeffs: vec![Complex::new(T::zero(), T::zero()); 2 * cutoff + 1] }
    }

    pub fn from_coeffs(cutoff: usize, time: T, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::SizeMismatch { expected: 2 * cutoff + 1, got: coeffs.len() });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(to_f64(time)));
        }
        Ok(Self { cutoff, time, coeffs })
    }

    /// Builds a state from a closure evaluated at every mode.
    pub fn from_fn(cutoff: usize, mut f: impl FnMut(i64) -> Complex<T>) -> Self {
        let n = cutoff as i64;
        Self { cutoff, time: T::zero(), coeffs: (-n..=n).map(&mut f).collect() }
    }

    pub fn single_mode(cutoff: usize, mode: i64, amp: Complex<T>) -> Self {
        let mut s = Self::zeros(cutoff);
        s.set(mode, amp);
        s
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn with_time(mut self, t: T) -> Self {
        self.time = t;
        self
    }

    pub fn set_time(&mut self, t: T) {
        self.time = t;
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Amplitude at mode `n`; zero outside the box.
    #[inline]
    pub fn get(&self, n: i64) -> Complex<T> {
        let idx = n + self.cutoff as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Sets mode `n`. Panics outside the box.
    pub fn set(&mut self, n: i64, z: Complex<T>) {
        let idx = n + self.cutoff as i64;
        assert!(idx >= 0 && (idx as usize) < self.coeffs.len(), "mode {n} outside |n| <= {}", self.cutoff);
        self.coeffs[idx as usize] = z;
    }

    /// Iterator over `(n, u_n)`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let n0 = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, z)| (i as i64 - n0, *z))
    }

    pub fn map(&self, mut f: impl FnMut(i64, Complex<T>) -> Complex<T>) -> Self {
        let n0 = self.cutoff as i64;
        Self {
            cutoff: self.cutoff,
            time: self.time,
            coeffs: self.coeffs.iter().enumerate().map(|(i, z)| f(i as i64 - n0, *z)).collect(),
        }
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        self.map(|_, z| z * a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same(self, other)?;
        Ok(self.map(|n, z| z - other.get(n)))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StateJson::from(self)).expect("state serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: StateJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        j.try_into()
    }
}

pub(crate) fn check_same<T: Real>(a: &FourierState<T>, b: &FourierState<T>) -> Result<()> {
    if a.cutoff != b.cutoff {
        return Err(Error::SizeMismatch { expected: a.coeffs.len(), got: b.coeffs.len() });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    #[serde(rename = "N")]
    n: usize,
    t: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl<T: Real> From<&FourierState<T>> for StateJson {
    fn from(s: &FourierState<T>) -> Self {
        Self {
            n: s.cutoff,
            t: to_f64(s.time),
            re: s.coeffs.iter().map(|z| to_f64(z.re)).collect(),
            im: s.coeffs.iter().map(|z| to_f64(z.im)).collect(),
        }
    }
}

impl<T: Real> TryFrom<StateJson> for FourierState<T> {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::SizeMismatch { expected: j.re.len(), got: j.im.len() });
        }
        let coeffs = j.re.iter().zip(&j.im).map(|(&a, &b)| Complex::new(c(a), c(b))).collect();
        FourierState::from_coeffs(j.n, c(j.t), coeffs)
    }
}

/// Cached forward/inverse transforms for one grid size.
pub struct Transform<T: Real> {
    cfg: SpectralConfig,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Transform<T> {
    pub fn new(cfg: SpectralConfig) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            cfg,
            forward: planner.plan_fft_forward(cfg.grid_points),
            inverse: planner.plan_fft_inverse(cfg.grid_points),
        }
    }

    pub fn config(&self) -> SpectralConfig {
        self.cfg
    }

    pub fn to_physical(&self, state: &FourierState<T>) -> Result<Vec<Complex<T>>> {
        if state.cutoff != self.cfg.cutoff {
            return Err(Error::SizeMismatch { expected: self.cfg.modes(), got: state.coeffs.len() });
        }
        let l = self.cfg.grid_points;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); l];
        for (n, z) in state.modes() {
            buf[n.rem_euclid(l as i64) as usize] = z;
        }
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Keeps the modes `|n| <= N` of the sampled function.
    pub fn to_spectral(&self, samples: &[Complex<T>], time: T) -> Result<FourierState<T>> {
        let l = self.cfg.grid_points;
        if samples.len() != l {
            return Err(Error::SizeMismatch { expected: l, got: samples.len() });
        }
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let inv = T::one() / ci(l as i64);
        let n = self.cfg.cutoff as i64;
        let coeffs = (-n..=n).map(|k| buf[k.rem_euclid(l as i64) as usize] * inv).collect();
        FourierState::from_coeffs(self.cfg.cutoff, time, coeffs)
    }
}

/// Samples `u(x_k)`, `x_k = 2 pi k / L`.
pub fn to_physical<T: Real>(state: &FourierState<T>, cfg: &SpectralConfig) -> Result<Vec<Complex<T>>> {
    Transform::new(*cfg).to_physical(state)
}

pub fn to_spectral<T: Real>(samples: &[Complex<T>], cfg: &SpectralConfig) -> Result<FourierState<T>> {
    Transform::new(*cfg).to_spectral(samples, T::zero())
}

/// `||f||_{H^s_M} = || (M^2 + n^2)^{s/2} f_n ||_{l^2}`.
pub fn hs_norm<T: Real>(state: &FourierState<T>, s: T, m: T) -> T {
    let m2 = m * m;
    state
        .modes()
        .map(|(n, z)| {
            let n = ci::<T>(n);
            (m2 + n * n).powf(s) * z.norm_sqr()
        })
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// `(sum |u_n|^2)^{1/2}`.
pub fn l2_norm<T: Real>(state: &FourierState<T>) -> T {
    state.coeffs.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}

/// Zeroes every mode outside `lo..=hi`.
pub fn project<T: Real>(state: &FourierState<T>, lo: i64, hi: i64) -> FourierState<T> {
    let zero = Complex::new(T::zero(), T::zero());
    state.map(|n, z| if n >= lo && n <= hi { z } else { zero })
}

/// Keeps the band `lo <= |n| <= hi`.
pub fn project_band<T: Real>(state: &FourierState<T>, lo: i64, hi: i64) -> FourierState<T> {
    let zero = Complex::new(T::zero(), T::zero());
    state.map(|n, z| if n.abs() >= lo && n.abs() <= hi { z } else { zero })
}

/// Dyadic blocks adapted to `M` (a power of two): `|n| < M`, then
/// `2^{k-1} <= |n| < 2^k` for `2^{k-1} >= M`, as inclusive `(lo, hi)` bands
/// covering `|n| <= N`.
pub fn dyadic_blocks(cutoff: usize, m: u64) -> Vec<(i64, i64)> {
    let n = cutoff as i64;
    let m = m.max(1) as i64;
    let mut out = vec![(0, (m - 1).min(n))];
    let mut lo = m;
    while lo <= n {
        out.push((lo, (2 * lo - 1).min(n)));
        lo *= 2;
    }
    out
}

/// Time-ordered samples of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    samples: Vec<FourierState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(samples: Vec<FourierState<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientSamples("empty trajectory".into()));
        }
        let n = samples[0].cutoff;
        for w in samples.windows(2) {
            if w[1].cutoff != n {
                return Err(Error::SizeMismatch { expected: 2 * n + 1, got: w[1].coeffs.len() });
            }
            if !(w[1].time > w[0].time) {
                return Err(Error::InvalidParameter("sample times must increase strictly".into()));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[FourierState<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.samples[0].cutoff
    }

    pub fn first(&self) -> &FourierState<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &FourierState<T> {
        self.samples.last().expect("non-empty")
    }

    /// Spacing between consecutive samples (first gap).
    pub fn dt_sample(&self) -> Option<T> {
        (self.samples.len() > 1).then(|| self.samples[1].time - self.samples[0].time)
    }

    /// Every `k`-th sample.
    pub fn subsample(&self, k: usize) -> Result<Self> {
        Self::new(self.samples.iter().step_by(k.max(1)).cloned().collect())
    }

    pub fn map(&self, f: impl FnMut(&FourierState<T>) -> FourierState<T>) -> Self {
        Self { samples: self.samples.iter().map(f).collect() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.samples.iter().map(|s| s.to_json()).collect())
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("trajectory must be a JSON array".into()))?;
        Self::new(arr.iter().map(FourierState::from_json).collect::<Result<_>>()?)
    }
}
