//! Dyadically localized energy weights `a(xi)`: piecewise linear between the
//! dyadic points `2^k >= M`, with each corner rounded off by a convolution
//! against a rescaled bump.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::simpson;

const PLATEAU: f64 = 1.25;
const SUPPORT: f64 = 1.6;
const CELLS: usize = 2048;
const SUB: usize = 8;

fn smooth_step(t: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

/// Even bump, `1` on `[-5/4, 5/4]` and `0` outside `(-8/5, 8/5)`.
pub fn eta0(x: f64) -> f64 {
    smooth_step((SUPPORT - x.abs()) / (SUPPORT - PLATEAU))
}

/// Cumulative integrals of `c0 eta0(z)` and `c0 z eta0(z)` from `-8/5`,
/// tabulated and evaluated by cubic Hermite interpolation.
#[derive(Debug)]
pub struct Mollifier {
    pub c0: f64,
    h: f64,
    cum0: Vec<f64>,
    cum1: Vec<f64>,
}

impl Mollifier {
    fn build() -> Self {
        let h = 2.0 * SUPPORT / CELLS as f64;
        let mut cum0 = vec![0.0; CELLS + 1];
        let mut cum1 = vec![0.0; CELLS + 1];
        for i in 0..CELLS {
            let a = -SUPPORT + i as f64 * h;
            let xs: Vec<f64> = (0..=SUB).map(|j| a + j as f64 * h / SUB as f64).collect();
            let v0: Vec<f64> = xs.iter().map(|&x| eta0(x)).collect();
            let v1: Vec<f64> = xs.iter().map(|&x| x * eta0(x)).collect();
            cum0[i + 1] = cum0[i] + simpson(&v0, h / SUB as f64).expect("odd sample count");
            cum1[i + 1] = cum1[i] + simpson(&v1, h / SUB as f64).expect("odd sample count");
        }
        let c0 = 1.0 / cum0[CELLS];
        for v in cum0.iter_mut().chain(cum1.iter_mut()) {
            *v *= c0;
        }
        Self { c0, h, cum0, cum1 }
    }

    pub fn shared() -> &'static Mollifier {
        static CELL: OnceLock<Mollifier> = OnceLock::new();
        CELL.get_or_init(Self::build)
    }

    fn hermite(&self, table: &[f64], deriv: impl Fn(f64) -> f64, z: f64) -> f64 {
        let pos = ((z + SUPPORT) / self.h).clamp(0.0, CELLS as f64);
        let i = (pos.floor() as usize).min(CELLS - 1);
        let t = pos - i as f64;
        let z0 = -SUPPORT + i as f64 * self.h;
        let (y0, y1) = (table[i], table[i + 1]);
        let (d0, d1) = (deriv(z0) * self.h, deriv(z0 + self.h) * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    /// `int_{-inf}^z c0 eta0`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= -SUPPORT {
            0.0
        } else if z >= SUPPORT {
            1.0
        } else {
            self.hermite(&self.cum0, |x| self.c0 * eta0(x), z)
        }
    }

    /// `int_{-inf}^z c0 y eta0(y) dy`; vanishes outside the support.
    pub fn first_moment(&self, z: f64) -> f64 {
        if z.abs() >= SUPPORT {
            0.0
        } else {
            self.hermite(&self.cum1, |x| self.c0 * x * eta0(x), z)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub s: f64,
    pub delta0: Option<f64>,
    pub k0: u32,
    pub m: u64,
}

/// The weight `a(xi)` for parameters `s < 0`, `delta0`, `k0` and dyadic `M`.
#[derive(Debug, Clone, Copy)]
pub struct EnergySymbol {
    pub s: f64,
    pub delta0: f64,
    pub k0: u32,
    pub m: u64,
    k_min: u32,
    moll: &'static Mollifier,
}

/// `min(1/8, |s|/4)`.
pub fn default_delta0(s: f64) -> f64 {
    (0.125f64).min(s.abs() / 4.0)
}

/// Value and first two derivatives of the mollified corner at `p + d`.
struct Corner {
    value: f64,
    d1: f64,
    d2: f64,
}

impl EnergySymbol {
    pub fn new(s: f64, delta0: f64, k0: u32, m: u64) -> Result<Self> {
        if !(s < 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("s must be negative, got {s}")));
        }
        if !(delta0 > 0.0 && delta0 <= 0.25) {
            return Err(Error::InvalidParameter(format!("delta0 must lie in (0, 1/4], got {delta0}")));
        }
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("M must be a power of two, got {m}")));
        }
        let k_min = m.trailing_zeros();
        if k0 < k_min || k0 > 60 {
            return Err(Error::InvalidParameter(format!("need 2^k0 >= M with k0 <= 60, got k0 = {k0}, M = {m}")));
        }
        Ok(Self { s, delta0, k0, m, k_min, moll: Mollifier::shared() })
    }

    pub fn from_params(p: &SymbolParams) -> Result<Self> {
        Self::new(p.s, p.delta0.unwrap_or_else(|| default_delta0(p.s)), p.k0, p.m)
    }

    pub fn params(&self) -> SymbolParams {
        SymbolParams { s: self.s, delta0: Some(self.delta0), k0: self.k0, m: self.m }
    }

    /// `2^{2sk} 2^{-delta0 |k - k0|}`, the value at `|xi| = 2^k`.
    pub fn dyadic_value(&self, k: u32) -> f64 {
        (2.0 * self.s * k as f64 - self.delta0 * (k as f64 - self.k0 as f64).abs()).exp2()
    }

    fn dyadic_index(&self, x: f64) -> u32 {
        let mut k = x.log2().floor().max(self.k_min as f64) as u32;
        while (k as f64).exp2() > x && k > self.k_min {
            k -= 1;
        }
        while ((k + 1) as f64).exp2() <= x {
            k += 1;
        }
        k
    }

    /// The unsmoothed piecewise linear weight.
    pub fn raw(&self, xi: f64) -> f64 {
        let x = xi.abs();
        if x <= self.m as f64 {
            return self.dyadic_value(self.k_min);
        }
        let k = self.dyadic_index(x);
        let p = (k as f64).exp2();
        let (a, b) = (self.dyadic_value(k), self.dyadic_value(k + 1));
        a + (b - a) * (x - p) / p
    }

    fn corner(&self, x: f64) -> Option<Corner> {
        if x < 0.75 * self.m as f64 {
            return None;
        }
        let k = self.dyadic_index(x);
        for kk in [k, k + 1] {
            let p = (kk as f64).exp2();
            let d = x - p;
            if d.abs() > p / 4.0 {
                continue;
            }
            let a = self.dyadic_value(kk);
            let beta_l = if kk == self.k_min { 0.0 } else { (a - self.dyadic_value(kk - 1)) / (p / 2.0) };
            let beta_r = (self.dyadic_value(kk + 1) - a) / p;
            let z = 10.0 * d / p;
            let f = self.moll.cdf(z);
            let g = p / 10.0 * self.moll.first_moment(z);
            let theta = 10.0 * self.moll.c0 / p * eta0(z);
            return Some(Corner {
                value: a + beta_r * (d * f - g) + beta_l * (d * (1.0 - f) + g),
                d1: beta_r * f + beta_l * (1.0 - f),
                d2: (beta_r - beta_l) * theta,
            });
        }
        None
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let x = xi.abs();
        match self.corner(x) {
            Some(c) => c.value,
            None => self.raw(x),
        }
    }

    /// Exact first derivative.
    pub fn d1(&self, xi: f64) -> f64 {
        let x = xi.abs();
        let v = match self.corner(x) {
            Some(c) => c.d1,
            None if x <= self.m as f64 => 0.0,
            None => {
                let k = self.dyadic_index(x);
                (self.dyadic_value(k + 1) - self.dyadic_value(k)) / (k as f64).exp2()
            }
        };
        if xi < 0.0 {
            -v
        } else {
            v
        }
    }

    /// Exact second derivative.
    pub fn d2(&self, xi: f64) -> f64 {
        self.corner(xi.abs()).map_or(0.0, |c| c.d2)
    }

    /// `(xi, a(xi))` on a uniform grid of `[lo, hi]`.
    pub fn tabulate(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        let n = points.max(2);
        (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (x, self.eval(x))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub params: SymbolParams,
    /// `max |a'| (M^2 + xi^2)^{1/2} / a` by central differences.
    pub gamma1: f64,
    pub gamma1_at: f64,
    /// `max |a''| (M^2 + xi^2) / a` by central differences.
    pub gamma2: f64,
    pub gamma2_at: f64,
    /// Largest `max a / min a` over a dyadic block.
    pub comparability: f64,
    pub comparability_at: f64,
    /// Largest `|a(xi) - a(0)|` over `|xi| <= M/2`.
    pub constancy_defect: f64,
    /// Largest `|a(xi) - a(-xi)|`.
    pub symmetry_defect: f64,
    pub min_value: f64,
    pub xi_max: f64,
}

/// Measures the derivative and comparability constants of `sym` on `[0, xi_max]`.
pub fn symbol_check(sym: &EnergySymbol, xi_max: f64, points: usize) -> SymbolReport {
    let m = sym.m as f64;
    let points = points.max(16);
    let mut rep = SymbolReport {
        params: sym.params(),
        gamma1: 0.0,
        gamma1_at: 0.0,
        gamma2: 0.0,
        gamma2_at: 0.0,
        comparability: 1.0,
        comparability_at: 0.0,
        constancy_defect: 0.0,
        symmetry_defect: 0.0,
        min_value: f64::INFINITY,
        xi_max,
    };
    let a0 = sym.eval(0.0);
    for i in 0..=points {
        let x = xi_max * i as f64 / points as f64;
        let a = sym.eval(x);
        rep.min_value = rep.min_value.min(a);
        rep.symmetry_defect = rep.symmetry_defect.max((a - sym.eval(-x)).abs());
        if x <= m / 2.0 {
            rep.constancy_defect = rep.constancy_defect.max((a - a0).abs());
        }
        let h = 1e-3 * (m * m + x * x).sqrt();
        let (ap, am) = (sym.eval(x + h), sym.eval(x - h));
        let w = (m * m + x * x).sqrt();
        let g1 = ((ap - am) / (2.0 * h)).abs() * w / a;
        let g2 = ((ap - 2.0 * a + am) / (h * h)).abs() * w * w / a;
        if g1 > rep.gamma1 {
            rep.gamma1 = g1;
            rep.gamma1_at = x;
        }
        if g2 > rep.gamma2 {
            rep.gamma2 = g2;
            rep.gamma2_at = x;
        }
    }
    let mut lo = 0.0;
    let mut hi = m;
    while lo < xi_max {
        let samples = 256;
        let vals: Vec<f64> = (0..=samples).map(|i| sym.eval(lo + (hi - lo) * i as f64 / samples as f64)).collect();
        let max = vals.iter().cloned().fold(f64::MIN, f64::max);
        let min = vals.iter().cloned().fold(f64::MAX, f64::min);
        if max / min > rep.comparability {
            rep.comparability = max / min;
            rep.comparability_at = lo;
        }
        lo = hi;
        hi *= 2.0;
    }
    rep
}
