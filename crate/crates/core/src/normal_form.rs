//! Finite-depth normal-form expansion of `d/dt |w_n|^2` for the Wick-ordered
//! equation in interaction variables `w_n = e^{itn^4} u_n`, which satisfy
//!
//! `d/dt w^c_b = -ic sum_{Gamma(b)} e^{-ic phi t} w^c_1 w^{-c}_2 w^c_3 + ic |w_b|^2 w^c_b`
//!
//! (`c = +1` plain, `c = -1` conjugate). Starting from the Gamma-sum for
//! `d/dt |w_n|^2`, every term whose accumulated phase is too large to stop is
//! integrated by parts: it produces a boundary term (`N0`), a resonant
//! insertion (`R`) and a next-generation sum, which is split again into the
//! part that stops (`N1`) and the part that continues (`N2`).
//!
//! A term after `L` splits carries `-i rho e^{-i Phi t} prod(terminals)` with
//! `rho_1 = 1`, `rho_{L+1} = -c_b rho_L / Phi_L` and `Phi_{L+1} = Phi_L + c_b phi`,
//! where `b` is the split terminal. The last generation is summed through
//! per-mode tables sorted by phase, so its cost does not multiply the tree count.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitree::cardinality;
use crate::dynamics::{interaction_rep, nonresonant_n};
use crate::error::{Error, Result};
use crate::phase::{gamma_enumerate, phi_unchecked, ResonantTuple, MAX_FREQ};
use crate::quadrature::{simpson, uniform_step};
use crate::scalar::{c, ci, to_f64, Real};
use crate::spectral::{check_same, l2_norm, FourierState, Trajectory};

/// Default ceiling on `(2N+1)^{2J} c_J`.
pub const DEFAULT_BUDGET: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NFConfig {
    /// Number of differentiation-by-parts steps `J`.
    pub depth: usize,
    /// First-generation threshold `K`.
    pub k: f64,
    pub theta: f64,
    pub box_n: usize,
    /// Implicit constant in front of the generation thresholds.
    #[serde(default = "unit")]
    pub threshold_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl NFConfig {
    pub fn new(depth: usize, k: f64, theta: f64, box_n: usize) -> Result<Self> {
        let cfg = Self { depth, k, theta, box_n, threshold_scale: 1.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_threshold_scale(self, scale: f64) -> Result<Self> {
        let cfg = Self { threshold_scale: scale, ..self };
        cfg.validate_params()?;
        Ok(cfg)
    }

    /// Stop threshold used for generation `j` (see [`threshold`]).
    pub fn threshold(&self, j: usize, phi_prev: i64, phi_1: i64) -> f64 {
        self.threshold_scale * threshold(j, phi_prev, phi_1, self.theta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth J must be at least 1".into()));
        }
        self.validate_params()
    }

    fn validate_params(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParameter(format!("K must be positive, got {}", self.k)));
        }
        if !(self.theta > 0.0 && self.theta <= 2.0 / 3.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, 2/3], got {}", self.theta)));
        }
        if !(self.threshold_scale > 0.0 && self.threshold_scale.is_finite()) {
            return Err(Error::InvalidParameter("threshold_scale must be positive".into()));
        }
        if self.box_n as i64 > MAX_FREQ / 4 {
            return Err(Error::InvalidParameter(format!("box_N = {} too large", self.box_n)));
        }
        Ok(())
    }

    /// `(2N+1)^{2J} c_J`, the number of index assignments summed at depth `J`.
    pub fn cost_estimate(&self) -> f64 {
        let j = self.depth.max(1) as u32;
        ((2 * self.box_n + 1) as f64).powi(2 * j as i32) * cardinality(j) as f64
    }

    pub fn check_budget(&self, budget: f64) -> Result<()> {
        let cost = self.cost_estimate();
        if cost > budget {
            return Err(Error::Budget { cost, budget });
        }
        Ok(())
    }

    fn with_depth(&self, depth: usize) -> Self {
        Self { depth, ..*self }
    }
}

/// `|phi_1| <= K`.
pub fn in_a_k(t: &ResonantTuple, k: f64) -> Result<bool> {
    Ok((crate::phase::phi(t)?.unsigned_abs() as f64) <= k)
}

/// Stop threshold for the phase created at generation `j >= 2`:
/// `(2j+2)^3 max(|Phi_{j-1}|, |phi_1|)^{1-theta}`.
pub fn threshold(j: usize, phi_prev: i64, phi_1: i64, theta: f64) -> f64 {
    let base = phi_prev.unsigned_abs().max(phi_1.unsigned_abs()) as f64;
    ((2 * j + 2) as f64).powi(3) * base.powf(1.0 - theta)
}

/// Whether the generation-`j` phase `phi_tilde_next` stops the expansion.
pub fn in_c_j(j: usize, phi_tilde_next: i64, phi_tilde_prev: i64, phi_1: i64, theta: f64) -> bool {
    (phi_tilde_next.unsigned_abs() as f64) <= threshold(j, phi_tilde_prev, phi_1, theta)
}

fn floor_bound(x: f64) -> i64 {
    if x >= 4e18 {
        i64::MAX / 4
    } else {
        x.floor() as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormId {
    /// Boundary term.
    N0,
    /// Resonant insertion.
    R,
    /// Part of the next-generation sum that stops.
    N1,
    /// Part that continues; at the last generation this is the error term.
    N2,
}

impl FormId {
    pub fn name(&self) -> &'static str {
        match self {
            Self::N0 => "N0",
            Self::R => "R",
            Self::N1 => "N1",
            Self::N2 => "N2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "N0" => Ok(Self::N0),
            "R" => Ok(Self::R),
            "N1" => Ok(Self::N1),
            "N2" => Ok(Self::N2),
            _ => Err(Error::Parse(format!("unknown form {s:?}"))),
        }
    }
}

/// Per-mode values of one form at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue<T> {
    pub form: FormId,
    pub j: usize,
    pub t: T,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> FormValue<T> {
    pub fn get(&self, n: i64) -> Complex<T> {
        let half = (self.values.len() / 2) as i64;
        self.values[(n + half) as usize]
    }

    pub fn l1(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), |a, b| a + b)
    }
}

/// Every form of an expansion of depth `J`, for each `|n| <= N`.
///
/// Level `j` holds `N0^{(j)}` and `R^{(j)}` for `2 <= j <= J+1` and
/// `N1^{(j)}`, `N2^{(j)}` for `1 <= j <= J+1`; other slots are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FormTable<T> {
    pub depth: usize,
    pub t: T,
    pub cutoff: usize,
    n0: Vec<Vec<T>>,
    n0_abs: Vec<Vec<T>>,
    r: Vec<Vec<T>>,
    n1: Vec<Vec<T>>,
    n2: Vec<Vec<T>>,
}

impl<T: Real> FormTable<T> {
    fn slot(&self, form: FormId) -> &Vec<Vec<T>> {
        match form {
            FormId::N0 => &self.n0,
            FormId::R => &self.r,
            FormId::N1 => &self.n1,
            FormId::N2 => &self.n2,
        }
    }

    /// Values of `form` at level `j` (index `n + N`).
    pub fn values(&self, form: FormId, j: usize) -> &[T] {
        &self.slot(form)[j]
    }

    pub fn value(&self, form: FormId, j: usize, n: i64) -> T {
        self.slot(form)[j][(n + self.cutoff as i64) as usize]
    }

    /// Sum over terms of the absolute boundary contributions at level `j`.
    pub fn n0_abs(&self, j: usize) -> &[T] {
        &self.n0_abs[j]
    }

    pub fn form_value(&self, form: FormId, j: usize) -> FormValue<T> {
        FormValue {
            form,
            j,
            t: self.t,
            values: self.slot(form)[j].iter().map(|&x| Complex::new(x, T::zero())).collect(),
        }
    }

    /// `sum_{j=2}^{J+1} N0^{(j)}(n)`.
    pub fn boundary_total(&self, n: i64) -> T {
        (2..=self.depth + 1).map(|j| self.value(FormId::N0, j, n)).fold(T::zero(), |a, b| a + b)
    }

    /// `sum R^{(j)} + sum_{j=1}^{J+1} N1^{(j)} + N2^{(J+1)}` at mode `n`.
    pub fn integrand_total(&self, n: i64) -> T {
        let mut acc = self.value(FormId::N2, self.depth + 1, n);
        for j in 1..=self.depth + 1 {
            acc = acc + self.value(FormId::N1, j, n);
            if j >= 2 {
                acc = acc + self.value(FormId::R, j, n);
            }
        }
        acc
    }
}

#[derive(Clone)]
struct ModeTable<T> {
    phis: Vec<i64>,
    n1s: Vec<i64>,
    n3s: Vec<i64>,
    raw: Vec<Complex<T>>,
    prefix: Vec<Complex<T>>,
}

impl<T: Real> ModeTable<T> {
    fn build(m: i64, box_n: i64, w: &FourierState<T>, t: T) -> Self {
        let mut rows: Vec<(i64, ResonantTuple)> =
            gamma_enumerate(m, box_n).into_iter().map(|tp| (phi_unchecked(tp.n1, tp.n2, tp.n3, tp.n), tp)).collect();
        rows.sort_by_key(|(p, tp)| (*p, tp.n1, tp.n3));
        let mut table = Self {
            phis: Vec::with_capacity(rows.len()),
            n1s: Vec::with_capacity(rows.len()),
            n3s: Vec::with_capacity(rows.len()),
            raw: Vec::with_capacity(rows.len()),
            prefix: Vec::with_capacity(rows.len() + 1),
        };
        let mut acc = Complex::new(T::zero(), T::zero());
        table.prefix.push(acc);
        for (p, tp) in rows {
            let raw = w.get(tp.n1) * w.get(tp.n2).conj() * w.get(tp.n3);
            acc = acc + raw * phase(p, t);
            table.phis.push(p);
            table.n1s.push(tp.n1);
            table.n3s.push(tp.n3);
            table.raw.push(raw);
            table.prefix.push(acc);
        }
        table
    }

    /// Index range of rows with `lo <= phi <= hi`.
    fn range(&self, lo: i64, hi: i64) -> (usize, usize) {
        let a = self.phis.partition_point(|&p| p < lo);
        let b = self.phis.partition_point(|&p| p <= hi);
        (a, b.max(a))
    }

    fn sum(&self, a: usize, b: usize) -> Complex<T> {
        self.prefix[b] - self.prefix[a]
    }

    fn total(&self) -> Complex<T> {
        self.prefix[self.phis.len()]
    }
}

/// `e^{-i p t}` with the product formed in `f64`.
#[inline]
fn phase<T: Real>(p: i64, t: T) -> Complex<T> {
    let arg = -(p as f64) * to_f64(t);
    Complex::new(c(arg.cos()), c(arg.sin()))
}

#[derive(Clone, Copy)]
struct Leaf<T> {
    freq: i64,
    conj: bool,
    side: usize,
    val: Complex<T>,
}

struct Acc<T> {
    n0: Vec<T>,
    n0_abs: Vec<T>,
    r: Vec<T>,
    n1: Vec<T>,
    n2: Vec<T>,
}

impl<T: Real> Acc<T> {
    fn new(levels: usize) -> Self {
        let z = vec![T::zero(); levels];
        Self { n0: z.clone(), n0_abs: z.clone(), r: z.clone(), n1: z.clone(), n2: z }
    }
}

struct Engine<'a, T: Real> {
    depth: usize,
    cfg: NFConfig,
    t: T,
    box_n: i64,
    w: [&'a FourierState<T>; 2],
    tables: [Vec<ModeTable<T>>; 2],
}

fn two_re<T: Real>(z: Complex<T>) -> T {
    z.re + z.re
}

fn minus_i<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.im, -z.re)
}

impl<'a, T: Real> Engine<'a, T> {
    fn new(u: &'a FourierState<T>, v: &'a FourierState<T>, t: T, cfg: &NFConfig) -> Self {
        let b = cfg.box_n as i64;
        let build = |w: &FourierState<T>| (-b..=b).map(|m| ModeTable::build(m, b, w, t)).collect::<Vec<_>>();
        let same = std::ptr::eq(u, v);
        let tu = build(u);
        let tv = if same { tu.clone() } else { build(v) };
        Self { depth: cfg.depth, cfg: *cfg, t, box_n: b, w: [u, v], tables: [tu, tv] }
    }

    fn table(&self, side: usize, m: i64) -> &ModeTable<T> {
        &self.tables[side][(m + self.box_n) as usize]
    }

    fn leaf(&self, freq: i64, conj: bool, side: usize) -> Leaf<T> {
        let z = self.w[side].get(freq);
        Leaf { freq, conj, side, val: if conj { z.conj() } else { z } }
    }

    fn root(&self, n: i64, k: f64) -> Acc<T> {
        let mut acc = Acc::new(self.depth + 2);
        let r2 = self.leaf(n, true, 1);
        let table = self.table(0, n);
        let pref = minus_i(r2.val);
        let kk = floor_bound(k);
        let (a, b) = table.range(-kk, kk);
        let stop = table.sum(a, b);
        acc.n1[1] = acc.n1[1] + two_re(pref * stop);
        acc.n2[1] = acc.n2[1] + two_re(pref * (table.total() - stop));
        if self.depth >= 1 {
            for idx in (0..a).chain(b..table.phis.len()) {
                let (n1, n3) = (table.n1s[idx], table.n3s[idx]);
                let leaves = vec![r2, self.leaf(n1, false, 0), self.leaf(n1 + n3 - n, true, 0), self.leaf(n3, false, 0)];
                let p = table.phis[idx];
                self.expand(&leaves, p, T::one(), p, 1, &mut acc);
            }
        }
        acc
    }

    /// Integrates by parts a continuing term with `level` splits.
    fn expand(&self, leaves: &[Leaf<T>], big_phi: i64, rho: T, phi1: i64, level: usize, acc: &mut Acc<T>) {
        let next = level + 1;
        let e = phase(big_phi, self.t);
        let inv_phi = T::one() / ci::<T>(big_phi);
        let count = leaves.len();
        let mut prefix = Vec::with_capacity(count + 1);
        prefix.push(Complex::new(T::one(), T::zero()));
        for l in leaves {
            let last = *prefix.last().expect("non-empty");
            prefix.push(last * l.val);
        }
        let mut suffix = vec![Complex::new(T::one(), T::zero()); count + 1];
        for i in (0..count).rev() {
            suffix[i] = suffix[i + 1] * leaves[i].val;
        }
        let boundary = prefix[count] * e * (rho * inv_phi);
        acc.n0[next] = acc.n0[next] + two_re(boundary);
        acc.n0_abs[next] = acc.n0_abs[next] + two_re(boundary).abs();

        let bound = floor_bound(self.cfg.threshold(next, big_phi, phi1));
        for (bi, leaf) in leaves.iter().enumerate() {
            let cb: i64 = if leaf.conj { -1 } else { 1 };
            let cbt: T = ci(cb);
            // -i c |w_b|^2 B
            let res = minus_i(boundary) * (cbt * leaf.val.norm_sqr());
            acc.r[next] = acc.r[next] + two_re(res);

            let others = prefix[bi] * suffix[bi + 1];
            let rho_next = -rho * cbt * inv_phi;
            let pref = minus_i(others * e) * rho_next;
            let table = self.table(leaf.side, leaf.freq);
            let (lo, hi) = if cb == 1 {
                (-bound - big_phi, bound - big_phi)
            } else {
                (big_phi - bound, big_phi + bound)
            };
            let (a, b) = table.range(lo, hi);
            let (mut stop, mut total) = (table.sum(a, b), table.total());
            if cb == -1 {
                stop = stop.conj();
                total = total.conj();
            }
            acc.n1[next] = acc.n1[next] + two_re(pref * stop);
            acc.n2[next] = acc.n2[next] + two_re(pref * (total - stop));
            if next > self.depth {
                continue;
            }
            let mut child = Vec::with_capacity(count + 2);
            for idx in (0..a).chain(b..table.phis.len()) {
                let (n1, n3) = (table.n1s[idx], table.n3s[idx]);
                child.clear();
                child.extend_from_slice(&leaves[..bi]);
                child.push(self.leaf(n1, leaf.conj, leaf.side));
                child.push(self.leaf(n1 + n3 - leaf.freq, !leaf.conj, leaf.side));
                child.push(self.leaf(n3, leaf.conj, leaf.side));
                child.extend_from_slice(&leaves[bi + 1..]);
                let phi_next = big_phi + cb * table.phis[idx];
                self.expand(&child, phi_next, rho_next, phi1, next, acc);
            }
        }
    }
}

/// All forms of the depth-`J` expansion, with `u` on the terminals under the
/// first root and `v` on those under the second. Both states are interaction
/// variables; `t` enters the phases.
pub fn evaluate_cross<T: Real>(u: &FourierState<T>, v: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormTable<T>> {
    cfg.validate()?;
    check_same(u, v)?;
    if u.cutoff() != cfg.box_n {
        return Err(Error::SizeMismatch { expected: 2 * cfg.box_n + 1, got: 2 * u.cutoff() + 1 });
    }
    let engine = Engine::new(u, v, t, cfg);
    let b = cfg.box_n as i64;
    let per_n: Vec<Acc<T>> = (-b..=b).into_par_iter().map(|n| engine.root(n, cfg.k)).collect();
    let levels = cfg.depth + 2;
    let gather = |f: &dyn Fn(&Acc<T>) -> &Vec<T>| -> Vec<Vec<T>> {
        (0..levels).map(|j| per_n.iter().map(|a| f(a)[j]).collect()).collect()
    };
    Ok(FormTable {
        depth: cfg.depth,
        t,
        cutoff: cfg.box_n,
        n0: gather(&|a| &a.n0),
        n0_abs: gather(&|a| &a.n0_abs),
        r: gather(&|a| &a.r),
        n1: gather(&|a| &a.n1),
        n2: gather(&|a| &a.n2),
    })
}

pub fn evaluate<T: Real>(u: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormTable<T>> {
    evaluate_cross(u, u, t, cfg)
}

/// `-2 Re i sum_{Gamma(n), |phi| <= K} e^{-i phi t} w_1 conj(w_2) w_3 conj(w_n)`.
pub fn form_n1_first<T: Real>(u: &FourierState<T>, t: T, k: f64) -> FormValue<T> {
    let big = u.cutoff() as i64;
    let values = (-big..=big)
        .map(|n| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for tp in gamma_enumerate(n, big) {
                let p = phi_unchecked(tp.n1, tp.n2, tp.n3, n);
                if (p.unsigned_abs() as f64) <= k {
                    acc = acc + phase(p, t) * u.get(tp.n1) * u.get(tp.n2).conj() * u.get(tp.n3);
                }
            }
            Complex::new(two_re(minus_i(acc * u.get(n).conj())), T::zero())
        })
        .collect();
    FormValue { form: FormId::N1, j: 1, t, values }
}

fn level_check(j: usize, lo: usize, what: &str) -> Result<()> {
    if j < lo {
        return Err(Error::InvalidParameter(format!("{what} is defined for j >= {lo}, got {j}")));
    }
    Ok(())
}

/// Boundary form `N0^{(j)}`, `j >= 2`.
pub fn form_n0<T: Real>(j: usize, u: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormValue<T>> {
    cross_form(FormId::N0, j, u, u, t, cfg)
}

/// Resonant insertion `R^{(j)}`, `j >= 2`.
pub fn form_r<T: Real>(j: usize, u: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormValue<T>> {
    cross_form(FormId::R, j, u, u, t, cfg)
}

/// Stopping part `N1^{(j)}`, `j >= 1`.
pub fn form_n1<T: Real>(j: usize, u: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormValue<T>> {
    cross_form(FormId::N1, j, u, u, t, cfg)
}

/// Error term `N2^{(J+1)}` of the depth-`J` expansion.
pub fn form_error<T: Real>(u: &FourierState<T>, t: T, cfg: &NFConfig) -> Result<FormValue<T>> {
    cross_form(FormId::N2, cfg.depth + 1, u, u, t, cfg)
}

/// One form at level `j` with `u` under the first root and `v` under the second.
pub fn cross_form<T: Real>(
    form: FormId,
    j: usize,
    u: &FourierState<T>,
    v: &FourierState<T>,
    t: T,
    cfg: &NFConfig,
) -> Result<FormValue<T>> {
    let lo = match form {
        FormId::N0 | FormId::R => 2,
        FormId::N1 | FormId::N2 => 1,
    };
    level_check(j, lo, form.name())?;
    if j > cfg.depth + 1 {
        return Err(Error::InvalidParameter(format!("level {j} exceeds depth J + 1 = {}", cfg.depth + 1)));
    }
    let depth = (j - 1).max(1);
    let table = evaluate_cross(u, v, t, &cfg.with_depth(depth))?;
    Ok(table.form_value(form, j))
}

/// Outcome of the finite-depth identity at one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: i64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    #[serde(rename = "J")]
    pub depth: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub theta: f64,
    #[serde(rename = "box_N")]
    pub box_n: usize,
    pub dt_sample: f64,
}

/// Forms at every sample of a Wick trajectory (given in the original variables).
pub fn evaluate_along<T: Real>(traj: &Trajectory<T>, cfg: &NFConfig) -> Result<Vec<FormTable<T>>> {
    let w = interaction_rep(traj);
    w.samples().par_iter().map(|s| evaluate(s, s.time(), cfg)).collect()
}

/// `|w_n(t)|^2 - |w_n(0)|^2` against boundary terms plus the Simpson integral
/// of the remaining forms, for every `|n| <= N`.
pub fn identity_residuals<T: Real>(traj: &Trajectory<T>, cfg: &NFConfig) -> Result<Vec<IdentityReport>> {
    if traj.len() < 3 || traj.len() % 2 == 0 {
        return Err(Error::InsufficientSamples(format!(
            "Simpson quadrature needs an odd number >= 3 of samples, got {}",
            traj.len()
        )));
    }
    let times: Vec<T> = traj.samples().iter().map(|s| s.time()).collect();
    let h = uniform_step(&times)?;
    let tables = evaluate_along(traj, cfg)?;
    let first = traj.first();
    let last = traj.last();
    let (t0, t1) = (&tables[0], &tables[tables.len() - 1]);
    let big = cfg.box_n as i64;
    (-big..=big)
        .map(|n| {
            let lhs = last.get(n).norm_sqr() - first.get(n).norm_sqr();
            let integrand: Vec<T> = tables.iter().map(|tb| tb.integrand_total(n)).collect();
            let rhs = t1.boundary_total(n) - t0.boundary_total(n) + simpson(&integrand, h)?;
            Ok(IdentityReport {
                n,
                t: to_f64(last.time()),
                lhs: to_f64(lhs),
                rhs: to_f64(rhs),
                residual: to_f64((lhs - rhs).abs()),
                depth: cfg.depth,
                k: cfg.k,
                theta: cfg.theta,
                box_n: cfg.box_n,
                dt_sample: to_f64(h),
            })
        })
        .collect()
}

/// Residual at a single mode.
pub fn identity_residual<T: Real>(traj: &Trajectory<T>, n: i64, cfg: &NFConfig) -> Result<IdentityReport> {
    let big = cfg.box_n as i64;
    if n.abs() > big {
        return Err(Error::InvalidParameter(format!("mode {n} outside |n| <= {big}")));
    }
    Ok(identity_residuals(traj, cfg)?.swap_remove((n + big) as usize))
}

/// `sum_n <n>^{2s} (|w_n|^2 - sum_{j=2}^{J+1} N0^{(j)}(n))`; depth 0 gives the
/// plain `H^s` energy.
pub fn modified_energy<T: Real>(u: &FourierState<T>, t: T, s: T, cfg: &NFConfig) -> Result<T> {
    cfg.validate_params()?;
    let plain = |n: i64, z: Complex<T>| (T::one() + ci::<T>(n * n)).powf(s) * z.norm_sqr();
    if cfg.depth == 0 {
        return Ok(u.modes().map(|(n, z)| plain(n, z)).fold(T::zero(), |a, b| a + b));
    }
    let table = evaluate(u, t, cfg)?;
    Ok(u
        .modes()
        .map(|(n, z)| plain(n, z) - (T::one() + ci::<T>(n * n)).powf(s) * table.boundary_total(n))
        .fold(T::zero(), |a, b| a + b))
}

/// Time derivative of [`modified_energy`] predicted by the expansion.
pub fn modified_energy_rate<T: Real>(table: &FormTable<T>, s: T) -> T {
    let big = table.cutoff as i64;
    (-big..=big)
        .map(|n| (T::one() + ci::<T>(n * n)).powf(s) * table.integrand_total(n))
        .fold(T::zero(), |a, b| a + b)
}

/// Terms of `d/dt ||u - v||^2_{H^s}` for two solutions of the same Wick
/// equation, with `I_xy = -2 Re i sigma sum <n>^{2s} N(x)_n conj(y_n)` and `II`
/// the resonant contribution `2 Re i sigma sum <n>^{2s} (|u_n|^2 - |v_n|^2) v_n conj(u_n - v_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffEnergyTerms {
    pub t: f64,
    pub i_uu: f64,
    pub i_uv: f64,
    pub i_vu: f64,
    pub i_vv: f64,
    pub ii: f64,
}

impl DiffEnergyTerms {
    /// `I_uu - I_uv - I_vu + I_vv`.
    pub fn i_total(&self) -> f64 {
        self.i_uu - self.i_uv - self.i_vu + self.i_vv
    }

    pub fn rate(&self) -> f64 {
        self.i_total() + self.ii
    }
}

fn weight<T: Real>(n: i64, s: T) -> T {
    (T::one() + ci::<T>(n * n)).powf(s)
}

fn pairing<T: Real>(x: &FourierState<T>, y: &FourierState<T>, s: T) -> Complex<T> {
    x.modes()
        .map(|(n, z)| z * y.get(n).conj() * weight(n, s))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// `2 Re (i z)`.
fn two_re_i<T: Real>(z: Complex<T>) -> T {
    -z.im * c(2.0)
}

/// Evaluates [`DiffEnergyTerms`] at every common sample of two trajectories
/// in the original (non-interaction) variables. Unless `allow_distinct` is
/// set, the two solutions must start from the same data.
pub fn diff_energy_terms<T: Real>(
    u: &Trajectory<T>,
    v: &Trajectory<T>,
    s: T,
    sign: i8,
    allow_distinct: bool,
) -> Result<Vec<DiffEnergyTerms>> {
    if u.len() != v.len() {
        return Err(Error::SizeMismatch { expected: u.len(), got: v.len() });
    }
    check_same(u.first(), v.first())?;
    for (a, b) in u.samples().iter().zip(v.samples()) {
        if (a.time() - b.time()).abs() > c(1e-12) {
            return Err(Error::InvalidParameter("trajectories are sampled at different times".into()));
        }
    }
    let gap = to_f64(l2_norm(&u.first().sub(v.first())?));
    if !allow_distinct && gap > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "initial data differ by {gap:e}; pass allow_distinct to compare distinct solutions"
        )));
    }
    let sigma: T = ci(sign as i64);
    u.samples()
        .par_iter()
        .zip(v.samples().par_iter())
        .map(|(a, b)| {
            let na = nonresonant_n(a, a, a)?;
            let nb = nonresonant_n(b, b, b)?;
            let i_term = |x: &FourierState<T>, y: &FourierState<T>| to_f64(-two_re_i(pairing(x, y, s)) * sigma);
            let res = a
                .modes()
                .map(|(n, za)| {
                    let zb = b.get(n);
                    (za - zb).conj() * zb * (za.norm_sqr() - zb.norm_sqr()) * weight(n, s)
                })
                .fold(Complex::new(T::zero(), T::zero()), |x, y| x + y);
            Ok(DiffEnergyTerms {
                t: to_f64(a.time()),
                i_uu: i_term(&na, a),
                i_uv: i_term(&na, b),
                i_vu: i_term(&nb, a),
                i_vv: i_term(&nb, b),
                ii: to_f64(two_re_i(res) * sigma),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffEnergyReport {
    pub t: f64,
    /// Simpson integral of `I + II`.
    pub integrated: f64,
    /// `||u - v||^2_{H^s}(t) - ||u - v||^2_{H^s}(0)`.
    pub direct: f64,
    pub residual: f64,
    pub dt_sample: f64,
}

/// Compares the time integral of `I + II` with the change of `||u - v||^2_{H^s}`.
pub fn diff_energy_check<T: Real>(
    u: &Trajectory<T>,
    v: &Trajectory<T>,
    s: T,
    sign: i8,
    allow_distinct: bool,
) -> Result<DiffEnergyReport> {
    let terms = diff_energy_terms(u, v, s, sign, allow_distinct)?;
    let times: Vec<f64> = terms.iter().map(|x| x.t).collect();
    let h = uniform_step(&times)?;
    let rates: Vec<f64> = terms.iter().map(|x| x.rate()).collect();
    let integrated = simpson(&rates, h)?;
    let energy = |a: &FourierState<T>, b: &FourierState<T>| -> Result<f64> {
        let d = a.sub(b)?;
        Ok(to_f64(pairing(&d, &d, s).re))
    };
    let direct = energy(u.last(), v.last())? - energy(u.first(), v.first())?;
    Ok(DiffEnergyReport {
        t: *times.last().expect("nonempty"),
        integrated,
        direct,
        residual: (integrated - direct).abs(),
        dt_sample: h,
    })
}
