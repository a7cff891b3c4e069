//! Exact integer phase functions on the resonance plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest frequency magnitude for which `n^4` and the phase sums fit in `i64`.
pub const MAX_FREQ: i64 = 55108;

/// Quadruple `(n1, n2, n3, n)` with `n = n1 - n2 + n3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResonantTuple {
    pub n1: i64,
    pub n2: i64,
    pub n3: i64,
    pub n: i64,
}

impl ResonantTuple {
    /// Completes `n2 = n1 + n3 - n`.
    pub fn new(n1: i64, n3: i64, n: i64) -> Self {
        Self { n1, n2: n1 + n3 - n, n3, n }
    }

    pub fn from_parts(n1: i64, n2: i64, n3: i64, n: i64) -> Result<Self> {
        if n != n1 - n2 + n3 {
            return Err(Error::InvalidParameter(format!("({n1},{n2},{n3},{n}) violates n = n1 - n2 + n3")));
        }
        Ok(Self { n1, n2, n3, n })
    }

    /// `n1 != n` and `n3 != n`.
    pub fn in_gamma(&self) -> bool {
        self.n1 != self.n && self.n3 != self.n
    }

    pub fn max_abs(&self) -> i64 {
        self.n1.abs().max(self.n2.abs()).max(self.n3.abs()).max(self.n.abs())
    }

    fn guard(&self) -> Result<()> {
        for v in [self.n1, self.n2, self.n3, self.n] {
            if v.abs() > MAX_FREQ {
                return Err(Error::Overflow(v));
            }
        }
        Ok(())
    }

    /// `n1^2 + n2^2 + n3^2 + n^2 + 2 (n1 + n3)^2`.
    pub fn q(&self) -> i128 {
        let sq = |x: i64| (x as i128) * (x as i128);
        sq(self.n1) + sq(self.n2) + sq(self.n3) + sq(self.n) + 2 * sq(self.n1 + self.n3)
    }
}

fn narrow(v: i128, t: &ResonantTuple) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(t.max_abs()))
}

fn pow4(x: i64) -> i128 {
    let x = x as i128;
    x * x * x * x
}

fn sq(x: i64) -> i128 {
    (x as i128) * (x as i128)
}

/// `n1^4 - n2^4 + n3^4 - n^4`.
pub fn phi(t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    narrow(pow4(t.n1) - pow4(t.n2) + pow4(t.n3) - pow4(t.n), t)
}

/// `-(n - n1)(n - n3) Q`.
pub fn phi_factored(t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    narrow(-((t.n - t.n1) as i128) * ((t.n - t.n3) as i128) * t.q(), t)
}

/// `-n1^2 + n2^2 - n3^2 + n^2`.
pub fn mu_phase(t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    narrow(-sq(t.n1) + sq(t.n2) - sq(t.n3) + sq(t.n), t)
}

/// `2 (n - n1)(n - n3)`.
pub fn mu_factored(t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    narrow(2 * ((t.n - t.n1) as i128) * ((t.n - t.n3) as i128), t)
}

/// `-lambda (n1^2 - n2^2 + n3^2 - n^2) + mu (n1^4 - n2^4 + n3^4 - n^4)`.
pub fn phi_general(lambda: i64, mu: i64, t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    let quad = sq(t.n1) - sq(t.n2) + sq(t.n3) - sq(t.n);
    let quart = pow4(t.n1) - pow4(t.n2) + pow4(t.n3) - pow4(t.n);
    let v = (lambda as i128)
        .checked_mul(quad)
        .zip((mu as i128).checked_mul(quart))
        .and_then(|(a, b)| b.checked_sub(a))
        .ok_or(Error::Overflow(t.max_abs()))?;
    narrow(v, t)
}

/// `(n1 - n2)(n1 - n) (-2 lambda + mu Q)`.
pub fn phi_general_factored(lambda: i64, mu: i64, t: &ResonantTuple) -> Result<i64> {
    t.guard()?;
    let inner = (mu as i128)
        .checked_mul(t.q())
        .and_then(|v| v.checked_sub(2 * lambda as i128))
        .ok_or(Error::Overflow(t.max_abs()))?;
    let v = ((t.n1 - t.n2) as i128 * (t.n1 - t.n) as i128)
        .checked_mul(inner)
        .ok_or(Error::Overflow(t.max_abs()))?;
    narrow(v, t)
}

/// Phase without the overflow check, for hot loops already inside the guard.
#[inline]
pub(crate) fn phi_unchecked(n1: i64, n2: i64, n3: i64, n: i64) -> i64 {
    let p = |x: i64| x * x * x * x;
    p(n1) - p(n2) + p(n3) - p(n)
}

/// Tuples of `Gamma(n)` inside `|n_i| <= N`, lexicographic in `(n1, n3)`.
pub fn gamma_enumerate(n: i64, cutoff: i64) -> Vec<ResonantTuple> {
    let mut out = Vec::new();
    if n.abs() > cutoff {
        return out;
    }
    for n1 in -cutoff..=cutoff {
        if n1 == n {
            continue;
        }
        let lo = (-cutoff).max(n - n1 - cutoff);
        let hi = cutoff.min(n - n1 + cutoff);
        for n3 in lo..=hi {
            if n3 != n {
                out.push(ResonantTuple::new(n1, n3, n));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tuple: ResonantTuple,
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub range: i64,
    pub tuples_checked: u64,
    pub violations: Vec<Violation>,
}

impl FactorizationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn check_tuple(t: &ResonantTuple) -> Option<&'static str> {
    let (Ok(pe), Ok(pf), Ok(me), Ok(mf)) = (phi(t), phi_factored(t), mu_phase(t), mu_factored(t)) else {
        return Some("overflow");
    };
    if pe != pf {
        return Some("phi expanded != factored");
    }
    if me != mf {
        return Some("mu expanded != factored");
    }
    let (phi, mu) = (pe.unsigned_abs() as i128, me.unsigned_abs() as i128);
    let q = t.q();
    let nmax2 = sq(t.max_abs());
    if 2 * phi != mu * q {
        return Some("|phi| != |mu| Q / 2");
    }
    if q < nmax2 {
        return Some("Q < n_max^2");
    }
    if 2 * phi < mu * nmax2 {
        return Some("|phi| < |mu| n_max^2 / 2");
    }
    if 8 * mu * nmax2 < mu * mu {
        return Some("|mu| n_max^2 / 2 < |mu|^2 / 16");
    }
    if (phi == 0) != (mu == 0) || (phi == 0) != !t.in_gamma() {
        return Some("vanishing of phi, mu and resonance disagree");
    }
    None
}

/// Exhaustive check of the phase identities over every tuple with
/// `|n_i| <= range_N` (resonant ones included).
pub fn check_factorization(range_n: i64) -> Result<FactorizationReport> {
    if !(0..=64).contains(&range_n) {
        return Err(Error::InvalidParameter(format!("range_N = {range_n} outside 0..=64")));
    }
    let r = range_n;
    let per_n1: Vec<(u64, Vec<Violation>)> = (-r..=r)
        .into_par_iter()
        .map(|n1| {
            let mut count = 0u64;
            let mut bad = Vec::new();
            for n3 in -r..=r {
                for n in -r..=r {
                    let t = ResonantTuple::new(n1, n3, n);
                    if t.n2.abs() > r {
                        continue;
                    }
                    count += 1;
                    if let Some(check) = check_tuple(&t) {
                        bad.push(Violation { tuple: t, check: check.into() });
                    }
                }
            }
            (count, bad)
        })
        .collect();
    let mut report = FactorizationReport { range: r, tuples_checked: 0, violations: Vec::new() };
    for (count, bad) in per_n1 {
        report.tuples_checked += count;
        report.violations.extend(bad);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        let t = ResonantTuple::from_parts(2, 1, 0, 1).unwrap();
        assert_eq!(phi(&t).unwrap(), 14);
        assert_eq!(phi_factored(&t).unwrap(), 14);
        assert_eq!(mu_phase(&t).unwrap(), -2);
        let t = ResonantTuple::from_parts(5, 3, 2, 4).unwrap();
        assert_eq!(phi(&t).unwrap(), 304);
        assert_eq!(t.q(), 152);
        assert_eq!(phi_factored(&t).unwrap(), 304);
        assert_eq!(mu_phase(&t).unwrap(), -4);
        assert_eq!(mu_factored(&t).unwrap(), -4);
        let r = ResonantTuple::from_parts(3, 3, -2, -2).unwrap();
        assert_eq!(phi(&r).unwrap(), 0);
        assert_eq!(mu_phase(&r).unwrap(), 0);
    }

    #[test]
    fn general_phase() {
        let t = ResonantTuple::from_parts(2, 1, 0, 1).unwrap();
        assert_eq!(phi_general(0, 1, &t).unwrap(), phi(&t).unwrap());
        assert_eq!(phi_general(1, 0, &t).unwrap(), mu_phase(&t).unwrap());
        assert_eq!(phi_general(1, 1, &t).unwrap(), 12);
        assert_eq!(phi_general_factored(1, 1, &t).unwrap(), 12);
    }

    #[test]
    fn constraint_and_overflow() {
        assert!(ResonantTuple::from_parts(1, 1, 1, 0).is_err());
        let big = ResonantTuple::new(MAX_FREQ + 1, 0, 0);
        assert_eq!(phi(&big), Err(Error::Overflow(MAX_FREQ + 1)));
        let edge = ResonantTuple::new(MAX_FREQ, 0, 1);
        assert!(phi(&edge).is_ok());
    }

    #[test]
    fn gamma_small() {
        let g = gamma_enumerate(0, 1);
        assert_eq!(g, vec![ResonantTuple::new(-1, 1, 0), ResonantTuple::new(1, -1, 0)]);
        assert!(gamma_enumerate(0, 0).is_empty());
    }

    #[test]
    fn factorization_small_ranges() {
        for r in [0, 3, 8] {
            let rep = check_factorization(r).unwrap();
            assert!(rep.violations.is_empty(), "{:?}", rep.violations.first());
        }
        assert!(check_factorization(65).is_err());
    }
}
