//! Named initial-data generators, e.g. `gaussian(1.0)` or `random_hs(-0.3, 7)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{c, Real};
use crate::spectral::FourierState;

/// Decay margin in the random `H^s` profile.
pub const RANDOM_HS_EPS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    /// `a e^{inx}`.
    SingleMode { n: i64, a: f64 },
    /// `a1 e^{i n1 x} + a2 e^{i n2 x}`.
    TwoMode { n1: i64, a1: f64, n2: i64, a2: f64 },
    /// `e^{-n^2/sigma^2}` with seeded uniform phases.
    Gaussian { sigma: f64 },
    /// `g_n <n>^{-s-1/2-eps}` with complex Gaussian `g_n`.
    RandomHs { s: f64, seed: u64 },
}

impl InitialData {
    pub fn needs_seed(&self) -> bool {
        matches!(self, Self::Gaussian { .. })
    }

    /// Builds the state on `|n| <= N`; `seed` drives the Gaussian phases.
    pub fn build<T: Real>(&self, cutoff: usize, seed: u64) -> Result<FourierState<T>> {
        let big = cutoff as i64;
        let inside = |n: i64| {
            if n.abs() > big {
                Err(Error::InvalidParameter(format!("mode {n} outside |n| <= {cutoff}")))
            } else {
                Ok(())
            }
        };
        let real = |a: f64| Complex::new(c::<T>(a), T::zero());
        match *self {
            Self::SingleMode { n, a } => {
                inside(n)?;
                Ok(FourierState::single_mode(cutoff, n, real(a)))
            }
            Self::TwoMode { n1, a1, n2, a2 } => {
                inside(n1)?;
                inside(n2)?;
                if n1 == n2 {
                    return Err(Error::InvalidParameter("two_mode needs distinct modes".into()));
                }
                let mut s = FourierState::single_mode(cutoff, n1, real(a1));
                s.set(n2, real(a2));
                Ok(s)
            }
            Self::Gaussian { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidParameter("gaussian width must be positive".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(FourierState::from_fn(cutoff, |n| {
                    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let amp = (-((n * n) as f64) / (sigma * sigma)).exp();
                    Complex::new(c(amp * theta.cos()), c(amp * theta.sin()))
                }))
            }
            Self::RandomHs { s, seed } => Ok(random_hs(cutoff, s, seed)),
        }
    }
}

/// Random coefficients `g_n <n>^{-s-1/2-eps}`, `g_n` standard complex Gaussian.
pub fn random_hs<T: Real>(cutoff: usize, s: f64, seed: u64) -> FourierState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FourierState::from_fn(cutoff, |n| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let w = (1.0 + (n * n) as f64).powf(0.5 * (-s - 0.5 - RANDOM_HS_EPS));
        Complex::new(c(w * x / 2f64.sqrt()), c(w * y / 2f64.sqrt()))
    })
}

/// Standard complex Gaussian coefficients on every mode.
pub fn random_state<T: Real>(cutoff: usize, seed: u64) -> FourierState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FourierState::from_fn(cutoff, |_| {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex::new(c(x), c(y))
    })
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleMode { n, a } => write!(f, "single_mode({n}, {a})"),
            Self::TwoMode { n1, a1, n2, a2 } => write!(f, "two_mode({n1}, {a1}, {n2}, {a2})"),
            Self::Gaussian { sigma } => write!(f, "gaussian({sigma})"),
            Self::RandomHs { s, seed } => write!(f, "random_hs({s}, {seed})"),
        }
    }
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("cannot parse initial data {spec:?}"));
        let spec = spec.trim();
        let open = spec.find('(').ok_or_else(bad)?;
        let args = spec[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let num = |i: usize| args[i].parse::<f64>().map_err(|_| bad());
        let int = |i: usize| args[i].parse::<i64>().map_err(|_| bad());
        let want = |k: usize| if args.len() == k { Ok(()) } else { Err(bad()) };
        match spec[..open].trim() {
            "single_mode" => {
                want(2)?;
                Ok(Self::SingleMode { n: int(0)?, a: num(1)? })
            }
            "two_mode" => {
                want(4)?;
                Ok(Self::TwoMode { n1: int(0)?, a1: num(1)?, n2: int(2)?, a2: num(3)? })
            }
            "gaussian" => {
                want(1)?;
                Ok(Self::Gaussian { sigma: num(0)? })
            }
            "random_hs" => {
                want(2)?;
                Ok(Self::RandomHs { s: num(0)?, seed: args[1].parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for text in ["single_mode(1, 0.5)", "two_mode(1, 0.3, -2, 0.2)", "gaussian(1)", "random_hs(-0.25, 42)"] {
            let d: InitialData = text.parse().unwrap();
            let again: InitialData = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        assert!("gaussian".parse::<InitialData>().is_err());
        assert!("single_mode(1)".parse::<InitialData>().is_err());
        assert!("banana(1)".parse::<InitialData>().is_err());
    }

    #[test]
    fn seeded_data_is_reproducible() {
        let g = InitialData::Gaussian { sigma: 1.0 };
        let a: FourierState<f64> = g.build(8, 3).unwrap();
        assert_eq!(a, g.build(8, 3).unwrap());
        assert_ne!(a, g.build(8, 4).unwrap());
        assert!((a.get(2).norm() - (-4f64).exp()).abs() < 1e-15);
        let r: FourierState<f64> = random_hs(8, -0.3, 1);
        assert_eq!(r, random_hs(8, -0.3, 1));
    }

    #[test]
    fn modes_must_fit() {
        assert!(InitialData::SingleMode { n: 5, a: 1.0 }.build::<f64>(4, 0).is_err());
        assert!(InitialData::TwoMode { n1: 1, a1: 1.0, n2: 1, a2: 1.0 }.build::<f64>(4, 0).is_err());
    }
}
