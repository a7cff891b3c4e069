//! Spectral simulation and normal-form toolkit for the periodic cubic
//! fourth-order Schrödinger equation and its Wick-ordered variants.

pub mod analysis;
pub mod bitree;
pub mod dynamics;
pub mod error;
pub mod initial;
pub mod normal_form;
pub mod phase;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{c, cis, Real};
pub use dynamics::{EquationKind, IntegratorConfig, Variant};
pub use initial::InitialData;
pub use normal_form::{FormId, FormTable, NFConfig};
pub use spectral::{FourierState, SpectralConfig, Trajectory};

pub type FourierState64 = FourierState<f64>;
pub type FourierState32 = FourierState<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
