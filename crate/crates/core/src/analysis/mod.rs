//! Energy weights, the symmetrized flux identity, `X^{s,b}` norms and
//! empirical Strichartz ratios.

pub mod flux;
pub mod spacetime;
pub mod symbol;

pub use flux::{dmt_check, energy_e, ConstantWeight, Weight, es5_ratio, flux_identity_check, psi, psi_sum, DmtReport, FluxReport, Quadruple};
pub use spacetime::{
    spacetime_l2, strichartz_ratio, strichartz_sweep, xsb_norm, SpaceTimeField, SpaceTimeGrid, StrichartzSweep, Window,
};
pub use symbol::{default_delta0, eta0, symbol_check, EnergySymbol, SymbolParams, SymbolReport};
