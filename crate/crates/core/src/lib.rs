//! Solver suite for the discrete complex-energy decay ladder of the
//! absorbing inverse-square radial problem.
//!
//! For supercritical coupling (`alpha = gamma^2 - l(l+1) > 1/4`) the radial
//! wave oscillates in ln r near the origin; selecting the absorbed branch
//! there and matching it at a short-distance radius r0 quantizes a
//! log-periodic ladder of decaying quasi-modes, with geometric width spacing
//! exp(-pi/sigma) and an emergent temperature |E_0| / (2 pi sigma).
//!
//! Three independent routes compute and cross-validate the ladder:
//!
//! * [`spectrum`] - closed-form special functions and complex root finding;
//! * [`ode`] - direct radial integration in the logarithmic coordinate;
//! * [`timedomain`] - ringdown of the evolved field and damped-mode
//!   extraction.

pub mod cli;
pub mod error;
pub mod model;
pub mod ode;
pub mod pencil;
pub mod report;
pub mod rootfind;
pub mod spectrum;
pub mod timedomain;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{
    coupling_from, effective_potential, near_origin_mode, radial_current, Branch, ComplexEnergy,
    CouplingData, ModelParams, Regime,
};
pub use spectrum::{
    asymptotic_split, fit_ladder, find_ladder, matching_determinant, mode_function,
    resonance_mode, width_ladder, width_ratios, LadderFit, MatchingProblem, ResonanceEntry,
};
