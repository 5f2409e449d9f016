//! Model parameters and the quantities derived from them: the effective
//! coupling of the radial problem, its criticality regime, the oscillatory
//! near-origin branches, and the radial probability current.
//!
//! Units: hbar = c = k_B = 1. Energies are measured in units of 1/r0 unless
//! rescaled explicitly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `alpha - 1/4` below which the coupling is treated
/// as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Input parameters of the radial model.
///
/// `mass` is retained for bookkeeping only: the scale-invariant potential
/// cancels it exactly, so no computed quantity may depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub ell: u32,
    pub mass: f64,
    pub r0: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, ell: u32, r0: f64) -> Result<Self> {
        let p = ModelParams { gamma, ell, mass: 0.0, r0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(Error::InvalidParams(format!("gamma must be finite, got {}", self.gamma)));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(Error::InvalidParams(format!("r0 must be positive, got {}", self.r0)));
        }
        Ok(())
    }
}

/// Criticality regime of the effective coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Supercritical,
    Critical,
    Subcritical,
}

/// Effective coupling `alpha = gamma^2 - ell(ell+1)` with its regime and,
/// in the supercritical regime, the oscillation index
/// `sigma = sqrt(alpha - 1/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingData {
    pub alpha: f64,
    pub sigma: Option<f64>,
    pub regime: Regime,
}

impl CouplingData {
    /// Construct directly from an effective coupling strength. Intended for
    /// diagnostics and test hooks (e.g. the free-field case `alpha = 0`);
    /// physical runs should go through [`coupling_from`].
    pub fn with_alpha(alpha: f64) -> Self {
        classify(alpha)
    }

    /// The oscillation index, or an error naming the offending regime.
    pub fn sigma_supercritical(&self) -> Result<f64> {
        match self.regime {
            Regime::Supercritical => Ok(self.sigma.expect("supercritical coupling carries sigma")),
            Regime::Critical => Err(Error::Critical),
            Regime::Subcritical => Err(Error::Subcritical { alpha: self.alpha }),
        }
    }
}

fn classify(alpha: f64) -> CouplingData {
    let excess = alpha - 0.25;
    if excess.abs() <= CRITICAL_TOL {
        CouplingData { alpha, sigma: None, regime: Regime::Critical }
    } else if excess > 0.0 {
        CouplingData { alpha, sigma: Some(excess.sqrt()), regime: Regime::Supercritical }
    } else {
        CouplingData { alpha, sigma: None, regime: Regime::Subcritical }
    }
}

/// Derive the effective coupling from model parameters.
pub fn coupling_from(params: &ModelParams) -> Result<CouplingData> {
    params.validate()?;
    let l = params.ell as f64;
    Ok(classify(params.gamma * params.gamma - l * (l + 1.0)))
}

/// A complex quasi-mode energy `E`, with the frequency/width split
/// `E = omega - i Gamma / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub value: Complex64,
}

impl ComplexEnergy {
    pub fn new(value: Complex64) -> Self {
        ComplexEnergy { value }
    }

    /// Oscillation frequency `omega = Re E`.
    pub fn omega(&self) -> f64 {
        self.value.re
    }

    /// Decay width `Gamma = -2 Im E`.
    pub fn width(&self) -> f64 {
        -2.0 * self.value.im
    }

    /// Decaying modes live in the closed lower half-plane.
    pub fn is_decaying(&self) -> bool {
        self.width() >= 0.0
    }
}

/// Which near-origin branch a mode follows. `Outgoing` is the absorbed
/// branch `r^{1/2 - i sigma}` carrying flux into the origin; `Ingoing` is
/// its counterpart `r^{1/2 + i sigma}` carrying flux back out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Outgoing,
    Ingoing,
}

/// The net radial potential `-alpha / r^2` seen by the reduced wave.
pub fn effective_potential(r: f64, c: &CouplingData) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("effective_potential requires r > 0, got {r}")));
    }
    Ok(-c.alpha / (r * r))
}

/// Near-origin branch `r^{1/2 -+ i sigma}` on the principal logarithm branch.
pub fn near_origin_mode(r: f64, sigma: f64, branch: Branch) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("near_origin_mode requires r > 0, got {r}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("near_origin_mode requires sigma > 0, got {sigma}")));
    }
    let exponent = match branch {
        Branch::Outgoing => Complex64::new(0.5, -sigma),
        Branch::Ingoing => Complex64::new(0.5, sigma),
    };
    Ok((exponent * r.ln()).exp())
}

/// Derivative of [`near_origin_mode`] with respect to `r`.
pub fn near_origin_mode_derivative(r: f64, sigma: f64, branch: Branch) -> Result<Complex64> {
    let exponent = match branch {
        Branch::Outgoing => Complex64::new(0.5, -sigma),
        Branch::Ingoing => Complex64::new(0.5, sigma),
    };
    Ok(near_origin_mode(r, sigma, branch)? * exponent / r)
}

/// Radial probability current `j_r = Im(u* u')`.
pub fn radial_current(u: Complex64, du: Complex64) -> f64 {
    (u.conj() * du).im
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SIGMA_G2: f64 = 1.936_491_673_103_708_4;

    #[test]
    fn coupling_examples() {
        let c = coupling_from(&ModelParams::new(2.0, 0, 1.0).unwrap()).unwrap();
        assert_eq!(c.regime, Regime::Supercritical);
        assert_relative_eq!(c.alpha, 4.0);
        assert_relative_eq!(c.sigma.unwrap(), SIGMA_G2, max_relative = 1e-15);

        let c = coupling_from(&ModelParams::new(0.5, 0, 1.0).unwrap()).unwrap();
        assert_eq!(c.regime, Regime::Critical);
        assert!(c.sigma.is_none());
        assert!(matches!(c.sigma_supercritical(), Err(Error::Critical)));

        let c = coupling_from(&ModelParams::new(1.0, 1, 1.0).unwrap()).unwrap();
        assert_eq!(c.regime, Regime::Subcritical);
        assert_relative_eq!(c.alpha, -1.0);
    }

    #[test]
    fn sigma_satisfies_defining_relation() {
        for gamma in [0.7, 1.0, 2.0, 3.5, 10.0] {
            let c = coupling_from(&ModelParams::new(gamma, 0, 1.0).unwrap()).unwrap();
            if let Some(s) = c.sigma {
                assert_relative_eq!(s * s + 0.25, c.alpha, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn effective_potential_examples() {
        let c = CouplingData::with_alpha(4.0);
        assert_relative_eq!(effective_potential(1.0, &c).unwrap(), -4.0);
        assert_relative_eq!(effective_potential(2.0, &c).unwrap(), -1.0);
        let rep = CouplingData::with_alpha(-1.0);
        assert_relative_eq!(effective_potential(1.0, &rep).unwrap(), 1.0);
        assert!(effective_potential(0.0, &c).is_err());
        assert!(effective_potential(-1.0, &c).is_err());
    }

    #[test]
    fn near_origin_mode_examples() {
        let u = near_origin_mode(1.0, 2.0, Branch::Outgoing).unwrap();
        assert_relative_eq!(u.re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(u.im, 0.0);

        // r = e, sigma = 2: e^{1/2 - 2i}
        let u = near_origin_mode(std::f64::consts::E, 2.0, Branch::Outgoing).unwrap();
        assert_relative_eq!(u.re, -0.686_110_141_149_843_1, max_relative = 1e-14);
        assert_relative_eq!(u.im, -1.499_178_009_000_394_7, max_relative = 1e-14);

        // |r^{1/2 - i sigma}| = sqrt(r)
        for (r, s) in [(0.3, 1.0), (2.0, 5.0), (17.0, 0.4)] {
            let u = near_origin_mode(r, s, Branch::Outgoing).unwrap();
            assert_relative_eq!(u.norm(), r.sqrt(), max_relative = 1e-14);
        }
        assert!(near_origin_mode(0.0, 1.0, Branch::Outgoing).is_err());
    }

    #[test]
    fn radial_current_examples() {
        // analytic branch current is -+sigma independent of r
        for (r, s) in [(0.5, 1.3), (1.0, 2.0), (7.0, 0.6)] {
            let u = near_origin_mode(r, s, Branch::Outgoing).unwrap();
            let du = near_origin_mode_derivative(r, s, Branch::Outgoing).unwrap();
            assert_relative_eq!(radial_current(u, du), -s, max_relative = 1e-13);
            let u = near_origin_mode(r, s, Branch::Ingoing).unwrap();
            let du = near_origin_mode_derivative(r, s, Branch::Ingoing).unwrap();
            assert_relative_eq!(radial_current(u, du), s, max_relative = 1e-13);
        }
        // real standing wave carries no flux
        assert_eq!(radial_current(Complex64::new(1.3, 0.0), Complex64::new(-0.4, 0.0)), 0.0);
        // outgoing plane wave at real E carries +E
        let e = 1.7;
        let u = Complex64::new(0.0, e * 2.0).exp();
        let du = Complex64::new(0.0, e) * u;
        assert_relative_eq!(radial_current(u, du), e, max_relative = 1e-14);
    }

    #[test]
    fn width_definition() {
        let en = ComplexEnergy::new(Complex64::new(1.0, -0.25));
        assert_relative_eq!(en.omega(), 1.0);
        assert_relative_eq!(en.width(), 0.5);
        assert!(en.is_decaying());
        assert!(!ComplexEnergy::new(Complex64::new(0.0, 0.1)).is_decaying());
    }

    #[test]
    fn mass_changes_nothing() {
        let p1 = ModelParams::new(2.0, 0, 1.0).unwrap();
        let p2 = p1.with_mass(17.5);
        assert_eq!(coupling_from(&p1).unwrap(), coupling_from(&p2).unwrap());
    }
}
