//! Independent numerical route: direct integration of the radial equation in
//! the logarithmic coordinate x = ln r, reproducing the matching determinant
//! without special functions.
//!
//! In x the equation reads  u_xx - u_x + [alpha + (E e^x)^2] u = 0, which is
//! stationary in x for |E| e^x << sqrt(alpha): uniform resolution per decade
//! where the ladder lives. Integration runs inward from a large start radius
//! where the bounded channel is initialized from its asymptotic form
//! e^{-iEr} (1 + b1/(Er) + b2/(Er)^2); for Im E < 0 that solution grows
//! toward smaller r, so inward integration keeps it dominant and any
//! admixture of the second solution dies off.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::CouplingData;
use crate::rootfind::refine_root;
use crate::spectrum::MatchingProblem;

/// Adaptive embedded 5(4) integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Start radius for inward integration; must satisfy r_outer |E| >= 20.
    pub r_outer: f64,
    /// Resolution cap: the step in x = ln r never exceeds ln(10)/steps_per_decade.
    pub steps_per_decade: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl IntegratorConfig {
    pub fn new(r_outer: f64) -> Result<Self> {
        let cfg = IntegratorConfig { r_outer, steps_per_decade: 400, abs_tol: 1e-13, rel_tol: 1e-11 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Start radius placed at the asymptotic validity edge for this energy.
    pub fn for_energy(e: Complex64) -> Result<Self> {
        Self::new(20.0 / e.norm())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_outer > 0.0) {
            return Err(Error::Config("r_outer must be positive".into()));
        }
        if self.steps_per_decade < 200 {
            return Err(Error::Config("steps_per_decade must be >= 200".into()));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Field and derivative at the stop radius, with the rescaling bookkeeping
/// accumulated along the way: the true solution is e^{log_scale} (u, du).
#[derive(Debug, Clone, Copy)]
pub struct OdeSolution {
    pub u: Complex64,
    /// du/dr at the stop radius.
    pub du: Complex64,
    pub log_scale: f64,
}

const RESCALE_THRESHOLD: f64 = 1e250;
const MIN_STEP_FACTOR: f64 = 1e-12;

/// Asymptotic initial data of the bounded channel at radius r:
/// u = e^{-iEr} (1 + b1/(Er) + b2/(Er)^2) and its r-derivative.
fn asymptotic_init(e: Complex64, r: f64, alpha: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let b1 = i * (alpha / 2.0);
    let b2 = Complex64::new(-alpha * (alpha + 2.0) / 8.0, 0.0);
    let er = e * r;
    let series = 1.0 + b1 / er + b2 / (er * er);
    let dseries_dr = -b1 / (er * r) - 2.0 * b2 / (er * er * r);
    let phase = (-i * e * r).exp();
    (phase * series, phase * (-i * e * series + dseries_dr))
}

/// Integrate the radial equation inward from `cfg.r_outer` to `r_stop`.
pub fn integrate_inward(
    e: Complex64,
    c: &CouplingData,
    cfg: &IntegratorConfig,
    r_stop: f64,
) -> Result<OdeSolution> {
    cfg.validate()?;
    if !(r_stop > 0.0 && r_stop < cfg.r_outer) {
        return Err(Error::Domain(format!(
            "need 0 < r_stop < r_outer, got r_stop = {r_stop}, r_outer = {}",
            cfg.r_outer
        )));
    }
    if e.norm() * cfg.r_outer < 20.0 {
        return Err(Error::Domain(format!(
            "asymptotic start requires |E| r_outer >= 20, got {}",
            e.norm() * cfg.r_outer
        )));
    }
    if e.im.abs() * cfg.r_outer > 600.0 {
        return Err(Error::Overflow(format!(
            "initial phase exponent |Im E| r_outer = {} overflows",
            e.im.abs() * cfg.r_outer
        )));
    }
    let alpha = c.alpha;
    let (u0, du0) = asymptotic_init(e, cfg.r_outer, alpha);
    // state in x = ln r: y = (u, v = r du/dr)
    let mut y = [u0, du0 * cfg.r_outer];
    let mut log_scale = 0.0f64;
    // keep the state O(1) from the start
    let norm0 = y[0].norm().max(y[1].norm());
    if norm0 > 0.0 {
        y[0] /= norm0;
        y[1] /= norm0;
        log_scale += norm0.ln();
    }

    let x_start = cfg.r_outer.ln();
    let x_end = r_stop.ln();
    let h_max = std::f64::consts::LN_10 / cfg.steps_per_decade as f64;
    let mut x = x_start;
    let mut h = -h_max; // inward
    let e2 = e * e;

    let rhs = |x: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let r = x.exp();
        let k = alpha + e2 * (r * r);
        [y[1], y[1] - k * y[0]]
    };

    while x > x_end {
        if x + h < x_end {
            h = x_end - x;
        }
        let (y_new, err) = dp54_step(&rhs, x, &y, h);
        let tol_scale = cfg.abs_tol
            + cfg.rel_tol * y[0].norm().max(y[1].norm()).max(y_new[0].norm().max(y_new[1].norm()));
        let err_ratio = err / tol_scale;
        if err_ratio <= 1.0 {
            x += h;
            y = y_new;
            let mag = y[0].norm().max(y[1].norm());
            if mag > RESCALE_THRESHOLD {
                y[0] /= mag;
                y[1] /= mag;
                log_scale += mag.ln();
                if !log_scale.is_finite() {
                    return Err(Error::Overflow("log-scale accumulator".into()));
                }
            }
        }
        let factor = if err_ratio > 0.0 { 0.9 * err_ratio.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h.abs() > h_max {
            h = -h_max;
        }
        if h.abs() < MIN_STEP_FACTOR * x.abs().max(1.0) {
            return Err(Error::StepUnderflow(x.exp()));
        }
    }
    // v = r du/dr  ->  du/dr = v / r
    Ok(OdeSolution { u: y[0], du: y[1] / r_stop, log_scale })
}

/// Fixed-step variant used for convergence diagnostics.
pub fn integrate_inward_fixed(
    e: Complex64,
    c: &CouplingData,
    r_outer: f64,
    r_stop: f64,
    steps: usize,
) -> Result<OdeSolution> {
    if !(r_stop > 0.0 && r_stop < r_outer) || steps == 0 {
        return Err(Error::Domain("bad fixed-step integration bounds".into()));
    }
    let alpha = c.alpha;
    let e2 = e * e;
    let rhs = |x: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let r = x.exp();
        let k = alpha + e2 * (r * r);
        [y[1], y[1] - k * y[0]]
    };
    let (u0, du0) = asymptotic_init(e, r_outer, alpha);
    let mut y = [u0, du0 * r_outer];
    let x_start = r_outer.ln();
    let h = (r_stop.ln() - x_start) / steps as f64;
    let mut x = x_start;
    for _ in 0..steps {
        let (y_new, _) = dp54_step(&rhs, x, &y, h);
        y = y_new;
        x += h;
    }
    Ok(OdeSolution { u: y[0], du: y[1] / r_stop, log_scale: 0.0 })
}

/// One Dormand-Prince 5(4) step; returns the 5th-order solution and the
/// embedded error estimate (max component norm of y5 - y4).
fn dp54_step<F>(rhs: &F, x: f64, y: &[Complex64; 2], h: f64) -> ([Complex64; 2], f64)
where
    F: Fn(f64, &[Complex64; 2]) -> [Complex64; 2],
{
    let k1 = rhs(x, y);
    let y2 = add(y, &[(h / 5.0, &k1)]);
    let k2 = rhs(x + h / 5.0, &y2);
    let y3 = add(y, &[(3.0 * h / 40.0, &k1), (9.0 * h / 40.0, &k2)]);
    let k3 = rhs(x + 3.0 * h / 10.0, &y3);
    let y4 = add(y, &[(44.0 * h / 45.0, &k1), (-56.0 * h / 15.0, &k2), (32.0 * h / 9.0, &k3)]);
    let k4 = rhs(x + 4.0 * h / 5.0, &y4);
    let y5 = add(
        y,
        &[
            (19372.0 * h / 6561.0, &k1),
            (-25360.0 * h / 2187.0, &k2),
            (64448.0 * h / 6561.0, &k3),
            (-212.0 * h / 729.0, &k4),
        ],
    );
    let k5 = rhs(x + 8.0 * h / 9.0, &y5);
    let y6 = add(
        y,
        &[
            (9017.0 * h / 3168.0, &k1),
            (-355.0 * h / 33.0, &k2),
            (46732.0 * h / 5247.0, &k3),
            (49.0 * h / 176.0, &k4),
            (-5103.0 * h / 18656.0, &k5),
        ],
    );
    let k6 = rhs(x + h, &y6);
    let sol = add(
        y,
        &[
            (35.0 * h / 384.0, &k1),
            (500.0 * h / 1113.0, &k3),
            (125.0 * h / 192.0, &k4),
            (-2187.0 * h / 6784.0, &k5),
            (11.0 * h / 84.0, &k6),
        ],
    );
    let k7 = rhs(x + h, &sol);
    let err_vec = [
        (35.0 / 384.0 - 5179.0 / 57600.0) * k1[0]
            + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3[0]
            + (125.0 / 192.0 - 393.0 / 640.0) * k4[0]
            + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5[0]
            + (11.0 / 84.0 - 187.0 / 2100.0) * k6[0]
            - k7[0] / 40.0,
        (35.0 / 384.0 - 5179.0 / 57600.0) * k1[1]
            + (500.0 / 1113.0 - 7571.0 / 16695.0) * k3[1]
            + (125.0 / 192.0 - 393.0 / 640.0) * k4[1]
            + (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5[1]
            + (11.0 / 84.0 - 187.0 / 2100.0) * k6[1]
            - k7[1] / 40.0,
    ];
    let err = (h.abs()) * err_vec[0].norm().max(err_vec[1].norm());
    (sol, err)
}

fn add(y: &[Complex64; 2], terms: &[(f64, &[Complex64; 2])]) -> [Complex64; 2] {
    let mut out = *y;
    for (w, k) in terms {
        out[0] += *w * k[0];
        out[1] += *w * k[1];
    }
    out
}

/// The matching determinant computed through the ODE route, normalized by
/// max(|u|, r0 |u'|) so the arbitrary solution scale cancels exactly.
pub fn matching_determinant_ode(
    e: Complex64,
    p: &MatchingProblem,
    cfg: &IntegratorConfig,
) -> Result<Complex64> {
    let sol = integrate_inward(e, p.coupling(), cfg, p.r0())?;
    let raw = sol.du - sol.u / (2.0 * p.r0());
    let scale = sol.u.norm().max(p.r0() * sol.du.norm());
    if scale == 0.0 {
        return Err(Error::Domain("integrated solution vanished".into()));
    }
    Ok(raw * p.r0() / scale)
}

/// Polish a determinant zero through the ODE route starting from a seed
/// (typically the closed-form rung).
pub fn refine_ladder_zero_ode(
    seed: Complex64,
    p: &MatchingProblem,
    steps_per_decade: u32,
) -> Result<Complex64> {
    let f = move |z: Complex64| {
        let mut cfg = IntegratorConfig::for_energy(z)?;
        cfg.steps_per_decade = steps_per_decade;
        matching_determinant_ode(z, p, &cfg)
    };
    refine_root(&f, seed)
}
