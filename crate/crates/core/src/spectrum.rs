//! Closed-form frequency-domain route: mode functions of the radial problem,
//! the matching determinant whose zeros are the quasi-mode energies, ladder
//! search in nested log-|E| windows, and the ladder observables (geometric
//! ratio, widths, anchor, effective temperature).
//!
//! Two channels of the same radial equation appear. `mode_function` is the
//! radiating channel `sqrt(r) H1_{i sigma}(E r)` (behaves as e^{+iEr} at
//! large r). The determinant instead pairs the absorbed near-origin branch
//! with the channel that stays bounded at infinity for Im E <= 0,
//! `sqrt(r) H2_{i sigma}(E r)`: a decaying quasi-mode loses amplitude through
//! the core, not by radiation to infinity. Matching the envelope growth
//! sqrt(r) of the absorbed branch at r0 quantizes the spectrum; the phase
//! winding r^{-i sigma} is carried by the core continuation, and restricting
//! the search to Im E <= 0 selects the decaying member of each +-E pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{radial_current, ComplexEnergy, CouplingData};
use crate::rootfind::{count_zeros, refine_root, subdivide_and_locate, SearchRect};
use crate::specfun::{hankel_with_derivative, SeriesConfig};

/// The quantization problem: supercritical coupling, matching radius, and
/// the UV window edge `|E| r0 <= uv_window` that defines rung n = 0.
#[derive(Debug, Clone)]
pub struct MatchingProblem {
    coupling: CouplingData,
    sigma: f64,
    r0: f64,
    uv_window: f64,
    series: SeriesConfig,
}

impl MatchingProblem {
    pub fn new(coupling: CouplingData, r0: f64) -> Result<Self> {
        Self::with_window(coupling, r0, 0.5)
    }

    pub fn with_window(coupling: CouplingData, r0: f64, uv_window: f64) -> Result<Self> {
        let sigma = coupling.sigma_supercritical()?;
        if !(r0 > 0.0) {
            return Err(Error::InvalidParams(format!("r0 must be positive, got {r0}")));
        }
        if !(uv_window > 0.0 && uv_window <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "uv window must lie in (0, 0.5], got {uv_window}"
            )));
        }
        Ok(MatchingProblem { coupling, sigma, r0, uv_window, series: SeriesConfig::default() })
    }

    pub fn coupling(&self) -> &CouplingData {
        &self.coupling
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn uv_window(&self) -> f64 {
        self.uv_window
    }

    pub fn series_config(&self) -> &SeriesConfig {
        &self.series
    }

    /// Predicted magnitude ratio of consecutive rungs, exp(-pi/sigma).
    pub fn predicted_ratio(&self) -> f64 {
        (-std::f64::consts::PI / self.sigma).exp()
    }
}

/// One rung of the decay ladder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResonanceEntry {
    pub n: usize,
    pub energy: ComplexEnergy,
    pub determinant_residual: f64,
}

/// Least-squares summary of a computed ladder.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LadderFit {
    /// Fitted |E_{n+1}| / |E_n|.
    pub ratio: f64,
    /// Fitted slope of ln |E_n| against n; `ratio = exp(log_slope)`.
    pub log_slope: f64,
    /// Max deviation of arg E_n from the ladder mean, radians.
    pub phase_drift: f64,
    /// The rung at n = 0.
    pub e0: Complex64,
    /// Emergent temperature |E_0| / (2 pi sigma), k_B = 1.
    pub t_eff: f64,
    /// RMS residual of the ln |E_n| fit.
    pub residual_rms: f64,
}

/// Coefficients of the large-r oscillatory split u ~ A e^{iEr} + B e^{-iEr}.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticDecomposition {
    pub a: Complex64,
    pub b: Complex64,
}

/// Radiating-channel mode function: u = sqrt(r) H1_{i sigma}(E r) and its
/// r-derivative. Solves -u'' - (alpha/r^2) u = E^2 u.
pub fn mode_function(
    e: Complex64,
    r: f64,
    coupling: &CouplingData,
    cfg: &SeriesConfig,
) -> Result<(Complex64, Complex64)> {
    channel_function(1, e, r, coupling, cfg)
}

/// Bounded-channel mode function: u = sqrt(r) H2_{i sigma}(E r), the solution
/// that decays as r -> infinity for Im E < 0.
pub fn bounded_mode_function(
    e: Complex64,
    r: f64,
    coupling: &CouplingData,
    cfg: &SeriesConfig,
) -> Result<(Complex64, Complex64)> {
    channel_function(2, e, r, coupling, cfg)
}

fn channel_function(
    kind: u8,
    e: Complex64,
    r: f64,
    coupling: &CouplingData,
    cfg: &SeriesConfig,
) -> Result<(Complex64, Complex64)> {
    let sigma = coupling.sigma_supercritical()?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("mode function requires r > 0, got {r}")));
    }
    if e == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("mode function requires E != 0".into()));
    }
    let sqrt_r = r.sqrt();
    let (h, dh) = hankel_with_derivative(kind, sigma, e * r, cfg)?;
    let u = sqrt_r * h;
    let du = h / (2.0 * sqrt_r) + sqrt_r * e * dh;
    Ok((u, du))
}

/// The matching determinant. Zeros in the closed lower half-plane are the
/// quasi-mode energies. Normalized by max(|u|, r0 |u'|) for root-finder
/// conditioning; the normalization is positive, so phase tracking and zero
/// locations are unaffected.
pub fn matching_determinant(e: Complex64, p: &MatchingProblem) -> Result<Complex64> {
    let (u, du) = bounded_mode_function(e, p.r0, &p.coupling, &p.series)?;
    let raw = du - u / (2.0 * p.r0);
    let scale = u.norm().max(p.r0 * du.norm());
    if scale == 0.0 {
        return Err(Error::Domain("mode function vanished identically".into()));
    }
    Ok(raw * p.r0 / scale)
}

/// The quasi-mode reconstructed from a determinant zero: the absorbed-branch
/// core `c r^{1/2 - i sigma}` glued by value continuity at r0 to the bounded
/// outer channel.
#[derive(Debug, Clone)]
pub struct MatchedMode {
    pub energy: Complex64,
    pub core_coefficient: Complex64,
    sigma: f64,
    r0: f64,
    coupling: CouplingData,
    series: SeriesConfig,
}

impl MatchedMode {
    /// Core-side field and derivative at radius r (the absorbed branch).
    pub fn core_at(&self, r: f64) -> Result<(Complex64, Complex64)> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("core_at requires r > 0, got {r}")));
        }
        let exponent = Complex64::new(0.5, -self.sigma);
        let u = self.core_coefficient * (exponent * r.ln()).exp();
        let du = u * exponent / r;
        Ok((u, du))
    }

    /// Outer-side field and derivative at radius r (bounded channel).
    pub fn outer_at(&self, r: f64) -> Result<(Complex64, Complex64)> {
        bounded_mode_function(self.energy, r, &self.coupling, &self.series)
    }

    /// Radial current on the core side of the matching radius; strictly
    /// negative (flux into the absorber) for a nonzero mode.
    pub fn core_current(&self) -> f64 {
        let (u, du) = self.core_at(self.r0).expect("r0 is positive");
        radial_current(u, du)
    }
}

/// Build the glued mode for a ladder energy.
pub fn resonance_mode(e: Complex64, p: &MatchingProblem) -> Result<MatchedMode> {
    let (u_outer, _) = bounded_mode_function(e, p.r0, &p.coupling, &p.series)?;
    // c = u(r0) / r0^{1/2 - i sigma} on the principal branch
    let exponent = Complex64::new(0.5, -p.sigma);
    let c = u_outer * (-exponent * p.r0.ln()).exp();
    Ok(MatchedMode {
        energy: e,
        core_coefficient: c,
        sigma: p.sigma,
        r0: p.r0,
        coupling: p.coupling,
        series: p.series,
    })
}

const LADDER_RESIDUAL_TOL: f64 = 1e-10;
/// Half-width of the search rectangles relative to the annulus outer edge.
/// The physical rungs sit on the negative imaginary axis; the margin catches
/// any drift without swallowing neighbouring rungs.
const WINDOW_RE_FRACTION: f64 = 0.6;

fn annulus_rect(lo: f64, hi: f64) -> Result<SearchRect> {
    SearchRect::new(-WINDOW_RE_FRACTION * hi, WINDOW_RE_FRACTION * hi, -hi, -lo)
}

/// Locate `count` consecutive rungs of the decay ladder, indexed by
/// decreasing |E| starting from the largest rung inside the UV window.
pub fn find_ladder(p: &MatchingProblem, count: usize) -> Result<Vec<ResonanceEntry>> {
    if count < 3 {
        return Err(Error::InvalidParams(format!(
            "ladder needs at least 3 rungs to be meaningful, requested {count}"
        )));
    }
    let f = |z: Complex64| matching_determinant(z, p);
    let ratio = p.predicted_ratio();
    let uv_edge = p.uv_window / p.r0;

    // bootstrap: walk annuli of one predicted ratio step down from the UV
    // edge until the first rung appears
    let mut anchor: Option<Complex64> = None;
    let mut hi = uv_edge;
    for _ in 0..4 {
        let lo = hi * ratio;
        let rect = annulus_rect(lo, hi)?;
        let n = count_zeros(&f, &rect)?;
        match n {
            0 => {
                hi = lo;
                continue;
            }
            1 => {
                let report = subdivide_and_locate(&f, &rect, 1)?;
                anchor = Some(report.roots[0]);
                break;
            }
            more => {
                return Err(Error::LadderGap(format!(
                    "top window [{lo:.3e}, {hi:.3e}] holds {more} zeros, expected at most 1"
                )));
            }
        }
    }
    let anchor = anchor.ok_or_else(|| {
        Error::LadderGap(format!(
            "no rung found below the UV edge |E| = {uv_edge:.3e} within four ratio steps"
        ))
    })?;

    let mut entries = Vec::with_capacity(count);
    push_entry(&mut entries, anchor, p)?;

    // walk down: each next rung sits in a one-step window with 50% margin
    let half_step = ratio.sqrt();
    let mut current = anchor;
    while entries.len() < count {
        let target = current.norm() * ratio;
        let lo = target * half_step;
        let hi = target / half_step;
        let rect = annulus_rect(lo, hi)?;
        let n = count_zeros(&f, &rect)?;
        if n != 1 {
            return Err(Error::LadderGap(format!(
                "window [{lo:.3e}, {hi:.3e}] holds {n} zeros, expected exactly 1"
            )));
        }
        let report = subdivide_and_locate(&f, &rect, 1)?;
        current = report.roots[0];
        push_entry(&mut entries, current, p)?;
    }
    Ok(entries)
}

fn push_entry(entries: &mut Vec<ResonanceEntry>, root: Complex64, p: &MatchingProblem) -> Result<()> {
    let root = refine_root(&|z| matching_determinant(z, p), root)?;
    let residual = matching_determinant(root, p)?.norm();
    if residual > LADDER_RESIDUAL_TOL {
        return Err(Error::NonConvergence(format!(
            "rung at {root} polished only to |W| = {residual:.3e}"
        )));
    }
    if let Some(prev) = entries.last() {
        if root.norm() >= prev.energy.value.norm() {
            return Err(Error::LadderGap(format!(
                "rung magnitudes must strictly decrease: |{root}| >= |{}|",
                prev.energy.value
            )));
        }
    }
    entries.push(ResonanceEntry {
        n: entries.len(),
        energy: ComplexEnergy::new(root),
        determinant_residual: residual,
    });
    Ok(())
}

/// Least-squares line through (n, ln |E_n|) plus the ladder observables.
pub fn fit_ladder(entries: &[ResonanceEntry], c: &CouplingData) -> Result<LadderFit> {
    if entries.len() < 3 {
        return Err(Error::Degenerate(format!(
            "ladder fit needs >= 3 rungs, got {}",
            entries.len()
        )));
    }
    let sigma = c.sigma_supercritical()?;
    let n = entries.len() as f64;
    let xs: Vec<f64> = entries.iter().map(|e| e.n as f64).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.energy.value.norm().ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    // circular mean of the rung phases
    let mean_dir: Complex64 = entries
        .iter()
        .map(|e| e.energy.value / e.energy.value.norm())
        .sum::<Complex64>();
    let mean_arg = mean_dir.arg();
    let phase_drift = entries
        .iter()
        .map(|e| {
            let mut d = e.energy.value.arg() - mean_arg;
            if d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            } else if d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            d.abs()
        })
        .fold(0.0, f64::max);

    let e0 = entries
        .iter()
        .find(|e| e.n == 0)
        .ok_or_else(|| Error::Degenerate("ladder carries no n = 0 rung".into()))?
        .energy
        .value;
    Ok(LadderFit {
        ratio: slope.exp(),
        log_slope: slope,
        phase_drift,
        e0,
        t_eff: e0.norm() / (2.0 * std::f64::consts::PI * sigma),
        residual_rms,
    })
}

/// Decay widths Gamma_n = -2 Im E_n, one per rung.
pub fn width_ladder(entries: &[ResonanceEntry]) -> Vec<f64> {
    entries.iter().map(|e| e.energy.width()).collect()
}

/// Ratios of consecutive widths.
pub fn width_ratios(entries: &[ResonanceEntry]) -> Vec<f64> {
    entries.windows(2).map(|w| w[1].energy.width() / w[0].energy.width()).collect()
}

/// Solve the 2x2 system for the oscillatory coefficients (A, B) from field
/// samples at two probe radii.
pub fn asymptotic_split(
    e: Complex64,
    probes: [(f64, Complex64); 2],
) -> Result<AsymptoticDecomposition> {
    for (r, _) in &probes {
        if e.norm() * r < 20.0 {
            return Err(Error::Domain(format!(
                "asymptotic split requires |E| r >= 20, got {}",
                e.norm() * r
            )));
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let (r1, u1) = probes[0];
    let (r2, u2) = probes[1];
    let m = [
        [(i * e * r1).exp(), (-i * e * r1).exp()],
        [(i * e * r2).exp(), (-i * e * r2).exp()],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // condition number of the 2x2 from its singular values
    let frob2 = m.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>();
    let det_abs = det.norm();
    if det_abs == 0.0 {
        return Err(Error::IllConditioned("probe matrix is singular".into()));
    }
    let s2 = frob2 / 2.0 + ((frob2 / 2.0).powi(2) - det_abs * det_abs).max(0.0).sqrt();
    let cond = s2 / (det_abs * det_abs / s2);
    if cond > 1e16 {
        return Err(Error::IllConditioned(format!(
            "probe separation near a half-wavelength multiple (condition {cond:.3e})"
        )));
    }
    let a = (u1 * m[1][1] - u2 * m[0][1]) / det;
    let b = (u2 * m[0][0] - u1 * m[1][0]) / det;
    Ok(AsymptoticDecomposition { a, b })
}
