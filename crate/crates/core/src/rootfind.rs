//! Complex-plane zero location for analytic functions: winding-number
//! counting on rectangle boundaries, adaptive subdivision down to single
//! zeros, and Muller polishing.
//!
//! Counting tracks the phase of f along the boundary and doubles the
//! sampling until no step advances the phase by more than pi/2, which pins
//! the winding number for analytic f with bounded log-derivative.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Axis-aligned search rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub boundary_samples: usize,
}

impl SearchRect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = SearchRect { re_min, re_max, im_min, im_max, boundary_samples: 256 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::Config(format!(
                "degenerate rectangle [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        if self.boundary_samples < 64 {
            return Err(Error::Config("boundary_samples must be >= 64".into()));
        }
        Ok(())
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Boundary point at parameter s in [0, 1), counterclockwise.
    fn boundary_point(&self, s: f64) -> Complex64 {
        let corners = self.corners();
        let t = 4.0 * s.rem_euclid(1.0);
        let leg = (t.floor() as usize).min(3);
        let frac = t - leg as f64;
        corners[leg] + (corners[(leg + 1) % 4] - corners[leg]) * frac
    }
}

/// Located zeros with diagnostics.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub multiplicity_total: usize,
    pub residual_max: f64,
    pub iterations: usize,
}

const MAGNITUDE_FLOOR: f64 = 1e-13;
const MAX_BOUNDARY_REFINEMENTS: u32 = 8;
const MAX_SUBDIVISION_DEPTH: usize = 40;
const POLISH_TOL: f64 = 1e-12;
const MAX_POLISH_ITERATIONS: usize = 100;

/// Count zeros (with multiplicity) inside `rect` by the winding number of f
/// along the boundary.
pub fn count_zeros<F>(f: &F, rect: &SearchRect) -> Result<usize>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    rect.validate()?;
    let mut n = rect.boundary_samples;
    for _ in 0..=MAX_BOUNDARY_REFINEMENTS {
        match try_winding(f, rect, n)? {
            Some(w) => return Ok(w),
            None => n *= 2,
        }
    }
    Err(Error::NonConvergence(format!(
        "phase tracking on the boundary failed after refinement to {n} samples"
    )))
}

/// One pass of phase tracking at fixed sampling; None means a phase step
/// exceeded pi/2 and the sampling must double.
fn try_winding<F>(f: &F, rect: &SearchRect, samples: usize) -> Result<Option<usize>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut min_abs = f64::INFINITY;
    let mut total = 0.0f64;
    let first = f(rect.boundary_point(0.0))?;
    let mut prev_arg = first.arg();
    min_abs = min_abs.min(first.norm());
    for k in 1..=samples {
        let s = k as f64 / samples as f64;
        let v = f(rect.boundary_point(s))?;
        let mag = v.norm();
        min_abs = min_abs.min(mag);
        if mag < MAGNITUDE_FLOOR {
            return Err(Error::BoundaryZero { min_abs });
        }
        let arg = v.arg();
        let mut step = arg - prev_arg;
        if step > std::f64::consts::PI {
            step -= 2.0 * std::f64::consts::PI;
        } else if step < -std::f64::consts::PI {
            step += 2.0 * std::f64::consts::PI;
        }
        if step.abs() > std::f64::consts::FRAC_PI_2 {
            return Ok(None);
        }
        total += step;
        prev_arg = arg;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.25 {
        return Ok(None);
    }
    if rounded < -0.5 {
        return Err(Error::NonConvergence(format!(
            "negative winding number {rounded} (function not analytic on the rectangle?)"
        )));
    }
    Ok(Some(rounded.max(0.0) as usize))
}

/// Muller iteration from a seed; converges to |f| <= POLISH_TOL * scale or a
/// relative step below 1e-14.
pub fn refine_root<F>(f: &F, seed: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let scale = seed.norm().max(1e-3);
    let h = 1e-4 * scale;
    let mut x0 = seed + Complex64::new(h, 0.0);
    let mut x1 = seed + Complex64::new(0.0, h);
    let mut x2 = seed;
    let mut f0 = f(x0)?;
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let f_scale = f2.norm().max(f1.norm()).max(f0.norm()).max(f64::MIN_POSITIVE);

    for _ in 0..MAX_POLISH_ITERATIONS {
        if f2.norm() <= POLISH_TOL * f_scale {
            return Ok(x2);
        }
        let q = (x2 - x1) / (x1 - x0);
        let a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
        let b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
        let c = (1.0 + q) * f2;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let denom = if (b + disc).norm() >= (b - disc).norm() { b + disc } else { b - disc };
        let step = if denom.norm() == 0.0 {
            // flat quadratic: fall back to a secant step
            -(x2 - x1) * f2 / (f2 - f1)
        } else {
            -(x2 - x1) * 2.0 * c / denom
        };
        let x3 = x2 + step;
        if !x3.is_finite() {
            return Err(Error::NonConvergence("muller step left the finite plane".into()));
        }
        let f3 = f(x3)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
        if step.norm() <= 1e-14 * x2.norm().max(1e-300) {
            return Ok(x2);
        }
    }
    if f2.norm() <= 1e-9 * f_scale {
        // converged in value but stagnating in step; accept the best point
        return Ok(x2);
    }
    Err(Error::NonConvergence(format!(
        "muller did not converge from seed {seed} (|f| = {:.3e})",
        f2.norm()
    )))
}

/// Recursively bisect `rect` until each cell holds at most one zero, then
/// polish each zero. Roots are reported pairwise distinct beyond 1e-10
/// relative separation.
pub fn subdivide_and_locate<F>(f: &F, rect: &SearchRect, max_roots: usize) -> Result<RootReport>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let total = count_zeros(f, rect)?;
    if total > max_roots {
        return Err(Error::LadderGap(format!(
            "rectangle holds {total} zeros, caller allowed {max_roots}"
        )));
    }
    let mut roots: Vec<Complex64> = Vec::new();
    let mut iterations = 0usize;
    locate_recursive(f, rect, total, 0, &mut roots, &mut iterations)?;

    let mut residual_max = 0.0f64;
    for root in &roots {
        residual_max = residual_max.max(f(*root)?.norm());
    }
    Ok(RootReport { multiplicity_total: total, roots, residual_max, iterations })
}

fn locate_recursive<F>(
    f: &F,
    rect: &SearchRect,
    count: usize,
    depth: usize,
    roots: &mut Vec<Complex64>,
    iterations: &mut usize,
) -> Result<()>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if count == 0 {
        return Ok(());
    }
    if depth > MAX_SUBDIVISION_DEPTH {
        return Err(Error::MaxDepth(MAX_SUBDIVISION_DEPTH));
    }
    *iterations += 1;
    if count == 1 {
        // seed from the smallest |f| among a coarse in-cell stencil
        let mut seeds = vec![rect.center()];
        let qr = 0.25 * (rect.re_max - rect.re_min);
        let qi = 0.25 * (rect.im_max - rect.im_min);
        for (sr, si) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            seeds.push(rect.center() + Complex64::new(sr * qr, si * qi));
        }
        let mut best = seeds[0];
        let mut best_mag = f64::INFINITY;
        for s in seeds {
            if let Ok(v) = f(s) {
                if v.norm() < best_mag {
                    best_mag = v.norm();
                    best = s;
                }
            }
        }
        if let Ok(root) = refine_root(f, best) {
            let margin_re = 1e-6 * (rect.re_max - rect.re_min);
            let margin_im = 1e-6 * (rect.im_max - rect.im_min);
            let inside = root.re >= rect.re_min - margin_re
                && root.re <= rect.re_max + margin_re
                && root.im >= rect.im_min - margin_im
                && root.im <= rect.im_max + margin_im;
            let distinct = roots
                .iter()
                .all(|r| (*r - root).norm() > 1e-10 * root.norm().max(1e-300));
            if inside && distinct {
                roots.push(root);
                return Ok(());
            }
            if inside && !distinct {
                // genuine duplicate across a shared edge; nothing new to add
                return Ok(());
            }
        }
        // polish escaped the cell: shrink it around the zero and retry
        let (a, ca, b, _cb) = split_counted(f, rect, 1)?;
        let target = if ca == 1 { a } else { b };
        return locate_recursive(f, &target, 1, depth + 1, roots, iterations);
    }
    let (a, ca, b, cb) = split_counted(f, rect, count)?;
    locate_recursive(f, &a, ca, depth + 1, roots, iterations)?;
    locate_recursive(f, &b, cb, depth + 1, roots, iterations)
}

/// Split the rectangle so that both halves count cleanly; a cut that lands
/// on (or too near) a zero is nudged to an alternative fraction.
fn split_counted<F>(
    f: &F,
    rect: &SearchRect,
    count: usize,
) -> Result<(SearchRect, usize, SearchRect, usize)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut last_err = None;
    for frac in [0.5, 0.568, 0.437, 0.623, 0.391, 0.545] {
        let (a, b) = split(rect, frac);
        match (count_zeros(f, &a), count_zeros(f, &b)) {
            (Ok(ca), Ok(cb)) if ca + cb == count => return Ok((a, ca, b, cb)),
            (Ok(ca), Ok(cb)) => {
                last_err = Some(Error::NonConvergence(format!(
                    "subdivision lost zeros: {count} != {ca} + {cb}"
                )));
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NonConvergence("subdivision failed".into())))
}

fn split(rect: &SearchRect, frac: f64) -> (SearchRect, SearchRect) {
    let dre = rect.re_max - rect.re_min;
    let dim = rect.im_max - rect.im_min;
    if dre >= dim {
        let cut = rect.re_min + frac * dre;
        (
            SearchRect { re_max: cut, ..*rect },
            SearchRect { re_min: cut, ..*rect },
        )
    } else {
        let cut = rect.im_min + frac * dim;
        (
            SearchRect { im_max: cut, ..*rect },
            SearchRect { im_min: cut, ..*rect },
        )
    }
}
