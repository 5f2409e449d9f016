//! Matrix-pencil fit of a uniformly sampled complex signal as a sum of
//! damped complex exponentials, with the convention u(t) ~ e^{-iEt}.
//!
//! The Hankel pencil (Y0, Y1) is rank-filtered through the SVD; the reduced
//! pencil eigenvalues give z_j = e^{-i E_j dt} and a Vandermonde least
//! squares gives the amplitudes. More noise-robust than the classical
//! polynomial formulation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PencilFit {
    /// Frequencies E_j = i ln(z_j) / dt, ordered by decreasing |amplitude|.
    pub frequencies: Vec<Complex64>,
    pub amplitudes: Vec<Complex64>,
    /// Relative RMS misfit over the fitted window.
    pub residual: f64,
}

const RANK_CUTOFF: f64 = 1e-10;
const AMPLITUDE_CONDITION_LIMIT: f64 = 1e12;

/// Fit up to `max_modes` complex exponentials to `signal` sampled at
/// spacing `dt`. Pencil length defaults to a third of the window.
pub fn matrix_pencil(signal: &[Complex64], dt: f64, max_modes: usize) -> Result<PencilFit> {
    let n = signal.len();
    if n < 24 {
        return Err(Error::Degenerate(format!("pencil needs >= 24 samples, got {n}")));
    }
    if max_modes == 0 {
        return Err(Error::Degenerate("max_modes must be positive".into()));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("signal contains non-finite samples".into()));
    }
    let l = (n / 3).max(max_modes + 1).min(n / 2);
    let rows = n - l;

    let y0 = DMatrix::from_fn(rows, l, |i, j| signal[i + j]);
    let y1 = DMatrix::from_fn(rows, l, |i, j| signal[i + j + 1]);

    let svd = y0.svd(true, true);
    let s = &svd.singular_values;
    let s0 = s[0];
    if s0 == 0.0 {
        return Err(Error::Degenerate("signal window is identically zero".into()));
    }
    let rank = s.iter().take_while(|v| **v > s0 * RANK_CUTOFF).count();
    let k = rank.min(max_modes);
    if k == 0 {
        return Err(Error::Degenerate("signal has no resolvable modes".into()));
    }
    if s0 / s[k - 1] > AMPLITUDE_CONDITION_LIMIT {
        return Err(Error::IllConditioned(format!(
            "pencil condition {:.3e} exceeds limit; use a shorter window or fewer modes",
            s0 / s[k - 1]
        )));
    }

    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    let uk = u.columns(0, k);
    let vk_t = vt.rows(0, k);
    // reduced pencil: A = S_k^{-1} U_k^H Y1 V_k
    let mut a = uk.adjoint() * &y1 * vk_t.adjoint();
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] /= Complex64::new(s[i], 0.0);
        }
    }

    let schur = a
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::NonConvergence("pencil eigenvalue iteration stalled".into()))?;
    let (_, t) = schur.unpack();
    let z: Vec<Complex64> = (0..k).map(|i| t[(i, i)]).collect();

    // amplitudes from a Vandermonde least squares over the whole window
    let v = DMatrix::from_fn(n, k, |i, j| z[j].powu(i as u32));
    let rhs = DVector::from_iterator(n, signal.iter().copied());
    let vsvd = v.clone().svd(true, true);
    let sv = &vsvd.singular_values;
    if sv[0] / sv[k - 1].max(f64::MIN_POSITIVE) > AMPLITUDE_CONDITION_LIMIT {
        return Err(Error::IllConditioned(format!(
            "amplitude solve condition {:.3e} exceeds limit; use a shorter window or fewer modes",
            sv[0] / sv[k - 1].max(f64::MIN_POSITIVE)
        )));
    }
    let amps = vsvd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::NonConvergence(format!("amplitude least squares failed: {e}")))?;
    let fitted = &v * &amps;
    let num = (&rhs - &fitted).norm();
    let residual = num / rhs.norm();

    let i_unit = Complex64::new(0.0, 1.0);
    let mut modes: Vec<(Complex64, Complex64)> = z
        .iter()
        .zip(amps.iter())
        .map(|(zj, aj)| (i_unit * zj.ln() / dt, *aj))
        .collect();
    modes.sort_by(|x, y| y.1.norm().partial_cmp(&x.1.norm()).unwrap());

    Ok(PencilFit {
        frequencies: modes.iter().map(|m| m.0).collect(),
        amplitudes: modes.iter().map(|m| m.1).collect(),
        residual,
    })
}
