//! Machine-readable output documents: the spectrum table, the ladder-fit
//! report, mode reports, and probe series. JSON carries structured reports;
//! CSV carries series/tables with `#`-prefixed metadata comment lines.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a file
//! read back yields bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{LadderFit, ResonanceEntry};
use crate::timedomain::{ModeSet, SpectrumComparison, TimeSeries};

/// Header metadata carried by every spectrum document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub gamma: f64,
    pub ell: u32,
    pub sigma: f64,
    pub r0: f64,
    pub uv_window: f64,
    pub count: usize,
    pub tool_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub re_e: f64,
    pub im_e: f64,
    pub gamma_n: f64,
    pub abs_e_r0: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub meta: SpectrumMeta,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumDoc {
    pub fn from_entries(meta: SpectrumMeta, entries: &[ResonanceEntry]) -> Self {
        let rows = entries
            .iter()
            .map(|e| SpectrumRow {
                n: e.n,
                re_e: e.energy.value.re,
                im_e: e.energy.value.im,
                gamma_n: e.energy.width(),
                abs_e_r0: e.energy.value.norm() * meta.r0,
                residual: e.determinant_residual,
            })
            .collect();
        SpectrumDoc { meta, rows }
    }

    pub fn energies(&self) -> Vec<Complex64> {
        self.rows.iter().map(|r| Complex64::new(r.re_e, r.im_e)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(out, "# gamma = {}", m.gamma);
        let _ = writeln!(out, "# ell = {}", m.ell);
        let _ = writeln!(out, "# sigma = {}", m.sigma);
        let _ = writeln!(out, "# r0 = {}", m.r0);
        let _ = writeln!(out, "# uv_window = {}", m.uv_window);
        let _ = writeln!(out, "# count = {}", m.count);
        let _ = writeln!(out, "# tool_version = {}", m.tool_version);
        let _ = writeln!(out, "n,re_E,im_E,gamma_n,abs_E_r0,residual");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n, r.re_e, r.im_e, r.gamma_n, r.abs_e_r0, r.residual
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta_pairs = std::collections::HashMap::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    meta_pairs.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !saw_header {
                let expect = "n,re_E,im_E,gamma_n,abs_E_r0,residual";
                if line != expect {
                    return Err(Error::Config(format!(
                        "line {}: expected header '{expect}', found '{line}'",
                        lineno + 1
                    )));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Config(format!(
                    "line {}: expected 6 fields, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str, name: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("line {}: bad {name} value '{s}'", lineno + 1))
                })
            };
            rows.push(SpectrumRow {
                n: fields[0].trim().parse().map_err(|_| {
                    Error::Config(format!("line {}: bad n value '{}'", lineno + 1, fields[0]))
                })?,
                re_e: parse(fields[1], "re_E")?,
                im_e: parse(fields[2], "im_E")?,
                gamma_n: parse(fields[3], "gamma_n")?,
                abs_e_r0: parse(fields[4], "abs_E_r0")?,
                residual: parse(fields[5], "residual")?,
            });
        }
        let get = |k: &str| -> Result<f64> {
            meta_pairs
                .get(k)
                .ok_or_else(|| Error::Config(format!("missing metadata field '{k}'")))?
                .parse()
                .map_err(|_| Error::Config(format!("bad metadata value for '{k}'")))
        };
        Ok(SpectrumDoc {
            meta: SpectrumMeta {
                gamma: get("gamma")?,
                ell: get("ell")? as u32,
                sigma: get("sigma")?,
                r0: get("r0")?,
                uv_window: get("uv_window")?,
                count: get("count")? as usize,
                tool_version: meta_pairs.get("tool_version").cloned().unwrap_or_default(),
            },
            rows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Load from a path, sniffing the format from the first byte.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }
}

/// Ladder-fit report serialized as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub fitted_ratio: f64,
    pub predicted_ratio: f64,
    pub relative_deviation: f64,
    pub log_slope: f64,
    pub phase_drift: f64,
    pub e0: ComplexField,
    pub t_eff: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexField {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexField {
    fn from(z: Complex64) -> Self {
        ComplexField { re: z.re, im: z.im }
    }
}

impl FitReport {
    pub fn new(fit: &LadderFit, predicted_ratio: f64) -> Self {
        FitReport {
            fitted_ratio: fit.ratio,
            predicted_ratio,
            relative_deviation: (fit.ratio / predicted_ratio - 1.0).abs(),
            log_slope: fit.log_slope,
            phase_drift: fit.phase_drift,
            e0: fit.e0.into(),
            t_eff: fit.t_eff,
            residual_rms: fit.residual_rms,
        }
    }
}

/// Two-column plot data (plus the fitted line) for ln Gamma_n against n.
pub fn width_plot_csv(entries: &[ResonanceEntry], fit: &LadderFit) -> String {
    let mut out = String::from("n,ln_gamma_n,fit\n");
    // the fitted line for ln Gamma is ln(2) + intercept + slope n where the
    // intercept comes from the ln |E_n| fit
    let intercept = fit.e0.norm().ln();
    for e in entries {
        let lg = e.energy.width().max(f64::MIN_POSITIVE).ln();
        let line = (2.0f64).ln() + intercept + fit.log_slope * e.n as f64;
        let _ = writeln!(out, "{},{},{}", e.n, lg, line);
    }
    out
}

/// Mode report JSON: extracted frequencies with amplitudes, the fit
/// residual, and the pairing against a reference ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeReport {
    pub frequencies: Vec<ModeFrequency>,
    pub fit_residual: f64,
    pub pairing: Vec<PairingRow>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModeFrequency {
    pub re: f64,
    pub im: f64,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairingRow {
    pub n: usize,
    pub distance_rel: f64,
}

impl ModeReport {
    pub fn new(modes: &ModeSet, comparison: &SpectrumComparison) -> Self {
        ModeReport {
            frequencies: modes
                .frequencies
                .iter()
                .zip(&modes.amplitudes)
                .map(|(f, a)| ModeFrequency {
                    re: f.re,
                    im: f.im,
                    amplitude_re: a.re,
                    amplitude_im: a.im,
                })
                .collect(),
            fit_residual: modes.fit_residual,
            pairing: comparison
                .pairs
                .iter()
                .map(|p| PairingRow { n: p.n, distance_rel: p.distance_rel })
                .collect(),
        }
    }

    pub fn mode_set(&self) -> ModeSet {
        ModeSet {
            frequencies: self.frequencies.iter().map(|f| Complex64::new(f.re, f.im)).collect(),
            amplitudes: self
                .frequencies
                .iter()
                .map(|f| Complex64::new(f.amplitude_re, f.amplitude_im))
                .collect(),
            fit_residual: self.fit_residual,
        }
    }
}

/// Probe series CSV: t, Re u, Im u with a metadata header.
pub fn probe_csv(series: &TimeSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# probe_r = {}", series.probe_r);
    let _ = writeln!(out, "t,re_u,im_u");
    for (t, v) in series.times.iter().zip(&series.values) {
        let _ = writeln!(out, "{},{},{}", t, v.re, v.im);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComplexEnergy;

    fn doc() -> SpectrumDoc {
        let entries: Vec<ResonanceEntry> = (0..3)
            .map(|n| ResonanceEntry {
                n,
                energy: ComplexEnergy::new(Complex64::new(
                    1e-17 * n as f64,
                    -0.18386198890601568 * 0.19744179036948956_f64.powi(n as i32),
                )),
                determinant_residual: 3.2e-16,
            })
            .collect();
        SpectrumDoc::from_entries(
            SpectrumMeta {
                gamma: 2.0,
                ell: 0,
                sigma: 1.9364916731037084,
                r0: 1.0,
                uv_window: 0.5,
                count: 3,
                tool_version: "test".into(),
            },
            &entries,
        )
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let d = doc();
        let text = d.to_csv();
        let back = SpectrumDoc::from_csv(&text).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let d = doc();
        let text = d.to_json().unwrap();
        let back = SpectrumDoc::from_json(&text).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn csv_parse_diagnostics_carry_line_numbers() {
        let bad = "# gamma = 2\nn,re_E,im_E,gamma_n,abs_E_r0,residual\n0,1.0,oops,1,1,1\n";
        let err = SpectrumDoc::from_csv(bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line 3"), "message was: {msg}");
    }

    #[test]
    fn mode_report_round_trip() {
        let modes = ModeSet {
            frequencies: vec![Complex64::new(0.0, -0.2)],
            amplitudes: vec![Complex64::new(1.0, 0.5)],
            fit_residual: 1e-9,
        };
        let cmp = SpectrumComparison {
            pairs: vec![],
            unmatched_modes: vec![],
            unmatched_rungs: vec![],
        };
        let report = ModeReport::new(&modes, &cmp);
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains("\"frequencies\""));
        assert!(text.contains("\"fit_residual\""));
        assert!(text.contains("\"pairing\""));
        let back: ModeReport = serde_json::from_str(&text).unwrap();
        let ms = back.mode_set();
        assert_eq!(ms.frequencies[0], modes.frequencies[0]);
        assert_eq!(ms.amplitudes[0], modes.amplitudes[0]);
    }
}
