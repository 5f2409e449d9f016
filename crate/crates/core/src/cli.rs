//! Command-line front end: argument parsing, config-file merging, and the
//! run functions behind each subcommand.
//!
//! Precedence: command-line flags override config-file values override
//! defaults. Exit codes: 0 success, 1 usage/config error, 2 physics-domain
//! error, 3 numerical failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{coupling_from, CouplingData, ModelParams};
use crate::ode::refine_ladder_zero_ode;
use crate::report::{
    probe_csv, width_plot_csv, FitReport, ModeReport, SpectrumDoc, SpectrumMeta, SpectrumRow,
};
use crate::spectrum::{
    fit_ladder, find_ladder, LadderFit, MatchingProblem, ResonanceEntry,
};
use crate::model::ComplexEnergy;
use crate::timedomain::{
    compare_spectra, evolve, extract_modes, Grid, InitialData, InnerBoundary, ModeComponent,
    OuterBoundary,
};

#[derive(Parser, Debug)]
#[command(
    name = "invsq",
    version,
    about = "Complex decay ladders of the absorbing inverse-square radial problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the decay ladder and write the resonance table
    Spectrum(SpectrumArgs),
    /// Fit the geometric ladder and check it against the predicted ratio
    LadderCheck(LadderCheckArgs),
    /// Evolve the field, extract ringdown modes, and pair them with the ladder
    Evolve(EvolveArgs),
    /// Pair a mode report against a spectrum file
    Compare(CompareArgs),
    /// Report the emergent temperature of the ladder
    Temperature(TemperatureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Coupling strength of the scale-invariant potential
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Angular momentum quantum number
    #[arg(long)]
    pub ell: Option<u32>,
    /// Matching radius
    #[arg(long)]
    pub r0: Option<f64>,
    /// Number of ladder rungs to locate
    #[arg(long)]
    pub count: Option<usize>,
    /// UV window edge: rung 0 is the largest |E| with |E| r0 below this
    #[arg(long = "window-uv")]
    pub window_uv: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format for the spectrum file
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Config file with `key = value` lines (# comments allowed)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated list of gamma values to sweep in parallel
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug)]
pub struct LadderCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Existing spectrum file to check instead of recomputing
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid points
    #[arg(long)]
    pub points: Option<usize>,
    /// Outer domain edge
    #[arg(long = "r-max")]
    pub r_max: Option<f64>,
    /// Evolution time
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Probe radius
    #[arg(long = "probe-r")]
    pub probe_r: Option<f64>,
    /// How many ladder rungs to place in the initial data
    #[arg(long = "prepare-rungs")]
    pub prepare_rungs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Spectrum table produced by `spectrum`
    #[arg(long = "spectrum-file")]
    pub spectrum_file: PathBuf,
    /// Mode report produced by `evolve`
    #[arg(long = "modes-file")]
    pub modes_file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TemperatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Existing spectrum file instead of recomputing
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Key = value config file contents.
#[derive(Debug, Default, Clone)]
struct FileConfig(HashMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "gamma", "ell", "r0", "count", "window_uv", "out", "format", "points", "r_max", "t_end",
    "probe_r", "prepare_rungs",
];

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected 'key = value', found '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = k.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "{}:{}: unknown key '{key}'",
                    path.display(),
                    lineno + 1
                )));
            }
            map.insert(key, v.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value for '{key}': '{v}'"))),
        }
    }
}

/// Fully resolved common parameters.
#[derive(Debug, Clone)]
struct Resolved {
    gamma: f64,
    ell: u32,
    r0: f64,
    count: usize,
    window_uv: f64,
    out: PathBuf,
    format: OutputFormat,
    file: FileConfig,
}

fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let gamma = common
        .gamma
        .or(file.get::<f64>("gamma")?)
        .ok_or_else(|| Error::Config("gamma is required (--gamma or config file)".into()))?;
    let format = match common.format {
        Some(f) => f,
        None => match file.get::<String>("format")?.as_deref() {
            Some("json") => OutputFormat::Json,
            Some("csv") | None => OutputFormat::Csv,
            Some(other) => {
                return Err(Error::Config(format!("bad value for 'format': '{other}'")))
            }
        },
    };
    Ok(Resolved {
        gamma,
        ell: common.ell.or(file.get("ell")?).unwrap_or(0),
        r0: common.r0.or(file.get("r0")?).unwrap_or(1.0),
        count: common.count.or(file.get("count")?).unwrap_or(5),
        window_uv: common.window_uv.or(file.get("window_uv")?).unwrap_or(0.5),
        out: common
            .out
            .clone()
            .or(file.get::<PathBuf>("out")?)
            .unwrap_or_else(|| PathBuf::from("out")),
        format,
        file,
    })
}

fn problem_for(r: &Resolved) -> Result<(CouplingData, MatchingProblem)> {
    let params = ModelParams::new(r.gamma, r.ell, r.r0)?;
    let coupling = coupling_from(&params)?;
    let problem = MatchingProblem::with_window(coupling, r.r0, r.window_uv)?;
    Ok((coupling, problem))
}

fn compute_doc(r: &Resolved) -> Result<(CouplingData, MatchingProblem, Vec<ResonanceEntry>, SpectrumDoc)> {
    let (coupling, problem) = problem_for(r)?;
    let entries = find_ladder(&problem, r.count)?;
    let meta = SpectrumMeta {
        gamma: r.gamma,
        ell: r.ell,
        sigma: problem.sigma(),
        r0: r.r0,
        uv_window: r.window_uv,
        count: r.count,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let doc = SpectrumDoc::from_entries(meta, &entries);
    Ok((coupling, problem, entries, doc))
}

fn write_spectrum(doc: &SpectrumDoc, out: &Path, format: OutputFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = match format {
        OutputFormat::Csv => {
            let p = out.join("spectrum.csv");
            std::fs::write(&p, doc.to_csv())?;
            p
        }
        OutputFormat::Json => {
            let p = out.join("spectrum.json");
            std::fs::write(&p, doc.to_json()?)?;
            p
        }
    };
    Ok(path)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(args) => run_spectrum(&args),
        Command::LadderCheck(args) => run_ladder_check(&args),
        Command::Evolve(args) => run_evolve(&args),
        Command::Compare(args) => run_compare(&args),
        Command::Temperature(args) => run_temperature(&args),
    }
}

pub fn run_spectrum(args: &SpectrumArgs) -> Result<()> {
    let base = resolve(&args.common)?;
    let gammas: Vec<f64> = match &args.sweep {
        None => vec![base.gamma],
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad sweep value '{s}'")))
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    let multi = gammas.len() > 1;
    let outputs: Vec<Result<String>> = gammas
        .par_iter()
        .map(|g| {
            let mut r = base.clone();
            r.gamma = *g;
            if multi {
                r.out = base.out.join(format!("gamma_{g}"));
            }
            let (_, problem, entries, doc) = compute_doc(&r)?;
            let path = write_spectrum(&doc, &r.out, r.format)?;
            let ratio = if entries.len() >= 2 {
                entries[1].energy.value.norm() / entries[0].energy.value.norm()
            } else {
                f64::NAN
            };
            Ok(format!(
                "gamma={g}: {} rungs, |E_1/E_0| = {ratio:.6} (predicted {:.6}) -> {}",
                entries.len(),
                problem.predicted_ratio(),
                path.display()
            ))
        })
        .collect();
    for line in outputs {
        println!("{}", line?);
    }
    Ok(())
}

fn entries_from_doc(doc: &SpectrumDoc) -> Vec<ResonanceEntry> {
    doc.rows
        .iter()
        .map(|r: &SpectrumRow| ResonanceEntry {
            n: r.n,
            energy: ComplexEnergy::new(Complex64::new(r.re_e, r.im_e)),
            determinant_residual: r.residual,
        })
        .collect()
}

fn load_or_compute(
    common: &CommonArgs,
    input: &Option<PathBuf>,
) -> Result<(Resolved, CouplingData, f64, Vec<ResonanceEntry>)> {
    match input {
        Some(path) => {
            let doc = SpectrumDoc::load(path)?;
            let params = ModelParams::new(doc.meta.gamma, doc.meta.ell, doc.meta.r0)?;
            let coupling = coupling_from(&params)?;
            let sigma = coupling.sigma_supercritical()?;
            // resolve output options; gamma comes from the file
            let mut patched = common.clone();
            patched.gamma = patched.gamma.or(Some(doc.meta.gamma));
            let resolved = resolve(&patched)?;
            Ok((resolved, coupling, sigma, entries_from_doc(&doc)))
        }
        None => {
            let resolved = resolve(common)?;
            let (coupling, problem, entries, _) = compute_doc(&resolved)?;
            Ok((resolved, coupling, problem.sigma(), entries))
        }
    }
}

pub fn run_ladder_check(args: &LadderCheckArgs) -> Result<()> {
    let (resolved, coupling, sigma, entries) = load_or_compute(&args.common, &args.input)?;
    let fit = fit_ladder(&entries, &coupling)?;
    let predicted = (-std::f64::consts::PI / sigma).exp();
    let report = FitReport::new(&fit, predicted);
    std::fs::create_dir_all(&resolved.out)?;
    let fit_path = resolved.out.join("ladder_fit.json");
    std::fs::write(&fit_path, serde_json::to_string_pretty(&report)?)?;
    let plot_path = resolved.out.join("ladder_plot.csv");
    std::fs::write(&plot_path, width_plot_csv(&entries, &fit))?;
    println!(
        "fitted ratio {:.8} vs predicted {:.8} (deviation {:.3e}) -> {}",
        report.fitted_ratio,
        report.predicted_ratio,
        report.relative_deviation,
        fit_path.display()
    );
    Ok(())
}

pub fn run_evolve(args: &EvolveArgs) -> Result<()> {
    let resolved = resolve(&args.common)?;
    let (coupling, _, entries, _doc) = compute_doc(&resolved)?;
    let kappa0 = entries[0].energy.value.norm();
    let points = args.points.or(resolved.file.get("points")?).unwrap_or(8000);
    let r_max = args.r_max.or(resolved.file.get("r_max")?).unwrap_or(120.0 * resolved.r0);
    // decay contamination from the rung above the UV window bounds the
    // usable run length; ~3.7 lifetimes of rung 0 stays well inside it
    let t_end = args.t_end.or(resolved.file.get("t_end")?).unwrap_or(3.7 / kappa0);
    let probe_r = args.probe_r.or(resolved.file.get("probe_r")?).unwrap_or(3.0 * resolved.r0);
    let prepare = args
        .prepare_rungs
        .or(resolved.file.get("prepare_rungs")?)
        .unwrap_or(1)
        .clamp(1, entries.len());

    let grid = Grid::new(resolved.r0, r_max, points)?;
    let components: Vec<ModeComponent> = entries[..prepare]
        .iter()
        .enumerate()
        .map(|(j, e)| ModeComponent {
            kappa: e.energy.value.norm(),
            amplitude: Complex64::new(1.0 / (1 << j) as f64, 0.0),
        })
        .collect();
    let initial = InitialData::DecayingModes(components);
    let out = evolve(
        &grid,
        &coupling,
        &initial,
        InnerBoundary::EnvelopeMatched,
        OuterBoundary::Absorbing,
        probe_r,
        t_end,
    )?;
    let window = (0.1 * t_end, 0.85 * t_end);
    let modes = extract_modes(&out.probe, window, 4)?;
    let comparison = compare_spectra(&modes, &entries);
    let report = ModeReport::new(&modes, &comparison);

    std::fs::create_dir_all(&resolved.out)?;
    let probe_path = resolved.out.join("probe.csv");
    std::fs::write(&probe_path, probe_csv(&out.probe))?;
    let modes_path = resolved.out.join("modes.json");
    std::fs::write(&modes_path, serde_json::to_string_pretty(&report)?)?;
    for p in &comparison.pairs {
        println!(
            "rung n={} paired at relative distance {:.4e} (grid {} points)",
            p.n, p.distance_rel, points
        );
    }
    println!("probe -> {}", probe_path.display());
    println!("modes -> {}", modes_path.display());
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> Result<()> {
    let doc = SpectrumDoc::load(&args.spectrum_file)?;
    let entries = entries_from_doc(&doc);
    let report: ModeReport = serde_json::from_str(&std::fs::read_to_string(&args.modes_file)?)?;
    let comparison = compare_spectra(&report.mode_set(), &entries);
    let out = ModeReport::new(&report.mode_set(), &comparison);
    let text = serde_json::to_string_pretty(&out)?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join("comparison.json");
            std::fs::write(&path, &text)?;
            println!("comparison -> {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

pub fn run_temperature(args: &TemperatureArgs) -> Result<()> {
    let (_, coupling, sigma, entries) = load_or_compute(&args.common, &args.input)?;
    let fit: LadderFit = fit_ladder(&entries, &coupling)?;
    let e0_abs = fit.e0.norm();
    let identity = e0_abs / (2.0 * std::f64::consts::PI * sigma);
    let payload = serde_json::json!({
        "t_eff": fit.t_eff,
        "e0": { "re": fit.e0.re, "im": fit.e0.im },
        "abs_e0": e0_abs,
        "sigma": sigma,
        "abs_e0_over_two_pi_sigma": identity,
    });
    println!("{}", serde_json::to_string_pretty(&payload)?);
    Ok(())
}

/// Polish one ladder rung through the ODE route; used by integration tests
/// and diagnostics rather than a dedicated subcommand.
pub fn ode_rung_check(gamma: f64, ell: u32, r0: f64, rung: Complex64) -> Result<Complex64> {
    let params = ModelParams::new(gamma, ell, r0)?;
    let coupling = coupling_from(&params)?;
    let problem = MatchingProblem::new(coupling, r0)?;
    refine_ladder_zero_ode(rung, &problem, 400)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_precedence_flag_over_file_over_default() {
        let dir = std::env::temp_dir().join(format!("invsq-cli-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg_path = dir.join("run.cfg");
        std::fs::write(&cfg_path, "gamma = 3.0\ncount = 7 # comment\n").unwrap();

        let common = CommonArgs {
            gamma: Some(2.0), // flag wins over file
            ell: None,
            r0: None,
            count: None, // file wins over default
            window_uv: None,
            out: None,
            format: None,
            config: Some(cfg_path),
        };
        let r = resolve(&common).unwrap();
        assert_eq!(r.gamma, 2.0);
        assert_eq!(r.count, 7);
        assert_eq!(r.r0, 1.0); // default
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn config_rejects_unknown_keys_with_location() {
        let dir = std::env::temp_dir().join(format!("invsq-cli-test2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg_path = dir.join("bad.cfg");
        std::fs::write(&cfg_path, "gamma = 2.0\nbogus = 1\n").unwrap();
        let err = FileConfig::load(&cfg_path).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains(":2:"), "missing line number: {msg}");
        assert!(msg.contains("bogus"));
        assert_eq!(err.exit_code(), 1);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn missing_gamma_is_a_usage_error() {
        let common = CommonArgs {
            gamma: None,
            ell: None,
            r0: None,
            count: None,
            window_uv: None,
            out: None,
            format: None,
            config: None,
        };
        let err = resolve(&common).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
