use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use liftoff_core::compensation::{compensate, CalibrationReference, CalibrationSource, CompensationInput, Mode};
use liftoff_core::forward::{CoilPair, GeometryForm, Plate, QuadratureSettings};
use liftoff_core::io::{
    impedance_to_delta_l, load_config, parse_spectrum_csv, parse_sweep_csv, read_calibration, write_calibration,
    write_spectrum_csv, SweepPair,
};
use liftoff_core::scenarios::{
    figure_data, thickness_table, thickness_table_csv, Figure, Setup, TABLE_LIFTOFFS_M, TABLE_THICKNESSES_M,
};
use liftoff_core::spectrum::{find_peak, simulate_spectrum, FrequencyGrid, Spectrum};
use liftoff_core::{Error, ErrorKind};

mod manifest;
use manifest::{sidecar_path, RunManifest};

#[derive(Parser)]
#[command(name = "liftoff", version, about = "Eddy-current spectra and lift-off compensated thickness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a spectrum for a coil above a plate.
    Simulate(SimulateArgs),
    /// Build a calibration reference at the baseline lift-off.
    Calibrate(CalibrateArgs),
    /// Estimate lift-off and thickness from a spectrum (JSON report on stdout).
    Invert(InvertArgs),
    /// Thickness table over the standard lift-offs and plates.
    Table2 {
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot data for one figure, as CSV files in a directory.
    Figures {
        #[arg(long)]
        which: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Coil JSON; the reference coil when omitted.
    #[arg(long)]
    coil: Option<PathBuf>,
    #[arg(long)]
    plate: PathBuf,
    /// Lift-off above the coil's built-in baseline, metres.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    liftoff_extra: f64,
    #[arg(long, default_value_t = 1e2, allow_hyphen_values = true)]
    fmin: f64,
    #[arg(long, default_value_t = 1e7, allow_hyphen_values = true)]
    fmax: f64,
    #[arg(long, default_value_t = 30)]
    ppd: usize,
    #[arg(long, default_value = "product")]
    form: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    coil: Option<PathBuf>,
    /// Reference plate. Required for simulated calibration; optional with a
    /// measured sweep, where it pins the spatial frequency to the known thickness.
    #[arg(long)]
    plate: Option<PathBuf>,
    #[arg(long, requires = "air")]
    sweep: Option<PathBuf>,
    #[arg(long, requires = "sweep")]
    air: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvertArgs {
    #[arg(long, conflicts_with_all = ["sweep", "air"])]
    spectrum: Option<PathBuf>,
    #[arg(long, requires = "air")]
    sweep: Option<PathBuf>,
    #[arg(long, requires = "sweep")]
    air: Option<PathBuf>,
    #[arg(long)]
    calib: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    sigma: f64,
    #[arg(long, default_value = "thin")]
    mode: String,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Format => 4,
        };
        let message = match &e {
            // Name config problems by the flag a user would have typed.
            Error::Config { key, message } if is_flag(key) => format!("--{key}: {message}"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn is_flag(key: &str) -> bool {
    matches!(key, "liftoff-extra" | "fmin" | "fmax" | "ppd" | "form" | "sigma" | "mode" | "which")
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path, manifest: &mut RunManifest) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    manifest.input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| Failure { code: 4, message: format!("{} is not UTF-8 text", path.display()) })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn finish(manifest: &mut RunManifest, out: &Path) -> CliResult<()> {
    manifest.outputs.push(out.display().to_string());
    write(&sidecar_path(out), &manifest.to_json())
}

fn coil_from(path: Option<&Path>, manifest: &mut RunManifest) -> CliResult<CoilPair> {
    let coil = match path {
        None => CoilPair::REFERENCE,
        Some(p) => load_config(&read(p, manifest)?)?
            .coil
            .ok_or_else(|| input_error(format!("--coil {}: no coil keys", p.display())))?,
    };
    manifest.param("coil", serde_json::to_value(coil).expect("coil serialises"));
    Ok(coil)
}

fn plate_from(path: &Path, manifest: &mut RunManifest) -> CliResult<Plate> {
    let plate = load_config(&read(path, manifest)?)?
        .plate
        .ok_or_else(|| input_error(format!("--plate {}: no plate keys", path.display())))?;
    manifest.param("plate", serde_json::to_value(plate).expect("plate serialises"));
    Ok(plate)
}

fn record_numerics(manifest: &mut RunManifest, grid: &FrequencyGrid, form: GeometryForm) {
    let settings = QuadratureSettings::default();
    manifest
        .param("fmin_hz", grid.f_min)
        .param("fmax_hz", grid.f_max)
        .param("ppd", grid.points_per_decade)
        .param("form", form.to_string())
        .param("quadrature_rel_tol", settings.rel_tol)
        .param("quadrature_alpha_max_factor", settings.alpha_max_factor)
        .param("quadrature_max_panels", settings.max_panels);
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("simulate");
    if !(args.liftoff_extra.is_finite() && args.liftoff_extra >= 0.0) {
        return Err(input_error(format!(
            "--liftoff-extra must be a non-negative number of metres, got {}",
            args.liftoff_extra
        )));
    }
    let form: GeometryForm = args.form.parse()?;
    let grid = FrequencyGrid { f_min: args.fmin, f_max: args.fmax, points_per_decade: args.ppd };
    grid.validate()?;
    let coil = coil_from(args.coil.as_deref(), &mut manifest)?;
    let plate = plate_from(&args.plate, &mut manifest)?;
    manifest.param("liftoff_extra_m", args.liftoff_extra);
    record_numerics(&mut manifest, &grid, form);

    let spectrum = simulate_spectrum(&grid, &coil, &plate, args.liftoff_extra, form, &QuadratureSettings::default())?;
    let comments = vec![
        format!("simulated, form {form}, liftoff_extra_m {:e}", args.liftoff_extra),
        format!("plate sigma_s_per_m {:e} c_m {:e}", plate.sigma, plate.c),
    ];
    write(&args.out, &write_spectrum_csv(&spectrum, &comments))?;
    finish(&mut manifest, &args.out)
}

fn measured_spectrum(sweep: &Path, air: &Path, manifest: &mut RunManifest) -> CliResult<Spectrum> {
    let sample = parse_sweep_csv(&read(sweep, manifest)?)?;
    let air = parse_sweep_csv(&read(air, manifest)?)?;
    Ok(impedance_to_delta_l(&SweepPair::new(sample, air)?)?)
}

fn calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("calibrate");
    let coil = coil_from(args.coil.as_deref(), &mut manifest)?;
    let plate = args.plate.as_deref().map(|p| plate_from(p, &mut manifest)).transpose()?;
    let form = GeometryForm::default();
    let (spectrum, source) = match (&args.sweep, &args.air) {
        (Some(sweep), Some(air)) => (measured_spectrum(sweep, air, &mut manifest)?, CalibrationSource::Measured),
        _ => {
            let plate = plate.ok_or_else(|| input_error("--plate is required without --sweep/--air"))?;
            let grid = FrequencyGrid::default();
            record_numerics(&mut manifest, &grid, form);
            let spectrum = simulate_spectrum(&grid, &coil, &plate, 0.0, form, &QuadratureSettings::default())?;
            (spectrum, CalibrationSource::Simulated)
        }
    };
    let reference = CalibrationReference::from_baseline(&spectrum, &coil, plate.as_ref(), form, source)?;
    write(&args.out, &write_calibration(&reference))?;
    finish(&mut manifest, &args.out)
}

fn invert(args: &InvertArgs) -> CliResult<()> {
    let mut manifest = RunManifest::new("invert");
    let mode: Mode = args.mode.parse()?;
    let spectrum = match (&args.spectrum, &args.sweep, &args.air) {
        (Some(path), _, _) => parse_spectrum_csv(&read(path, &mut manifest)?)?,
        (None, Some(sweep), Some(air)) => measured_spectrum(sweep, air, &mut manifest)?,
        _ => return Err(input_error("one of --spectrum or --sweep/--air is required")),
    };
    let reference = read_calibration(&read(&args.calib, &mut manifest)?)?;
    manifest.param("sigma_s_per_m", args.sigma).param("mode", args.mode.as_str());

    let peak = find_peak(&spectrum)?;
    if peak.boundary_flag {
        return Err(Error::BoundaryPeak { index: peak.index }.into());
    }
    let input = CompensationInput { omega_meas: peak.omega_peak, s_meas: peak.salience };
    let result = compensate(&input, &reference, args.sigma, mode)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let report = json!({
        "omega_meas": peak.omega_peak,
        "s_meas": peak.salience,
        "ln_ratio": result.ln_ratio,
        "alpha0_l0": result.alpha0_l0,
        "liftoff_extra_est": result.liftoff_extra,
        "omega_comp": result.omega_comp,
        "thickness_comp": result.thickness,
        "thickness_uncomp": result.thickness_uncompensated,
        "mode": args.mode,
        "iterations": result.iterations,
        "warnings": result.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "manifest": manifest,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    // A closed pipe downstream is not our failure.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn table2(out: &Path) -> CliResult<()> {
    let mut manifest = RunManifest::new("table2");
    let setup = Setup::default();
    record_numerics(&mut manifest, &setup.grid, setup.form);
    manifest
        .param("coil", serde_json::to_value(setup.coil).expect("coil serialises"))
        .param("sigma_s_per_m", liftoff_core::forward::ALUMINIUM_SIGMA)
        .param("liftoffs_m", TABLE_LIFTOFFS_M.to_vec())
        .param("thicknesses_m", TABLE_THICKNESSES_M.to_vec())
        .param("calibration_thickness_m", TABLE_THICKNESSES_M[0]);
    let (reference, rows) = thickness_table(&setup, liftoff_core::forward::ALUMINIUM_SIGMA)?;
    manifest.param("calibration", serde_json::to_value(reference).expect("calibration serialises"));
    write(out, &thickness_table_csv(&rows).to_csv())?;
    finish(&mut manifest, out)
}

fn figures(which: &str, out: &Path) -> CliResult<()> {
    let figure = Figure::from_id(which)?;
    let mut manifest = RunManifest::new("figures");
    let setup = Setup::default();
    let plate = Plate::aluminium(TABLE_THICKNESSES_M[0]);
    record_numerics(&mut manifest, &setup.grid, setup.form);
    manifest
        .param("which", which)
        .param("coil", serde_json::to_value(setup.coil).expect("coil serialises"))
        .param("plate", serde_json::to_value(plate).expect("plate serialises"));
    fs::create_dir_all(out).map_err(|e| input_error(format!("cannot create {}: {e}", out.display())))?;
    for (name, table) in figure_data(&setup, figure, &plate)? {
        let path = out.join(name);
        write(&path, &table.to_csv())?;
        manifest.outputs.push(path.display().to_string());
    }
    write(&out.join(format!("fig{}_manifest.json", figure.id())), &manifest.to_json())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Calibrate(args) => calibrate(args),
        Command::Invert(args) => invert(args),
        Command::Table2 { out } => table2(out),
        Command::Figures { which, out } => figures(which, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
