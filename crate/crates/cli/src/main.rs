use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sqz_sensor::curve::CurveKind;
use sqz_sensor::fig2::{fig2_curves, fig2_grid, DEFAULT_POINTS};
use sqz_sensor::io::{
    all_curve_kinds, closed_form_curve, estimate_curve, parse_curve_kind, write_atomic, CurveTable, Format, GridSpec,
    ManifestEntry, RunManifest,
};
use sqz_sensor::optimize::{
    numeric_min_kc, numeric_snl_kappa, optimal_kc_result, snl_crossings, snl_optimal_kappa,
};
use sqz_sensor::params::{ParamFile, Scenario, SensorParams, ValidatedParams};
use sqz_sensor::stochastic::{Integrator, SimulationConfig};
use sqz_sensor::validate::{run_validation, Mutation, ValidationOptions};
use sqz_sensor::Error;

const THREADS_ENV: &str = "SQZ_SENSOR_THREADS";

#[derive(Parser)]
#[command(name = "sqz-sensor", version, about = "Quantum-noise spectra of squeezed-light resonator sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form spectra on a frequency grid.
    Spectrum(SpectrumArgs),
    /// Write the reference curves (three scenarios and the shot-noise limit).
    Fig2(Fig2Args),
    /// Cross-check closed forms against the solver, the simulator and a numeric search.
    Validate(ValidateArgs),
    /// Optimal internal gain, optimal bandwidth, or the sub-SNL band.
    Optimize(OptimizeArgs),
    /// Run the stochastic simulator and write the raw record and its spectrum.
    Simulate(SimulateArgs),
    /// Recompute the outputs listed in a manifest and compare them bit-for-bit.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ParamsArg {
    /// JSON parameter file; defaults to the reference parameters.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 4.0)]
    omega_max: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    omega_points: usize,
    /// Report S N / kappa' against Ω / kappa'; the grid is then read in units of kappa'.
    #[arg(long)]
    normalize: bool,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec { min: self.omega_min, max: self.omega_max, points: self.omega_points }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// no-squeeze, input-squeeze, double-squeeze, custom=<k_c>, snl, or all.
    #[arg(long, default_value = "all")]
    scenario: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct Fig2Args {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    omega_points: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// Welch segments per simulated scenario.
    #[arg(long, default_value_t = 1200)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corrupt a formula on purpose: drop-intrinsic-loss or flip-gain-loss.
    #[arg(long)]
    mutation: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Kc,
    SnlKappa,
    Band,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, value_enum)]
    target: Target,
    /// Probe frequency for `kc` and `snl-kappa`.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Scenario for `band`.
    #[arg(long, default_value = "double-squeeze")]
    scenario: String,
    /// Search interval for `band`.
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 10.0)]
    omega_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    EulerMaruyama,
    ExactHold,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value = "double-squeeze")]
    scenario: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Welch segments.
    #[arg(long, default_value_t = 400)]
    budget: usize,
    #[arg(long, value_enum, default_value = "euler-maruyama")]
    integrator: IntegratorArg,
    #[command(flatten)]
    grid: GridArgs,
    /// Spectrum path; the raw record goes next to it as `<stem>-raw.bin` and `<stem>-raw.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyArgs {
    manifest: PathBuf,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn gate(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Ordering { .. } => Failure::gate(e.to_string()),
            other => Failure::usage(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load_params(arg: &ParamsArg) -> CliResult<(ValidatedParams, Option<Vec<u8>>)> {
    match &arg.params {
        None => Ok((SensorParams::fig2().validate()?, None)),
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let params = ParamFile::from_json(&text)
                .and_then(ParamFile::into_params)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok((params, Some(bytes)))
        }
    }
}

fn parse_curves(name: &str) -> CliResult<Vec<CurveKind>> {
    if name == "all" {
        return Ok(all_curve_kinds());
    }
    name.split(',')
        .map(|n| parse_curve_kind(n.trim()).map_err(|e| Failure::usage(e.to_string())))
        .collect()
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn file_name(path: &Path) -> String {
    path.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

fn write_json(out: Option<&Path>, value: &serde_json::Value) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print_stdout(&text),
    }
    Ok(())
}

/// Like `println!`, but a closed pipe is not an error.
fn print_stdout(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn cmd_spectrum(args: &SpectrumArgs) -> CliResult {
    let (params, bytes) = load_params(&args.params)?;
    let kinds = parse_curves(&args.scenario)?;
    let grid = args.grid.spec();
    let curves = kinds
        .iter()
        .map(|k| closed_form_curve(*k, &params, &grid, args.grid.normalize))
        .collect::<Result<Vec<_>, _>>()?;
    let table = CurveTable::from_curves(params.raw(), &curves)?;
    let format = Format::from(args.format);
    table.write(&args.out, format, &args.scenario)?;

    let mut manifest = RunManifest::new("spectrum", params.raw(), bytes.as_deref(), grid, args.grid.normalize)?;
    manifest.outputs.push(ManifestEntry { file: file_name(&args.out), curves: kinds, format });
    manifest.write(&manifest_path(&args.out))?;
    Ok(())
}

fn cmd_fig2(args: &Fig2Args) -> CliResult {
    let curves = fig2_curves(args.omega_points)?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::usage(format!("{}: {e}", args.out.display())))?;
    let params = SensorParams::fig2();
    let format = Format::from(args.format);
    let mut manifest = RunManifest::new("fig2", &params, None, fig2_grid(args.omega_points), true)?;
    for curve in curves.all() {
        let label = curve.kind().label();
        let file = format!("{label}.{}", format.extension());
        CurveTable::from_curves(&params, std::slice::from_ref(curve))?.write(&args.out.join(&file), format, &label)?;
        manifest.outputs.push(ManifestEntry { file, curves: vec![curve.kind()], format });
    }
    manifest.write(&args.out.join("manifest.json"))?;
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CliResult {
    let (params, bytes) = load_params(&args.params)?;
    let mutation = args
        .mutation
        .as_deref()
        .map(str::parse::<Mutation>)
        .transpose()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let opts = ValidationOptions { segments: args.budget, seed: args.seed, mutation, ..ValidationOptions::default() };
    let report = run_validation(&params, &opts)?;
    let value = serde_json::to_value(&report).map_err(|e| Failure::usage(e.to_string()))?;
    write_json(args.out.as_deref(), &value)?;
    if let Some(out) = &args.out {
        let grid = GridSpec { min: opts.band.0, max: opts.band.1, points: 57 };
        let mut manifest = RunManifest::new("validate", params.raw(), bytes.as_deref(), grid, false)?;
        manifest.outputs.push(ManifestEntry { file: file_name(out), curves: Vec::new(), format: Format::Json });
        manifest.write(&manifest_path(out))?;
    }
    for c in &report.checks {
        if let Some(reason) = &c.skipped {
            eprintln!("skip {}: {reason}", c.name);
            continue;
        }
        eprintln!("{} {}: {:.3e} (limit {:.0e})", if c.passed { "pass" } else { "FAIL" }, c.name, c.measured, c.threshold);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::gate("validation failed"))
    }
}

fn cmd_optimize(args: &OptimizeArgs) -> CliResult {
    let (params, _) = load_params(&args.params)?;
    let value = match args.target {
        Target::Kc => {
            let base = params.with_kc(0.0)?;
            let closed = optimal_kc_result(&base, args.omega);
            let numeric = numeric_min_kc(&base, args.omega)?;
            json!({
                "target": "kc",
                "omega": args.omega,
                "closed_form": closed,
                "numeric": numeric,
                "delta": (numeric.argmin - closed.argmin).abs(),
            })
        }
        Target::SnlKappa => {
            let closed = snl_optimal_kappa(args.omega, params.n_photons)?;
            let numeric = numeric_snl_kappa(args.omega, params.n_photons)?;
            json!({
                "target": "snl_kappa",
                "omega": args.omega,
                "closed_form": closed,
                "numeric": numeric,
                "delta": (numeric.argmin - closed.argmin).abs(),
            })
        }
        Target::Band => {
            let scenario: Scenario = args.scenario.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
            let base = scenario.materialize(&params)?;
            match snl_crossings(scenario, &base, (args.omega_min, args.omega_max)) {
                Ok(band) => json!({
                    "target": "band",
                    "scenario": scenario.to_string(),
                    "band": band,
                    "width": band.width(),
                }),
                Err(Error::NoBand { lo, hi }) => json!({
                    "target": "band",
                    "scenario": scenario.to_string(),
                    "band": null,
                    "no_band": { "lo": lo, "hi": hi },
                }),
                Err(e) => return Err(e.into()),
            }
        }
    };
    write_json(args.out.as_deref(), &value)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult {
    let (params, bytes) = load_params(&args.params)?;
    let scenario: Scenario = args.scenario.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    let params = scenario.materialize(&params)?;
    let integrator = match args.integrator {
        IntegratorArg::EulerMaruyama => Integrator::EulerMaruyama,
        IntegratorArg::ExactHold => Integrator::ExactHold,
    };
    let config = SimulationConfig::for_params(&params, args.budget, args.seed).with_integrator(integrator);
    config.validate(&params)?;
    let grid = args.grid.spec();
    let scale = if args.grid.normalize { params.kappa_prime } else { 1.0 };
    let omegas: Vec<f64> = grid.values().iter().map(|w| w * scale).collect();
    let run = sqz_sensor::simulate(&params, &config)?;
    let curve = estimate_curve(&run, &omegas, args.grid.normalize)?;
    let format = Format::from(args.format);
    CurveTable::from_curves(params.raw(), std::slice::from_ref(&curve))?.write(&args.out, format, "estimate")?;

    let stem = args.out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    run.write_raw(&args.out.with_file_name(format!("{stem}-raw")))?;

    let mut manifest = RunManifest::new("simulate", params.raw(), bytes.as_deref(), grid, args.grid.normalize)?;
    manifest.simulation = Some(config);
    manifest.outputs.push(ManifestEntry { file: file_name(&args.out), curves: vec![CurveKind::Estimate], format });
    manifest.write(&manifest_path(&args.out))?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CliResult {
    let manifest = RunManifest::read(&args.manifest)?;
    let dir = args.manifest.parent().unwrap_or(Path::new("."));
    let mismatched = manifest.verify(dir)?;
    if mismatched.is_empty() {
        print_stdout(&format!("{} output(s) reproduced bit-for-bit", manifest.outputs.len()));
        Ok(())
    } else {
        Err(Failure::gate(format!("outputs differ from recomputation: {}", mismatched.join(", "))))
    }
}

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: &Cli) -> CliResult {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Fig2(a) => cmd_fig2(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
