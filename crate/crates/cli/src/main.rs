//! `hirota`: build, sample and verify multi-soliton fields from a spectral
//! data file.
//!
//! Every run prints a JSON report on stdout and a short summary on stderr.
//! Exit codes: 0 pass, 1 failed check, 2 configuration error, 3 I/O error,
//! 4 numerical degeneracy.

mod oracles;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hirota_rh::grid::config_digest;
use hirota_rh::{
    emit_csv, emit_json, parse_config, parse_config_unchecked, sample_grid, validate, Error, Part, SpectralConfig64,
};

use oracles::{Oracle, Settings};
use report::{Exit, OutputSummary, RunReport};

#[derive(Parser, Debug)]
#[command(
    name = "hirota",
    version,
    about = "Multi-soliton solutions of the coupled Hirota equations"
)]
struct Cli {
    /// Print the table of default tolerances, grids and stencils, then exit.
    #[arg(long)]
    show_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a spectral data file and list its violations.
    Validate(ConfigArg),
    /// Evaluate the field on a grid and write it as CSV (or JSON for a .json path).
    Sample(SampleArgs),
    /// Run the verification oracles and report each check.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// xmin,xmax,nx,tmin,tmax,nt
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<[f64; 6]>,
    /// Comma-separated subset of modulus,real,imag.
    #[arg(long, value_delimiter = ',', value_parser = parse_part)]
    parts: Option<Vec<Part>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Comma-separated subset of pde,lax,mass,scatter,closed-form.
    #[arg(long, value_delimiter = ',')]
    oracles: Option<Vec<Oracle>>,
    /// Region for the residual and closed-form checks: xmin,xmax,nx,tmin,tmax,nt
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<[f64; 6]>,
    /// Finite-difference accuracy order.
    #[arg(long, value_parser = parse_order)]
    order: Option<usize>,
    /// Half-width of the scattering domain [-L, L].
    #[arg(long = "L", value_name = "FLOAT")]
    half_width: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_pde: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_lax: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_mass: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_scatter: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_det: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    tol_closed_form: Option<f64>,
}

fn parse_grid(s: &str) -> Result<[f64; 6], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let g: [f64; 6] = v
        .try_into()
        .map_err(|_| "expected xmin,xmax,nx,tmin,tmax,nt".to_string())?;
    for n in [g[2], g[5]] {
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(format!("node counts must be positive integers, got {n}"));
        }
    }
    Ok(g)
}

fn parse_part(s: &str) -> Result<Part, String> {
    Part::parse(s).ok_or_else(|| format!("unknown part {s:?}; expected modulus, real or imag"))
}

fn parse_order(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n @ (2 | 4 | 6 | 8)) => Ok(n),
        _ => Err(format!("order must be 2, 4, 6 or 8, got {s:?}")),
    }
}

fn degenerate(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::SingularKernel { .. }
            | Error::PoleHit { .. }
            | Error::TailNotDecayed { .. }
            | Error::NonFiniteState { .. }
    )
}

fn exit_for(e: &Error) -> Exit {
    if degenerate(e) {
        Exit::Degenerate
    } else {
        Exit::ConfigError
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Loads and fully validates a configuration, or ends the run.
#[allow(clippy::result_large_err)]
fn load(report: RunReport, path: &Path) -> Result<(RunReport, SpectralConfig64), RunReport> {
    let text = read(path).map_err(|e| report.clone().abort(Exit::Io, e))?;
    match parse_config(&text) {
        Ok(config) => {
            let mut report = report;
            report.config_digest = Some(config_digest(&config));
            Ok((report, config))
        }
        Err(e) => Err(report.abort(Exit::ConfigError, e.to_string())),
    }
}

fn cmd_validate(args: &ConfigArg) -> RunReport {
    let report = RunReport::new("validate");
    let text = match read(&args.config) {
        Ok(t) => t,
        Err(e) => return report.abort(Exit::Io, e),
    };
    let config = match parse_config_unchecked(&text) {
        Ok(c) => c,
        Err(e) => return report.abort(Exit::ConfigError, e.to_string()),
    };
    let violations = validate(&config);
    let mut report = report;
    report.config_digest = Some(config_digest(&config));
    report
        .outcomes
        .push(report::Outcome::at_most("spectral-data", violations.len() as f64, 0.0));
    report.violations = violations
        .iter()
        .map(|v| {
            let mut entry = serde_json::to_value(v).expect("violation serializes");
            entry["message"] = v.to_string().into();
            entry
        })
        .collect();
    report.settle()
}

fn cmd_sample(args: &SampleArgs) -> RunReport {
    let (mut report, config) = match load(RunReport::new("sample"), &args.config.config) {
        Ok(v) => v,
        Err(r) => return r,
    };
    let mut settings = Settings::default();
    if let Some(g) = args.grid {
        settings.grid = g;
    }
    let grid = match settings.grid_spec() {
        Ok(g) => g,
        Err(e) => return report.abort(Exit::ConfigError, e.to_string()),
    };
    let parts = args.parts.clone().unwrap_or_else(|| vec![Part::Modulus]);
    let table = match sample_grid(&config, &grid) {
        Ok(t) => t,
        Err(e) => return report.abort(exit_for(&e), e.to_string()),
    };
    let is_json = args.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (body, rows) = if is_json {
        (emit_json(&table), table.values.len())
    } else {
        let mut p = parts.clone();
        p.sort();
        p.dedup();
        (emit_csv(&table, &parts), table.values.len() * table.n_fields * p.len())
    };
    if let Err(e) = fs::write(&args.out, body) {
        return report.abort(Exit::Io, format!("cannot write {}: {e}", args.out.display()));
    }
    let failed = table.failures.len();
    report.output = Some(OutputSummary {
        path: args.out.display().to_string(),
        rows,
        failed_nodes: failed,
        peak_modulus: table.peak_modulus(),
    });
    if let Some(first) = table.failures.first() {
        return report.abort(
            Exit::Degenerate,
            format!(
                "{failed} node(s) failed; first at (x, t) = ({}, {}): {}",
                first.x, first.t, first.error
            ),
        );
    }
    report.settle()
}

fn cmd_verify(args: &VerifyArgs) -> RunReport {
    let (mut report, config) = match load(RunReport::new("verify"), &args.config.config) {
        Ok(v) => v,
        Err(r) => return r,
    };
    let mut s = Settings::default();
    if let Some(g) = args.grid {
        s.grid = g;
    }
    if let Some(o) = args.order {
        s.order = o;
    }
    s.scatter_half_width = args.half_width.or(s.scatter_half_width);
    let overrides = [
        (args.tol_pde, &mut s.tol_pde),
        (args.tol_lax, &mut s.tol_lax),
        (args.tol_mass, &mut s.tol_mass),
        (args.tol_scatter, &mut s.tol_scatter),
        (args.tol_det, &mut s.tol_det),
        (args.tol_closed_form, &mut s.tol_closed_form),
    ];
    for (value, slot) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    let selected = match &args.oracles {
        Some(list) => {
            let mut list = list.clone();
            list.sort();
            list.dedup();
            if list.contains(&Oracle::ClosedForm) && !oracles::closed_form_applies(&config) {
                return report.abort(
                    Exit::ConfigError,
                    "closed-form oracle needs three fields and one soliton".to_string(),
                );
            }
            list
        }
        None => Oracle::ALL
            .into_iter()
            .filter(|&o| o != Oracle::ClosedForm || oracles::closed_form_applies(&config))
            .collect(),
    };
    for oracle in selected {
        match oracles::run(oracle, &config, &s) {
            Ok(outcomes) => report.outcomes.extend(outcomes),
            Err(e) => return report.abort(exit_for(&e), format!("{oracle}: {e}")),
        }
    }
    report.settle()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.show_defaults {
        println!(
            "{}",
            serde_json::to_string_pretty(&Settings::default()).expect("defaults serialize")
        );
        return ExitCode::SUCCESS;
    }
    let report = match &cli.command {
        Some(Command::Validate(a)) => cmd_validate(a),
        Some(Command::Sample(a)) => cmd_sample(a),
        Some(Command::Verify(a)) => cmd_verify(a),
        None => {
            eprintln!("no command given; see `hirota --help`");
            return ExitCode::from(Exit::ConfigError as u8);
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    eprintln!("{}", report.summary());
    ExitCode::from(report.exit_code as u8)
}
