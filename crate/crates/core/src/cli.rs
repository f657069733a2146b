//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (arguments, configuration, I/O),
//! 2 verification failure (oracle mismatch or broken invariant).
//! Diagnostics go to standard error; data goes to files or standard output.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use crate::dressed::{dressed_pair, extract_valley_widths, large_detuning_approx, Valley};
use crate::model::config::{ConfigError, ParameterSet, UnitMode};
use crate::model::{PortLabel, ValidatedSystem};
use crate::oracle::{decay_calibration, standard_carriers, verify_carriers, OracleConfig, OracleError};
use crate::scattering::special_points;
use crate::selftest::run_selftest;
use crate::sweep::{
    map_2d, photon_number_scan, reproduce_figure, spectrum_1d, write_data, write_table, Axis, AxisSpec,
    DataFile, FigureId, Format, GridSpec, Metadata, OutputError, Quantity, SweepError, SweepTable,
};

#[derive(Debug, Parser)]
#[command(
    name = "photon-router",
    version,
    about = "Single-photon routing through a cavity-driven cascade emitter between two chiral waveguides"
)]
pub struct Cli {
    /// Parameter file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; without it data is printed to standard output.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Parameter override, repeatable; uses the config-file keys.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    pub format: Format,
    /// Use rates as given instead of rescaling them to γ = 1.
    #[arg(long, global = true)]
    pub absolute: bool,
    /// Input port: Ra, La, Rb or Lb.
    #[arg(long, global = true, default_value = "Ra", value_parser = parse_port)]
    pub port: PortLabel,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_port(s: &str) -> Result<PortLabel, String> {
    s.parse()
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probabilities along Δ_k^n (or along Δ_a at fixed Δ_k^n).
    Spectrum {
        #[arg(long, default_value = "Delta_k", value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, allow_hyphen_values = true)]
        min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        max: Option<f64>,
        #[arg(long, default_value_t = 801)]
        points: usize,
        /// Fixed Δ_k^n when sweeping Δ_a.
        #[arg(long = "delta-k", default_value_t = 0.0, allow_hyphen_values = true)]
        delta_k: f64,
    },
    /// Δ_k^n × Δ_a maps.
    Map2d {
        #[arg(long = "k-min", allow_hyphen_values = true)]
        k_min: Option<f64>,
        #[arg(long = "k-max", allow_hyphen_values = true)]
        k_max: Option<f64>,
        #[arg(long = "k-points", default_value_t = 401)]
        k_points: usize,
        #[arg(long = "a-min", allow_hyphen_values = true)]
        a_min: Option<f64>,
        #[arg(long = "a-max", allow_hyphen_values = true)]
        a_max: Option<f64>,
        #[arg(long = "a-points", default_value_t = 401)]
        a_points: usize,
    },
    /// T_p and friends against the cavity photon number.
    Nscan {
        #[arg(long = "n-min", default_value_t = 0)]
        n_min: u32,
        #[arg(long = "n-max", default_value_t = 100)]
        n_max: u32,
        /// Comma-separated Δ_a values; defaults to the configured Δ_a.
        #[arg(long = "delta-a", value_delimiter = ',', allow_hyphen_values = true)]
        delta_a: Vec<f64>,
        #[arg(long = "delta-k", default_value_t = 0.0, allow_hyphen_values = true)]
        delta_k: f64,
    },
    /// Dressed pair, large-detuning linewidths and spectrum valley widths.
    Dressed {
        #[arg(long, allow_hyphen_values = true)]
        min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        max: Option<f64>,
        #[arg(long, default_value_t = 24001)]
        points: usize,
    },
    /// PIT line and pole roots.
    Points,
    /// Wavepacket oracle against the closed-form even-mode transmission.
    Verify {
        /// Comma-separated carrier detunings; defaults to five over [−2γ, 2γ].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        carriers: Vec<f64>,
        #[arg(long = "n-modes")]
        n_modes: Option<usize>,
        #[arg(long = "no-calibration")]
        no_calibration: bool,
    },
    /// Write one preset dataset group.
    Figure {
        /// fig2, fig4a, fig4b, fig4c, fig5a or fig5b.
        id: String,
    },
    /// Run the invariant suite.
    Selftest,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 2,
            CliError::Oracle(OracleError::NormDrift { .. } | OracleError::PropagationTooShort { .. }) => 2,
            _ => 1,
        }
    }
}

fn load_system(cli: &Cli) -> Result<ValidatedSystem, CliError> {
    let mut params = match &cli.config {
        Some(path) => ParameterSet::load(path)?,
        None => ParameterSet::default(),
    };
    for o in &cli.overrides {
        params.apply_override(o)?;
    }
    let units = if cli.absolute { UnitMode::Absolute } else { UnitMode::Gamma };
    Ok(params.to_system(units)?)
}

fn emit_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Usage(format!("cannot write to standard output: {e}"))),
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn emit_table(cli: &Cli, table: &SweepTable, name: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(dir) => report_written(&write_table(table, dir, name, cli.format, &Quantity::ALL)?),
        None => emit_stdout(&DataFile::from_table(table, &Quantity::ALL).render(cli.format))?,
    }
    Ok(())
}

fn emit_data(cli: &Cli, name: &str, data: &DataFile, meta: &Metadata) -> Result<(), CliError> {
    match &cli.out {
        Some(dir) => report_written(&write_data(dir, name, cli.format, data, meta)?),
        None => emit_stdout(&data.render(cli.format))?,
    }
    Ok(())
}

fn axis(
    axis: Axis,
    min: Option<f64>,
    max: Option<f64>,
    points: usize,
    gamma: f64,
) -> Result<AxisSpec, CliError> {
    Ok(AxisSpec::new(axis, min.unwrap_or(-6.0 * gamma), max.unwrap_or(6.0 * gamma), points)?)
}

fn run_points(cli: &Cli, system: &ValidatedSystem) -> Result<(), CliError> {
    let sp = special_points(system.detuning_a, &system.cavity);
    let text = match cli.format {
        Format::Csv => format!(
            "pit_line,pole_root_lower,pole_root_upper\n{},{},{}\n",
            sp.pit_line, sp.pole_roots[0], sp.pole_roots[1]
        ),
        Format::Json => format!("{}\n", serde_json::to_string(&sp).expect("JSON rendering")),
    };
    match &cli.out {
        Some(dir) => {
            let mut data = DataFile::new(&["pit_line", "pole_root_lower", "pole_root_upper"]);
            data.rows.push(vec![sp.pit_line, sp.pole_roots[0], sp.pole_roots[1]]);
            report_written(&write_data(dir, "points", cli.format, &data, &Metadata::for_system(system))?);
        }
        None => emit_stdout(&text)?,
    }
    Ok(())
}

fn valley_data(valleys: &[Valley]) -> DataFile {
    let mut data = DataFile::new(&["center", "fwhm", "depth"]);
    for v in valleys {
        data.rows.push(vec![v.center, v.fwhm.unwrap_or(f64::NAN), v.depth]);
    }
    data
}

fn run_dressed(
    cli: &Cli,
    system: &ValidatedSystem,
    min: Option<f64>,
    max: Option<f64>,
    points: usize,
) -> Result<(), CliError> {
    let gamma = system.gamma();
    let da = system.detuning_a;
    let pair = dressed_pair(da, &system.cavity, gamma);
    let approx = large_detuning_approx(da, &system.cavity, gamma);
    if let Err(e) = &approx {
        log::info!("no large-detuning estimate: {e}");
    }

    let spec = GridSpec::new(vec![axis(Axis::DeltaK, min, max, points, gamma)?], system.clone(), cli.port)?;
    let table = spectrum_1d(&spec)?;
    let valleys = extract_valley_widths(&table.axis(0), &table.column(Quantity::Tp));
    for v in valleys.iter().filter(|v| !v.is_resolved()) {
        log::warn!("{v} spans only {} samples; refine the grid", v.samples);
    }

    let mut entries: Vec<(&str, f64)> = vec![
        ("Omega_n", pair.omega_n),
        ("E_plus", pair.e_plus),
        ("E_minus", pair.e_minus),
        ("gamma_plus", pair.gamma_plus),
        ("gamma_minus", pair.gamma_minus),
        ("two_level_limit", f64::from(u8::from(pair.two_level_limit))),
    ];
    if let Ok(a) = &approx {
        entries.extend([
            ("gamma_plus_approx", a.gamma_plus),
            ("gamma_minus_approx", a.gamma_minus),
            ("mixing", a.mixing),
        ]);
    }

    let meta = spec.metadata();
    match &cli.out {
        Some(dir) => {
            let mut data = DataFile::new(&entries.iter().map(|(k, _)| *k).collect::<Vec<_>>());
            data.rows.push(entries.iter().map(|(_, v)| *v).collect());
            report_written(&write_data(dir, "dressed", cli.format, &data, &meta)?);
            report_written(&write_data(dir, "dressed_valleys", cli.format, &valley_data(&valleys), &meta)?);
        }
        None => match cli.format {
            Format::Csv => {
                let mut text = String::from("quantity,value\n");
                for (k, v) in &entries {
                    text.push_str(&format!("{k},{v}\n"));
                }
                text.push('\n');
                text.push_str(&valley_data(&valleys).to_csv());
                emit_stdout(&text)?;
            }
            Format::Json => {
                let obj = json!({
                    "pair": pair,
                    "large_detuning": approx.ok(),
                    "valleys": valleys,
                });
                emit_stdout(&format!("{obj}\n"))?;
            }
        },
    }
    Ok(())
}

fn run_verify(
    cli: &Cli,
    system: &ValidatedSystem,
    carriers: &[f64],
    n_modes: Option<usize>,
    no_calibration: bool,
) -> Result<(), CliError> {
    let gamma = system.gamma();
    let mut base = OracleConfig::new(0.0, gamma);
    if let Some(m) = n_modes {
        base.n_modes = m;
    }
    let carriers = if carriers.is_empty() { standard_carriers(gamma) } else { carriers.to_vec() };
    let reports = verify_carriers(&base, &carriers, system.detuning_a, &system.cavity, gamma)?;

    let mut failures = Vec::new();
    let mut summary = DataFile::new(&[
        "carrier",
        "max_error",
        "final_emitter_population",
        "peak_emitter_population",
        "peak_level2_population",
    ]);
    for r in &reports {
        summary.rows.push(vec![
            r.carrier,
            r.max_error,
            r.final_emitter_population,
            r.peak_emitter_population,
            r.peak_level2_population,
        ]);
        eprintln!(
            "carrier {}: max |t_est - t_e| = {:.3e} over {} modes",
            r.carrier,
            r.max_error,
            r.rows.len()
        );
        if !r.passes() {
            failures.push(format!("carrier {} has max error {:.3e}", r.carrier, r.max_error));
        }
    }

    let mut meta = Metadata::for_system(system);
    meta.push("n_modes", base.n_modes);
    meta.push("sigma_k", base.sigma_k);
    meta.push("t_final", base.t_final);
    if let Some(dir) = &cli.out {
        for r in &reports {
            let mut data =
                DataFile::new(&["k", "Re_t_est", "Im_t_est", "Re_t_closed", "Im_t_closed", "abs_error"]);
            data.rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![row.k, row.t_est[0], row.t_est[1], row.t_closed[0], row.t_closed[1], row.abs_error]
                })
                .collect();
            let mut m = meta.clone();
            m.push("carrier", r.carrier);
            report_written(&write_data(
                dir,
                &format!("verify_carrier_{}", r.carrier),
                cli.format,
                &data,
                &m,
            )?);
        }
    }

    if !no_calibration {
        let decay = decay_calibration(gamma)?;
        eprintln!("decay calibration: max relative error {:.3e}", decay.max_relative_error);
        if !decay.passes() {
            failures.push(format!("decay calibration off by {:.3e}", decay.max_relative_error));
        }
        if let Some(dir) = &cli.out {
            let mut data = DataFile::new(&["t", "population", "expected"]);
            data.rows = decay
                .times
                .iter()
                .zip(&decay.population)
                .map(|(t, p)| vec![*t, *p, (-gamma * t).exp()])
                .collect();
            report_written(&write_data(dir, "verify_decay", cli.format, &data, &meta)?);
        }
    }

    emit_data(cli, "verify_summary", &summary, &meta)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}

fn run_selftest_command() -> Result<(), CliError> {
    let checks = run_selftest();
    let mut failed = Vec::new();
    for c in &checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// Executes a parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Selftest => return run_selftest_command(),
        Command::Figure { id } => {
            let id: FigureId = id.parse()?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            report_written(&reproduce_figure(id, Path::new(&dir), cli.format)?);
            return Ok(());
        }
        _ => {}
    }

    let system = load_system(cli)?;
    let gamma = system.gamma();
    match &cli.command {
        Command::Spectrum { axis: ax, min, max, points, delta_k } => {
            let spec = GridSpec::new(vec![axis(*ax, *min, *max, *points, gamma)?], system, cli.port)?
                .with_detuning_k(*delta_k);
            emit_table(cli, &spectrum_1d(&spec)?, "spectrum")
        }
        Command::Map2d { k_min, k_max, k_points, a_min, a_max, a_points } => {
            let kx = axis(Axis::DeltaK, *k_min, *k_max, *k_points, gamma)?;
            let ay = axis(Axis::DeltaA, *a_min, *a_max, *a_points, gamma)?;
            emit_table(cli, &map_2d(&GridSpec::new(vec![kx, ay], system, cli.port)?)?, "map2d")
        }
        Command::Nscan { n_min, n_max, delta_a, delta_k } => {
            let detunings = if delta_a.is_empty() { vec![system.detuning_a] } else { delta_a.clone() };
            let table = photon_number_scan(&system, (*n_min, *n_max), *delta_k, &detunings, cli.port)?;
            emit_table(cli, &table, "nscan")
        }
        Command::Dressed { min, max, points } => run_dressed(cli, &system, *min, *max, *points),
        Command::Points => run_points(cli, &system),
        Command::Verify { carriers, n_modes, no_calibration } => {
            run_verify(cli, &system, carriers, *n_modes, *no_calibration)
        }
        Command::Figure { .. } | Command::Selftest => unreachable!("handled above"),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
