//! Command-line interface.
//!
//! Exit codes: 0 success, 1 a check or claim failed, 2 usage error,
//! 3 I/O error.

use crate::constants::{codata_constants, PhysicalConstants};
use crate::fields::{Ansatz, AnsatzParams, FieldsError};
use crate::geometry::{build_grid, Cylindrical, GeometryError, Resolution};
use crate::maxwell::{full_verification, MaxwellError, Sampling};
use crate::observables::evaluate;
use crate::report::{assemble, render, ConstantsDump, Format, ReportConfig, ReportError};
use crate::solver::{
    ratio_report, solve, solve_thin_torus, Mode, NewtonOptions, RatioReport, SolveResult, SolverError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "TOROIDAL_EM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const FIELD_CSV_HEADER: [&str; 14] = [
    "R", "phi", "z", "t", "E_R", "E_phi", "E_z", "B_z", "rho", "J_R", "J_phi", "S_R", "S_phi", "u",
];
pub const FIELD_CSV_NAME: &str = "fields.csv";
pub const FIELD_HEADER_NAME: &str = "fields_header.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Stdout(std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Maxwell(#[from] MaxwellError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Stdout(_) => EXIT_IO,
            CliError::Usage(_) | CliError::Report(ReportError::UnknownFormat(_)) => EXIT_USAGE,
            _ => EXIT_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "toroidal-em", version, about = "Toroidal electromagnetic electron model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print physical constants and derived scales.
    Constants {
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Check the four Maxwell equations at random interior samples.
    VerifyMaxwell {
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Multiply the solved frequency by this factor before checking.
        #[arg(long, default_value_t = 1.0)]
        omega_scale: f64,
    },
    /// Evaluate charge, moment, spin and energy by quadrature.
    Observables {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_parser = parse_resolution, default_value = "32,64,64")]
        resolution: Resolution,
    },
    /// Solve for amplitude and radii.
    Solve {
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Run everything and write the comparison report.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(long, value_parser = parse_resolution, default_value = "32,64,64")]
        resolution: Resolution,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        schwinger: Toggle,
    },
    /// Sample the fields on a regular (R, phi, z) grid.
    ExportField {
        #[command(flatten)]
        solve: SolveArgs,
        /// Time slice in seconds; repeatable.
        #[arg(long = "time", default_values_t = [0.0])]
        times: Vec<f64>,
        #[arg(long, default_value_t = 33)]
        n_r: usize,
        #[arg(long, default_value_t = 8)]
        n_phi: usize,
        #[arg(long, default_value_t = 33)]
        n_z: usize,
        /// Grid half-width around the tube centre, in units of r0.
        #[arg(long, default_value_t = 1.5)]
        extent: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl From<ReportFormat> for Format {
    fn from(f: ReportFormat) -> Self {
        match f {
            ReportFormat::Json => Format::Json,
            ReportFormat::Csv => Format::Csv,
            ReportFormat::Text => Format::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Thin,
    Full,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Thin => Mode::ThinTorus,
            ModeArg::Full => Mode::FullCorrections,
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub schwinger: Toggle,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
}

impl SolveArgs {
    fn run(&self, k: &PhysicalConstants) -> Result<SolveResult, SolverError> {
        let opts = NewtonOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        };
        solve(k, self.mode.into(), self.schwinger == Toggle::On, opts)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Relative finite-difference step.
    #[arg(long, default_value_t = crate::maxwell::DEFAULT_STEP)]
    pub step: f64,
}

impl From<SamplingArgs> for Sampling {
    fn from(a: SamplingArgs) -> Self {
        Sampling {
            n_points: a.samples,
            seed: a.seed,
            step: a.step,
        }
    }
}

pub fn parse_resolution(s: &str) -> Result<Resolution, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n_r, n_theta, n_phi] => Ok(Resolution::new(n_r, n_theta, n_phi)),
        _ => Err(format!("expected three comma-separated counts, got '{s}'")),
    }
}

/// Output of `solve`: the requested solve and the thin-torus Schwinger
/// solve the published ratios refer to.
#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    pub solve: SolveResult,
    pub ratios: RatioReport,
    pub reference: SolveOutputReference,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutputReference {
    pub solve: SolveResult,
    pub ratios: RatioReport,
}

/// Resolve the output directory: flag, then environment, then `.`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Serialize(e.to_string()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Run a parsed command, writing its primary output to `out`.
/// Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let k = codata_constants();
    let emit = |out: &mut dyn Write, s: &str| writeln!(out, "{s}").map_err(CliError::Stdout);
    match &cli.command {
        Command::Constants { format } => {
            let dump = ConstantsDump::new(&k);
            let text = match format {
                TableFormat::Json => to_json(&dump)?,
                TableFormat::Csv => {
                    let mut s = String::from("key,value\n");
                    for (key, value) in dump.rows() {
                        s.push_str(&format!("{key},{value:e}\n"));
                    }
                    s.trim_end().to_string()
                }
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::VerifyMaxwell {
            solve,
            sampling,
            omega_scale,
        } => {
            let params = solve.run(&k)?.params(&k)?.scale_omega(*omega_scale, &k)?;
            let v = full_verification(&Ansatz::new(params, k), &(*sampling).into())?;
            emit(out, &to_json(&v.reports)?)?;
            Ok(if v.all_passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Observables { solve, resolution } => {
            let ansatz = Ansatz::new(solve.run(&k)?.params(&k)?, k);
            let obs = evaluate(&ansatz, &build_grid(ansatz.geometry(), *resolution)?)?;
            emit(out, &to_json(&obs)?)?;
            Ok(EXIT_OK)
        }
        Command::Solve { solve } => {
            let ds = k.derived();
            let sr = solve.run(&k)?;
            let reference = solve_thin_torus(&k, true)?;
            let output = SolveOutput {
                ratios: ratio_report(&sr, &ds, &k),
                solve: sr,
                reference: SolveOutputReference {
                    ratios: ratio_report(&reference, &ds, &k),
                    solve: reference,
                },
            };
            emit(out, &to_json(&output)?)?;
            Ok(EXIT_OK)
        }
        Command::Report {
            out: dir,
            format,
            resolution,
            sampling,
            schwinger,
        } => {
            let config = ReportConfig {
                resolution: *resolution,
                sampling: (*sampling).into(),
                include_schwinger: *schwinger == Toggle::On,
                ..ReportConfig::default()
            };
            let report = assemble(&k, &config)?;
            let format: Format = (*format).into();
            let dir = output_dir(dir.as_deref());
            ensure_dir(&dir)?;
            let path = dir.join(format!("report.{}", format.extension()));
            write_file(&path, render(&report, format)?.as_bytes())?;
            emit(out, &path.display().to_string())?;
            Ok(if report.overall_pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::ExportField {
            solve,
            times,
            n_r,
            n_phi,
            n_z,
            extent,
            out: dir,
        } => {
            let params = solve.run(&k)?.params(&k)?;
            let spec = ExportGrid {
                n_r: *n_r,
                n_phi: *n_phi,
                n_z: *n_z,
                extent: *extent,
            };
            let csv = export_csv(&Ansatz::new(params, k), &spec, times)?;
            let dir = output_dir(dir.as_deref());
            ensure_dir(&dir)?;
            let csv_path = dir.join(FIELD_CSV_NAME);
            write_file(&csv_path, csv.as_bytes())?;
            let header_path = dir.join(FIELD_HEADER_NAME);
            write_file(
                &header_path,
                to_json(&ExportHeader::new(&params, &spec, times))?.as_bytes(),
            )?;
            emit(out, &csv_path.display().to_string())?;
            emit(out, &header_path.display().to_string())?;
            Ok(EXIT_OK)
        }
    }
}

/// Regular grid for field export, centred on the tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExportGrid {
    pub n_r: usize,
    pub n_phi: usize,
    pub n_z: usize,
    /// Half-width in units of the minor radius.
    pub extent: f64,
}

impl ExportGrid {
    pub fn points(&self, p: &AnsatzParams) -> Result<Vec<Cylindrical>, CliError> {
        if self.n_r < 2 || self.n_z < 2 || self.n_phi < 1 {
            return Err(CliError::Usage("export grid needs n_r, n_z >= 2 and n_phi >= 1".into()));
        }
        if !(self.extent > 0.0) {
            return Err(CliError::Usage("extent must be positive".into()));
        }
        let (big, small) = (p.major_radius(), p.minor_radius());
        let half = self.extent * small;
        let r_lo = (big - half).max(0.0);
        let r_step = (big + half - r_lo) / (self.n_r - 1) as f64;
        let z_step = 2.0 * half / (self.n_z - 1) as f64;
        let phi_step = std::f64::consts::TAU / self.n_phi as f64;
        let mut pts = Vec::with_capacity(self.n_r * self.n_phi * self.n_z);
        for ip in 0..self.n_phi {
            for ir in 0..self.n_r {
                for iz in 0..self.n_z {
                    pts.push(Cylindrical::new(
                        r_lo + ir as f64 * r_step,
                        ip as f64 * phi_step,
                        -half + iz as f64 * z_step,
                    ));
                }
            }
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportHeader {
    pub columns: Vec<ExportColumn>,
    pub conventions: Vec<&'static str>,
    pub params: AnsatzParams,
    pub grid: ExportGrid,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportColumn {
    pub name: &'static str,
    pub unit: &'static str,
}

impl ExportHeader {
    pub fn new(params: &AnsatzParams, grid: &ExportGrid, times: &[f64]) -> Self {
        const UNITS: [&str; 14] = [
            "m", "rad", "m", "s", "V/m", "V/m", "V/m", "T", "C/m^3", "A/m^2", "A/m^2", "W/m^2", "W/m^2", "J/m^3",
        ];
        Self {
            columns: FIELD_CSV_HEADER
                .iter()
                .zip(UNITS)
                .map(|(&name, unit)| ExportColumn { name, unit })
                .collect(),
            conventions: vec![
                "cylindrical components (R, phi, z) about the torus symmetry axis",
                "fields are the real parts of the phasors, phase psi = phi - omega t",
                "all fields and sources are zero outside the tube (R - R0)^2 + z^2 < r0^2",
                "u is the closed-form energy density eps0 E0^2 (1 + R/(4 R0)), independent of t",
                "rows ordered by t, then phi, then R, then z",
            ],
            params: *params,
            grid: *grid,
            times: times.to_vec(),
        }
    }
}

pub fn export_csv(ansatz: &Ansatz, grid: &ExportGrid, times: &[f64]) -> Result<String, CliError> {
    use crate::fields::FieldModel;
    let points = grid.points(ansatz.params())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(FIELD_CSV_HEADER).map_err(err)?;
    for &t in times {
        for &x in &points {
            let s = ansatz.sample(x, t);
            let row = [
                x.radius, x.phi, x.z, t, s.e.x, s.e.y, s.e.z, s.b.z, s.rho, s.j.x, s.j.y, s.s.x, s.s.y, s.u,
            ];
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => code,
        Err(CliError::Stdout(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("toroidal-em").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = run(&cli, &mut buf).unwrap();
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("32,64,64").unwrap(), Resolution::DEFAULT);
        assert!(parse_resolution("32,64").is_err());
        assert!(parse_resolution("a,b,c").is_err());
    }

    #[test]
    fn defaults_match_config() {
        let cli = Cli::try_parse_from(["x", "verify-maxwell"]).unwrap();
        let Command::VerifyMaxwell {
            solve,
            sampling,
            omega_scale,
        } = cli.command
        else {
            panic!()
        };
        assert_eq!(solve.mode, ModeArg::Full);
        assert_eq!(solve.schwinger, Toggle::On);
        assert_eq!((sampling.samples, sampling.seed, sampling.step), (1000, 42, 1e-5));
        assert_eq!(omega_scale, 1.0);
    }

    #[test]
    fn thin_without_schwinger_gives_half_pi() {
        let (code, out) = run_args(&["solve", "--mode", "thin", "--schwinger", "off"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let ratio = v["ratios"]["R0_over_rc"].as_f64().unwrap();
        assert!((ratio - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn export_grid_masks_outside() {
        let k = codata_constants();
        let params = solve_thin_torus(&k, true).unwrap().params(&k).unwrap();
        let ansatz = Ansatz::new(params, k);
        let grid = ExportGrid {
            n_r: 9,
            n_phi: 2,
            n_z: 9,
            extent: 1.5,
        };
        let csv = export_csv(&ansatz, &grid, &[0.0]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), FIELD_CSV_HEADER.join(","));
        let g = ansatz.geometry();
        let mut outside = 0;
        for line in lines {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            if !g.contains(v[0], v[2]) {
                outside += 1;
                assert!(v[4..].iter().all(|&x| x == 0.0), "{line}");
            }
        }
        assert!(outside > 0);
    }

    #[test]
    fn export_grid_rejects_degenerate() {
        let k = codata_constants();
        let params = solve_thin_torus(&k, true).unwrap().params(&k).unwrap();
        let grid = ExportGrid {
            n_r: 1,
            n_phi: 1,
            n_z: 5,
            extent: 1.0,
        };
        assert_eq!(grid.points(&params).unwrap_err().exit_code(), EXIT_USAGE);
    }
}
