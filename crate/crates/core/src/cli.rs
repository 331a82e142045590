//! The `cylfit` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 degenerate input
//! refused, 3 numeric failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::fitter::{fit_cylinder, stationarity_residual, FitConfig};
use crate::geom::{distance_to_axis, AxisLine, Cylinder, Vec3};
use crate::io::{
    axis_fields, generate_cylinder_cloud, line_angle_deg, parse_points_csv, write_points_csv,
    EvalReport, FitReport, GeneratorSpec, RefusalReport, VerifyFitSide, VerifyOracleSide,
    VerifyReport,
};
use crate::moments::{nonflatness_operator, quartic_tensor_with_rank_eps};
use crate::oracle::{
    biquadratic_error_by_definition, grid_best_axis_with, rms_error, DirectObjective,
};
use crate::{fitter, DEFAULT_ORACLE_RESOLUTION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cylfit",
    version,
    about = "Fit circular cylinders to 3D point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a cylinder to a CSV point cloud and print a JSON report.
    Fit(FitArgs),
    /// Sample a synthetic cylinder point cloud as CSV.
    Generate(GenerateArgs),
    /// Evaluate the errors of a given cylinder against a point cloud.
    Eval(EvalArgs),
    /// Compare the fit with a brute-force grid search over axis directions.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Number of hemisphere seed directions.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    /// Number of best seeds to refine.
    #[arg(long, default_value_t = 8)]
    multistart: usize,
    /// Stationarity tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long = "rank-eps", default_value_t = 1e-9)]
    rank_eps: f64,
    /// Include per-point surface distances.
    #[arg(long)]
    residuals: bool,
    /// Run on a single thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    height: f64,
    #[arg(long = "axis-point", value_parser = parse_vec3, allow_hyphen_values = true)]
    axis_point: Vec3,
    #[arg(long = "axis-dir", value_parser = parse_vec3, allow_hyphen_values = true)]
    axis_dir: Vec3,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "axis-point", value_parser = parse_vec3, allow_hyphen_values = true)]
    axis_point: Vec3,
    #[arg(long = "axis-dir", value_parser = parse_vec3, allow_hyphen_values = true)]
    axis_dir: Vec3,
    #[arg(long)]
    radius: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Oracle grid resolution.
    #[arg(long, default_value_t = DEFAULT_ORACLE_RESOLUTION)]
    grid: usize,
    #[arg(long)]
    sequential: bool,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| format!("cannot parse {p:?} as a number"))?;
    }
    Vec3::try_new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

/// Failure of a subcommand, already mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
    /// JSON printed on stdout alongside the error.
    json: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::Degenerate { class, reason } => Failure {
                code: EXIT_DEGENERATE,
                message: e.to_string(),
                json: serde_json::to_string_pretty(&RefusalReport {
                    refused: true,
                    degeneracy: *class,
                    reason: reason.clone(),
                })
                .ok(),
            },
            Error::NumericFailure(_) => Failure {
                code: EXIT_NUMERIC,
                message: e.to_string(),
                json: None,
            },
            _ => Failure {
                code: EXIT_USAGE,
                message: e.to_string(),
                json: None,
            },
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
        json: None,
    }
}

fn read_cloud(path: &Path) -> Result<crate::geom::PointCloud, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(parse_points_csv(&text)?)
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("stdout: {e}"),
            json: None,
        }),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn run_fit(args: FitArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cloud = read_cloud(&args.input)?;
    let cfg = FitConfig {
        grid_count: args.grid,
        multistart_count: args.multistart,
        tol_stationarity: args.tol,
        rank_eps: args.rank_eps,
        emit_residuals: args.residuals,
        parallel: !args.sequential,
        ..FitConfig::default()
    };
    let fit = fit_cylinder(&cloud, &cfg)?;
    emit(
        &to_json(&FitReport::from(&fit)),
        args.output.as_deref(),
        stdout,
    )
}

fn run_generate(args: GenerateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let spec = GeneratorSpec {
        n: args.n,
        axis_point: args.axis_point,
        axis_dir: args.axis_dir,
        radius: args.radius,
        height: args.height,
        noise_sigma: args.noise,
        seed: args.seed,
    };
    let cloud = generate_cylinder_cloud(&spec)?;
    emit(&write_points_csv(&cloud), args.output.as_deref(), stdout)
}

fn run_eval(args: EvalArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cloud = read_cloud(&args.input)?;
    let axis = AxisLine::from_point_direction(args.axis_point, args.axis_dir)?;
    let cyl = Cylinder::new(axis, args.radius)?;
    let (axis_direction, axis_point, axis_moment) = axis_fields(&axis);
    let report = EvalReport {
        axis_direction,
        axis_point,
        axis_moment,
        radius: cyl.radius(),
        dbar2: fitter::dbar2_direct(&cloud, &axis, cyl.radius()),
        biquadratic_by_definition: biquadratic_error_by_definition(&cloud, &cyl),
        rms_distance: rms_error(&cloud, &cyl),
        residuals: cloud
            .iter()
            .map(|p| (distance_to_axis(&axis, p) - cyl.radius()).abs())
            .collect(),
    };
    emit(&to_json(&report), None, stdout)
}

fn run_verify(args: VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cloud = read_cloud(&args.input)?;
    let cfg = FitConfig {
        parallel: !args.sequential,
        ..FitConfig::default()
    };
    let fit = fit_cylinder(&cloud, &cfg)?;
    let grid = grid_best_axis_with(&cloud, args.grid, cfg.parallel)?;
    let a = fit.cylinder.axis.direction();
    let objective = DirectObjective::new(&cloud)?.value(&a);
    let q = quartic_tensor_with_rank_eps(&cloud, &nonflatness_operator(&cloud), cfg.rank_eps)?;
    let report = VerifyReport {
        fit: VerifyFitSide {
            axis_direction: a.get().to_array(),
            objective,
            stationarity_residual: stationarity_residual(&q, a),
        },
        oracle: VerifyOracleSide {
            best_direction: grid.best_direction.get().to_array(),
            best_value: grid.best_value,
            resolution: grid.resolution,
        },
        angle_deg: line_angle_deg(&a, &grid.best_direction),
        objective_gap: objective - grid.best_value,
    };
    emit(&to_json(&report), None, stdout)
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };

    let result = match cli.command {
        Command::Fit(a) => run_fit(a, stdout),
        Command::Generate(a) => run_generate(a, stdout),
        Command::Eval(a) => run_eval(a, stdout),
        Command::Verify(a) => run_verify(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if let Some(json) = f.json {
                let _ = writeln!(stdout, "{json}");
            }
            let _ = writeln!(stderr, "cylfit: {}", f.message);
            f.code
        }
    }
}
