use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use perpetua::{IntegratorConfig, SolverConfig, TheoremId, Tolerances};
use perpetua_cli::commands::{self, parse_grid, parse_point, parse_region, PortraitRequest, VerifyRequest};
use perpetua_cli::CliError;

#[derive(Parser)]
#[command(name = "perpetua", version, about = "Fixed points, perpetual points and conjugacy checks for autonomous ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find fixed and perpetual points with their spectra.
    Analyze {
        system: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the transformed system g from a map and its inverse, and analyse it.
    Transform {
        system: PathBuf,
        map: PathBuf,
        /// Also write the definition of g to this file.
        #[arg(long)]
        emit_system: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check flow conjugacy, point mapping, spectra and new points under a map.
    Verify {
        system: PathBuf,
        map: PathBuf,
        /// Definition of g to compare against instead of the one built from the inverse.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Comma separated subset of flow,t1,t2,t3,r1.
        #[arg(long, default_value = "flow,t1,t2,t3,r1")]
        theorems: String,
        /// Horizon of the flow check.
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        /// Tolerance of the flow check.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 5)]
        initial_points: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write grid samples of f and F and trajectories as CSV files.
    Portrait {
        system: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        /// Points per axis: N or NxM.
        #[arg(long, default_value = "101")]
        grid: String,
        #[arg(long, default_value_t = 0)]
        trajectories: usize,
        /// Start point x[,y]; may be repeated.
        #[arg(long, allow_hyphen_values = true)]
        start: Vec<String>,
        #[arg(long = "T", default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolverArgs {
    /// Search box lo:hi[,lo:hi...]; overrides the region in the file.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Velocity norm below which a point counts as fixed.
    #[arg(long)]
    eps_v: Option<f64>,
    #[arg(long)]
    root_tol: Option<f64>,
    #[arg(long)]
    dedup_tol: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            seed_count: self.seeds.unwrap_or(d.seed_count),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
            velocity_floor: self.eps_v.unwrap_or(d.velocity_floor),
            root_tol: self.root_tol.unwrap_or(d.root_tol),
            dedup_tol: self.dedup_tol.unwrap_or(d.dedup_tol),
            ..d
        }
    }

    fn region(&self) -> Result<Option<perpetua::AnalysisRegion>, CliError> {
        self.region.as_deref().map(parse_region).transpose()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn parse_theorems(list: &str) -> Result<Vec<TheoremId>, CliError> {
    list.split(',')
        .map(|name| {
            TheoremId::from_short_name(name.trim())
                .ok_or_else(|| CliError::Input(format!("unknown theorem `{name}`; use flow,t1,t2,t3,r1")))
        })
        .collect()
}

fn write_system(path: &Path, system: &perpetua_cli::files::SystemFile) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(system).expect("system serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze { system, solver, output } => {
            let report = commands::analyze(&system, solver.region()?.as_ref(), &solver.config())?;
            for w in &report.body.warnings {
                eprintln!("warning: {w}");
            }
            output.emit(&match output.format {
                Format::Json => report.to_json(),
                Format::Csv => commands::points_csv(&report.body),
            })?;
            Ok(0)
        }
        Command::Transform { system, map, emit_system, solver, output } => {
            let report = commands::transform(&system, &map, solver.region()?.as_ref(), &solver.config())?;
            if let Some(path) = emit_system {
                write_system(&path, &report.body.transformed)?;
            }
            output.emit(&match output.format {
                Format::Json => report.to_json(),
                Format::Csv => commands::points_csv(&report.body.analysis),
            })?;
            Ok(0)
        }
        Command::Verify { system, map, target, theorems, horizon, tol, initial_points, solver, output } => {
            let cfg = solver.config();
            let tolerances =
                Tolerances { flow_tol: tol, flow_horizon: horizon, initial_points, ..Tolerances::for_solver(&cfg) };
            let region = solver.region()?;
            let req = VerifyRequest {
                system: &system,
                map: &map,
                target: target.as_deref(),
                region: region.as_ref(),
                solver: cfg,
                tolerances,
                integrator: IntegratorConfig::default(),
                theorems: parse_theorems(&theorems)?,
            };
            let report = commands::verify(&req)?;
            output.emit(&match output.format {
                Format::Json => report.to_json(),
                Format::Csv => commands::checks_csv(&report.body),
            })?;
            Ok(if report.body.passed { 0 } else { 1 })
        }
        Command::Portrait { system, region, grid, trajectories, start, horizon, samples, rng_seed, out } => {
            let region = region.as_deref().map(parse_region).transpose()?;
            let req = PortraitRequest {
                system: &system,
                region: region.as_ref(),
                grid: parse_grid(&grid)?,
                trajectories,
                starts: start.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?,
                horizon,
                samples,
                rng_seed,
                integrator: IntegratorConfig::default(),
                out: &out,
            };
            let summary = commands::portrait(&req)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                println!("{}", f.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
