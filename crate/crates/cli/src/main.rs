use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tq_geometry::model::{Grid, HamiltonianParams};

mod commands;
mod input;
mod output;

use commands::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "tqgeom", version, about = "Geometry and entanglement of two-qubit Heisenberg orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Longitudinal field b.
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    b: f64,

    /// Couplings c1,c2,c3.
    #[arg(long, global = true, default_value = "1,0.5,0.3", allow_hyphen_values = true)]
    c: String,

    /// Transverse field strength.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,

    /// Initial coefficients e1,e2,e3,e4, each `re+imj` or `mag@phase`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<String>,

    /// Case label, e.g. C7 or C4(l=2,j=3). Checked against --eta.
    #[arg(long, global = true)]
    case: Option<String>,

    /// Metric scale.
    #[arg(long, global = true, default_value_t = 1.0)]
    gamma: f64,

    /// Point in the family chart, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,

    /// Grid over chart coordinates, name=a:b:n[,name=a:b:n…].
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Finite-difference step for the metric.
    #[arg(long = "h-metric", global = true)]
    h_metric: Option<f64>,

    /// Finite-difference step for curvature.
    #[arg(long = "h-curv", global = true, default_value_t = tq_geometry::curvature::DEFAULT_CURVATURE_STEP)]
    h_curv: f64,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Analytic and numeric eigensystem.
    Spectrum,
    /// Case of the coefficient pattern.
    Classify,
    /// Evolved state along the family.
    Evolve,
    /// Fubini–Study metric, numeric and closed form.
    Metric,
    /// Curvature tensors of the family metric.
    Curvature,
    /// First-order metric correction in the transverse field.
    Perturb,
    /// Concurrence scan.
    Concurrence,
    /// Oracle suites with pass/fail per check.
    Verify {
        /// eigensystem, periodicity, metric, gauge, tables or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Classify => "classify",
            Command::Evolve => "evolve",
            Command::Metric => "metric",
            Command::Curvature => "curvature",
            Command::Perturb => "perturb",
            Command::Concurrence => "concurrence",
            Command::Verify { .. } => "verify",
        }
    }
}

fn resolve(cli: &Cli) -> tq_geometry::Result<RunConfig> {
    let [c1, c2, c3] = input::parse_couplings(&cli.c)?;
    let params = HamiltonianParams::new(cli.b, c1, c2, c3).with_beta(cli.beta);
    params.validate()?;
    if !(cli.gamma > 0.0 && cli.gamma.is_finite()) {
        return Err(tq_geometry::Error::InvalidArgument(format!("gamma must be positive, got {}", cli.gamma)));
    }
    let eta = match &cli.eta {
        Some(s) => {
            let p = input::parse_eta(s)?;
            if p.renormalized {
                eprintln!("warning: eta had norm {:.17}; normalized", p.input_norm);
            }
            Some(p)
        }
        None => None,
    };
    let format = cli.format.unwrap_or(match cli.command {
        Command::Concurrence => Format::Csv,
        _ => Format::Json,
    });
    Ok(RunConfig {
        command: cli.command.name().into(),
        params,
        eta: eta.map(|p| p.eta),
        eta_input_norm: eta.map(|p| p.input_norm),
        case: cli.case.as_deref().map(input::parse_case).transpose()?,
        gamma: cli.gamma,
        point: cli.point.as_deref().map(|s| input::parse_list(s, "--point")).transpose()?,
        grid: cli.grid.as_deref().map(str::parse::<Grid>).transpose()?,
        h_metric: cli.h_metric,
        h_curv: cli.h_curv,
        format: if format == Format::Json { "json" } else { "csv" }.into(),
        seed: cli.seed,
        suite: match &cli.command {
            Command::Verify { suite } => Some(suite.clone()),
            _ => None,
        },
    })
}

fn fail(e: &tq_geometry::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_input_error() { 2 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let run = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Classify => commands::classify_cmd(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Metric => commands::metric(&cfg),
        Command::Curvature => commands::curvature(&cfg),
        Command::Perturb => commands::perturb(&cfg),
        Command::Concurrence => commands::concurrence_cmd(&cfg),
        Command::Verify { .. } => commands::verify(&cfg),
    };
    let report = match run {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let text = if cfg.format == "csv" { output::render_csv(&report.table) } else { output::render_json(&report) };
    let written = text.and_then(|t| output::emit(&t, cli.out.as_deref()));
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(3);
    }
    let failures = report.hard_failures();
    if failures > 0 {
        eprintln!("{failures} hard check(s) failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
