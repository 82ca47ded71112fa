//! `darkstate`: Λ-system compensation, ladder spectra, edge states, phase scans and
//! the many-body charge-density-wave check from the command line.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use darkstate::ladder::Boundary;

use commands::RunContext;
use config::{Format, InitialState, RunConfig};
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "darkstate", version, about = "Non-Hermitian dark-state and flat-band toolkit")]
struct Cli {
    /// TOML configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write `<command>.csv|json` into this directory instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Recorded in JSON summaries; `DARKSTATE_SEED` takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Imaginary field that restores the dark state; prints B_I, λ_D and the residual.
    Compensate(LambdaArgs),
    /// Bloch-sphere trajectory of the Λ system.
    LambdaEvolve(EvolveArgs),
    /// Sorted spectrum of the real-space ladder.
    Spectrum(LadderArgs),
    /// Bloch bands over the two-rung cell.
    Bands(BandsArgs),
    /// Edge-state wavefunctions and decay fits (open ladder).
    Edges(EdgesArgs),
    /// Zero-mode census over a (Γ, Ω_y) grid.
    Scan(ScanArgs),
    /// Exact diagonalization check of the charge-density-wave ground state.
    Manybody(ManyBodyArgs),
}

#[derive(Args, Debug, Default)]
struct LambdaArgs {
    #[arg(long, allow_hyphen_values = true)]
    bx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    by: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bz: Option<f64>,
    /// Mixing angle θ in [0, π].
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega2: Option<f64>,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    lambda: LambdaArgs,
    /// Use B_I = 0 instead of the compensating field.
    #[arg(long)]
    no_compensation: bool,
    #[arg(long, value_enum)]
    psi0: Option<InitialState>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct LadderArgs {
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega_x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega_y: Option<f64>,
    /// Number of rungs.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    #[arg(long)]
    eig_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct BandsArgs {
    #[command(flatten)]
    ladder: LadderArgs,
    #[arg(long)]
    nk: Option<usize>,
}

#[derive(Args, Debug)]
struct EdgesArgs {
    #[command(flatten)]
    ladder: LadderArgs,
    /// Energy window around the edge energies.
    #[arg(long)]
    window: Option<f64>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    ladder: LadderArgs,
    #[arg(long, allow_hyphen_values = true)]
    gamma_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_stop: Option<f64>,
    #[arg(long)]
    gamma_step: Option<f64>,
    /// Comma-separated Ω_y values.
    #[arg(long = "omega-y-grid", value_delimiter = ',', allow_hyphen_values = true)]
    omega_y_grid: Option<Vec<f64>>,
    /// Zero-mode window |E| < tol.
    #[arg(long)]
    tol_edge: Option<f64>,
}

#[derive(Args, Debug)]
struct ManyBodyArgs {
    #[command(flatten)]
    ladder: LadderArgs,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    degeneracy_tol: Option<f64>,
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    match s {
        "open" => Ok(Boundary::Open),
        "periodic" => Ok(Boundary::Periodic),
        _ => Err(format!("expected open or periodic, got {s:?}")),
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn merge_lambda(cfg: &mut RunConfig, a: LambdaArgs) {
    let l = &mut cfg.lambda;
    set(&mut l.theta, a.theta);
    set(&mut l.omega1, a.omega1);
    set(&mut l.omega2, a.omega2);
    if a.bx.is_some() || a.by.is_some() || a.bz.is_some() {
        let base = l.b_r.unwrap_or([0.0; 3]);
        l.b_r = Some([
            a.bx.unwrap_or(base[0]),
            a.by.unwrap_or(base[1]),
            a.bz.unwrap_or(base[2]),
        ]);
    }
    // a Rabi pair on the command line replaces a configured θ and vice versa
    if a.theta.is_some() {
        l.omega1 = None;
        l.omega2 = None;
    } else if a.omega1.is_some() || a.omega2.is_some() {
        l.theta = None;
    }
}

fn merge_ladder(cfg: &mut RunConfig, a: LadderArgs) {
    let l = &mut cfg.ladder;
    set(&mut l.t, a.t);
    set(&mut l.gamma, a.gamma);
    set(&mut l.omega_x, a.omega_x);
    set(&mut l.omega_y, a.omega_y);
    set(&mut l.length, a.length);
    set(&mut l.boundary, a.boundary);
    set(&mut cfg.tolerances.eig, a.eig_tol);
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.format, cli.format);
    set(&mut cfg.output, cli.output);
    set(&mut cfg.seed, cli.seed);
    let kind = match cli.command {
        Command::Compensate(a) => {
            merge_lambda(&mut cfg, a);
            "compensate"
        }
        Command::LambdaEvolve(a) => {
            merge_lambda(&mut cfg, a.lambda);
            if a.no_compensation {
                cfg.lambda.compensate = Some(false);
            }
            set(&mut cfg.lambda.psi0, a.psi0);
            set(&mut cfg.lambda.t_max, a.t_max);
            set(&mut cfg.lambda.steps, a.steps);
            "lambda-evolve"
        }
        Command::Spectrum(a) => {
            merge_ladder(&mut cfg, a);
            "spectrum"
        }
        Command::Bands(a) => {
            merge_ladder(&mut cfg, a.ladder);
            set(&mut cfg.bands.n_k, a.nk);
            "bands"
        }
        Command::Edges(a) => {
            merge_ladder(&mut cfg, a.ladder);
            set(&mut cfg.tolerances.edge, a.window);
            "edges"
        }
        Command::Scan(a) => {
            merge_ladder(&mut cfg, a.ladder);
            set(&mut cfg.scan.gamma_start, a.gamma_start);
            set(&mut cfg.scan.gamma_stop, a.gamma_stop);
            set(&mut cfg.scan.gamma_step, a.gamma_step);
            set(&mut cfg.scan.omega_y, a.omega_y_grid);
            set(&mut cfg.tolerances.scan_edge, a.tol_edge);
            "scan"
        }
        Command::Manybody(a) => {
            merge_ladder(&mut cfg, a.ladder);
            set(&mut cfg.manybody.u, a.u);
            set(&mut cfg.tolerances.degeneracy, a.degeneracy_tol);
            "manybody"
        }
    };
    cfg.check_tolerances()?;
    let seed = cfg.resolved_seed()?;
    let format = match kind {
        // these two only have a JSON form
        "compensate" | "manybody" => Format::Json,
        _ => cfg.format.unwrap_or_default(),
    };
    let sink = Sink::new(cfg.output.clone())?;
    let ctx = RunContext {
        cfg,
        format,
        sink,
        seed,
    };
    match kind {
        "compensate" => commands::cmd_compensate(&ctx),
        "lambda-evolve" => commands::cmd_lambda_evolve(&ctx),
        "spectrum" => commands::cmd_spectrum(&ctx),
        "bands" => commands::cmd_bands(&ctx),
        "edges" => commands::cmd_edges(&ctx),
        "scan" => commands::cmd_scan(&ctx),
        _ => commands::cmd_manybody(&ctx),
    }
}

/// 2 when the root cause is a numerical failure in the library, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<darkstate::Error>())
        .any(|e| e.is_numerical());
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
