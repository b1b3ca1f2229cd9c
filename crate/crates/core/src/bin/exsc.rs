use clap::{Parser, Subcommand};
use exsc::cli::config::ExperimentConfig;
use exsc::cli::run::{default_out_dir, exit_code, run, summary_lines, Command, VERIFY_FAILED};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "exsc", version, about = "Exterior scattering solvers on the conformal cylinder")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML experiment configuration (defaults used when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: out/<subcommand>)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the spectral transforms
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RNG seed; overrides `seed` in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Scattering from infinity: u → v₊ as r → ∞
    SolveInfinity,
    /// Exterior (or interior) Dirichlet problem with prescribed boundary trace
    SolveDirichlet,
    /// Removable-singularity problem at the origin
    SolveZero,
    /// Classify a bilinear form field and print its flat transform
    CheckNull,
    /// Decay of a null-form product of free solutions in d = 2
    ProbeNull,
    /// Fitted decay rates across powers and amplitudes
    Rates,
    /// Structural self-checks
    Verify,
    /// Radial ODE reference profile
    OracleRadial,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::SolveInfinity => Command::SolveInfinity,
            Cmd::SolveDirichlet => Command::SolveDirichlet,
            Cmd::SolveZero => Command::SolveZero,
            Cmd::CheckNull => Command::CheckNull,
            Cmd::ProbeNull => Command::ProbeNull,
            Cmd::Rates => Command::Rates,
            Cmd::Verify => Command::Verify,
            Cmd::OracleRadial => Command::OracleRadial,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = Command::from(cli.cmd);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    };
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.unwrap_or_else(|| default_out_dir(cmd));
    match run(cmd, &cfg, &out) {
        Ok(o) => {
            for line in summary_lines(&o.results, "") {
                println!("{line}");
            }
            if o.verify_failed {
                eprintln!("verify: one or more checks failed");
                ExitCode::from(VERIFY_FAILED as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
