use clap::{Parser, Subcommand};
use heatnull::error::Error;
use heatnull::harness::{run, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heatnull", version, about = "Explicit null-controls for the 1D heat equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// simulation modes (overrides the config)
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// terminal tolerance relative to ‖u0‖
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// seed for the random initial states
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// build the biorthogonal family and the control for one T
    Synthesize,
    /// synthesize, then simulate the controlled heat equation
    Simulate,
    /// worst control cost over a basket of data, for every T
    CostSweep,
    /// observability quotient of a concentrated initial state
    LowerBound,
    /// fundamental controlled solution on [−L, L]
    Fundamental,
    /// interior control from a wave control and the fundamental solution
    Transmute,
    /// lower and upper cost bounds side by side
    Sandwich,
    /// quick self-check of constants, biorthogonality and null-control
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Synthesize => Command::Synthesize,
            Cmd::Simulate => Command::Simulate,
            Cmd::CostSweep => Command::CostSweep,
            Cmd::LowerBound => Command::LowerBound,
            Cmd::Fundamental => Command::Fundamental,
            Cmd::Transmute => Command::Transmute,
            Cmd::Sandwich => Command::Sandwich,
            Cmd::Verify => Command::Verify,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let path = cli.config.as_ref().ok_or_else(|| Error::Usage("--config <path> is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(m) = cli.modes {
            cfg.modes = m;
        }
        if let Some(t) = cli.tol {
            cfg.tol = t;
        }
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
        run(cli.cmd.into(), &cfg, &out)
    })();
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Usage(_)) => {
            eprintln!("heatnull: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("heatnull: {e}");
            ExitCode::from(1)
        }
    }
}
