mod commands;
mod config;
mod out;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{classify, Ctx, Exit};

#[derive(Parser)]
#[command(name = "delaywave", version, about = "Traveling waves of delayed reaction-diffusion systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in model (overrides the config's model).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    /// Wave speed (overrides the config).
    #[arg(long, global = true)]
    speed: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve for a traveling wave at one speed.
    Solve,
    /// Check the bound inequalities and the contracting rectangles.
    Verify,
    /// Run the time-dependent simulator.
    Simulate,
    /// Continue the scalar wave down to the critical speed.
    Critical,
    /// Solve over a list of speeds.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Critical => "critical",
            Command::Sweep => "sweep",
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Exit> {
    let loaded = config::load(cli.config.as_deref()).map_err(|e| commands::config_err(format!("{e:#}")))?;
    let seed = cli.seed.or(loaded.config.seed).unwrap_or(0);
    let hash_input = format!(
        "command={}\npreset={:?}\nspeed={:?}\nseed={seed}\nconfig:\n{}",
        cli.command.name(),
        cli.preset,
        cli.speed,
        loaded.raw
    );
    let sink = out::Sink::new(&cli.out, cli.command.name(), seed, &hash_input)
        .map_err(|e| commands::config_err(format!("{e:#}")))?;
    let ctx = Ctx {
        config: loaded.config,
        preset_flag: cli.preset.clone(),
        speed_flag: cli.speed,
        sink,
        seed,
        plot: cli.plot,
    };
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Verify => commands::verify(&ctx),
        Command::Simulate => commands::simulate_cmd(&ctx),
        Command::Critical => commands::critical(&ctx),
        Command::Sweep => commands::sweep(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let code = classify(&e);
            eprintln!("error: {e:#}");
            if let Some(delaywave_core::WaveError::Stability { suggested, .. }) = e.downcast_ref() {
                eprintln!("hint: rerun with dt <= {suggested:.6e}");
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
