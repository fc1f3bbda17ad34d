use std::path::PathBuf;
use std::process::ExitCode;

use aegis::cli::{self, PretrainArgs, RunArgs, SweepArgs};
use aegis::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aegis", version, about = "UAV relay anti-jamming game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent across perturbed scenarios and store its weights or tables.
    Pretrain {
        /// Scenario file or preset name.
        #[arg(long)]
        config: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        gamma_scenarios: usize,
        #[arg(long, default_value_t = 500)]
        slots: usize,
        /// Defaults to the scenario's hotboot seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one episode and write its trace and summary.
    Run {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        slots: Option<usize>,
        #[arg(long)]
        case: Option<u8>,
        /// Hotboot store written by `pretrain`.
        #[arg(long)]
        hotboot: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every agent against every seed and compare.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long, default_value = "drlur,hpur,qlearn")]
        agents: String,
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long)]
        hotboot: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the numerics against independent oracles.
    Selftest,
}

fn run(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Pretrain { config, out, gamma_scenarios, slots, seed } => {
            let config = cli::load_config(&config)?;
            let seed = seed.unwrap_or(config.uav.hotboot.seed);
            let o = cli::cmd_pretrain(&PretrainArgs { config, out, scenarios: gamma_scenarios, slots, seed })?;
            match (o.path, o.digest) {
                (Some(p), Some(d)) => println!("{}  {d:016x}", p.display()),
                _ => println!("nothing trained"),
            }
        }
        Command::Run { config, seed, slots, case, hotboot, out } => {
            let config = cli::load_config(&config)?;
            let o = cli::cmd_run(&RunArgs { config, seed, slots, case, hotboot, out })?;
            print!("{}", o.report);
        }
        Command::Sweep { config, agents, seeds, hotboot, out } => {
            let args = SweepArgs {
                config: cli::load_config(&config)?,
                agents: cli::parse_agents(&agents)?,
                seeds: cli::parse_seeds(&seeds)?,
                hotboot,
                out,
                threads: None,
            };
            print!("{}", cli::cmd_sweep(&args)?.table);
        }
        Command::Selftest => {
            let (report, ok) = cli::cmd_selftest();
            print!("{report}");
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
