use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use genlim::classes::{fixture_names, FixtureParams};
use genlim::cli::{render, run, Command, Format, RunConfig};
use genlim::{Error, Result};

#[derive(Parser)]
#[command(name = "genlim", version, about = "Generation in the limit at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closure, prompted closure, VC and Littlestone dimensions of a fixture.
    Dims(Common),
    /// Play one generation game.
    Game(Common),
    /// Play one prompted generation game.
    Prompted(Common),
    /// Run an attack: closure, prime_tower, rational or prompted.
    Attack(Common),
    /// Tell-tale check and identification game.
    Identify(Common),
    /// Dimension finiteness of the six landscape classes.
    Landscape(Common),
    /// delta-uniform check of a randomized generator.
    Randomized(Common),
    /// List fixture names.
    Fixtures,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    fixture: Option<String>,
    /// Fixture parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// uniform[:CAP], countable[:LEN], limit, chain_limit, point_mass, noisy:P
    #[arg(long)]
    generator: Option<String>,
    /// enumeration[:I], closure[:D], attack[:D], stream[:I]
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    attack: Option<String>,
    #[arg(long, default_value_t = 4)]
    levels: u64,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long, default_value_t = 50)]
    horizon: u64,
    #[arg(long, default_value_t = 100)]
    window: u64,
    #[arg(long = "dmax", default_value_t = 6)]
    d_max: u64,
    #[arg(long = "prompt-window", default_value_t = 8)]
    prompt_window: u64,
    #[arg(long, default_value_t = 5)]
    budget: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    /// Record wall-clock time in the report (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn config(&self, command: Command) -> Result<RunConfig> {
        let mut c = RunConfig::new(command);
        c.fixture = self.fixture.clone();
        c.params = FixtureParams::parse(&self.params)?;
        c.generator = self.generator.clone();
        c.adversary = self.adversary.clone();
        c.attack = self.attack.clone();
        c.levels = self.levels;
        c.d = self.d;
        c.horizon = self.horizon;
        c.window = self.window;
        c.d_max = self.d_max;
        c.prompt_window = self.prompt_window;
        c.budget = self.budget;
        c.trials = self.trials;
        c.delta = self.delta;
        c.seed = self.seed;
        c.format = match self.format {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        };
        Ok(c)
    }
}

fn execute(common: &Common, command: Command) -> Result<()> {
    let config = common.config(command)?;
    let start = Instant::now();
    let mut report = run(&config)?;
    if common.timing {
        report.wall_clock_ms = Some(start.elapsed().as_millis() as u64);
    }
    let mut text = render(&report, config.format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::BadParams(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Dims(c) => execute(c, Command::Dims),
        Cmd::Game(c) => execute(c, Command::Game),
        Cmd::Prompted(c) => execute(c, Command::Prompted),
        Cmd::Attack(c) => execute(c, Command::Attack),
        Cmd::Identify(c) => execute(c, Command::Identify),
        Cmd::Landscape(c) => execute(c, Command::Landscape),
        Cmd::Randomized(c) => execute(c, Command::Randomized),
        Cmd::Fixtures => {
            for name in fixture_names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("genlim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
