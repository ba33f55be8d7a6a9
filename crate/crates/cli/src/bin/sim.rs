use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rover_cli::console::{self, ConsoleHub, DEFAULT_CONSOLE_PORT};
use rover_core::onboard::ControllerConfig;
use rover_core::sim::NoiseModel;
use rover_core::{Mission, Scenario};

/// Closed-loop simulator: rover, link and base station in one process.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario to completion and print the mission report as JSON.
    Run(RunArgs),
    /// Print the built-in field course as scenario TOML.
    Scenario {
        #[arg(long)]
        noise_free: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML; the built-in field course when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run as fast as possible without a console.
    #[arg(long)]
    headless: bool,
    /// Write one NDJSON trace record per tick.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CONSOLE_PORT)]
    console_port: u16,
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    /// Onboard controller config (`key = value`).
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    rover_cli::init_logging();
    match Cli::parse().command {
        Command::Scenario { noise_free } => {
            let noise = if noise_free { NoiseModel::NONE } else { NoiseModel::default() };
            print!("{}", Scenario::field_course(noise).to_toml_string());
            Ok(())
        }
        Command::Run(args) => run(args),
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let scenario = match &args.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::field_course(NoiseModel::default()),
    };
    let seed = args.seed.unwrap_or(scenario.seed);
    let config = ControllerConfig::resolve(args.config.as_deref())?;
    let mut mission = Mission::from_scenario(&scenario, seed, config)?;
    if let Some(path) = &args.record {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        mission.record_to(Box::new(BufWriter::new(file)));
    }
    let limit = scenario.duration_ms();

    let report = if args.headless {
        mission.run(limit)
    } else {
        let (hub, commands) = ConsoleHub::new(args.ui_dir.clone());
        let addr = console::spawn(hub.clone(), args.console_port)?;
        log::info!("console at http://{addr}/");
        let stop = rover_cli::stop_on_ctrl_c()?;
        let tick = Duration::from_millis(mission.controller().config().tick_ms);
        let mut deadline = Instant::now();
        while mission.now_ms() < limit && !mission.is_finished() && !stop.load(Ordering::Relaxed) {
            while let Ok(cmd) = commands.try_recv() {
                let now = mission.now_ms();
                if let Err(e) = mission.bridge_mut().submit(cmd, now) {
                    log::warn!("command not sent: {e}");
                }
            }
            mission.step();
            for event in mission.bridge_mut().drain_events() {
                hub.publish(&event);
            }
            hub.set_sync(&mission.bridge().sync_events());
            deadline += tick;
            if let Some(wait) = deadline.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
        mission.report()
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
