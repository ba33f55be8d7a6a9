use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rover_cli::host::{serve, HostOptions};
use rover_core::onboard::ControllerConfig;
use rover_core::sim::NoiseModel;
use rover_core::Scenario;

/// Onboard controller, driving a simulated vehicle until hardware is attached.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Listen for a base station and run the control loop.
    Serve {
        /// `key = value` config; `ROVER_CONFIG` takes precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// World to drive in; the built-in field course when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured control port.
        #[arg(long)]
        port: Option<u16>,
        /// Overrides the configured telemetry port on the base station.
        #[arg(long)]
        telemetry_port: Option<u16>,
        #[arg(long, default_value = "0.0.0.0")]
        bind: IpAddr,
    },
}

fn main() -> anyhow::Result<()> {
    rover_cli::init_logging();
    let Command::Serve { config, scenario, seed, port, telemetry_port, bind } = Cli::parse().command;
    let mut config = ControllerConfig::resolve(config.as_deref())?;
    if let Some(p) = port {
        config.control_port = p;
    }
    if let Some(p) = telemetry_port {
        config.telemetry_port = p;
    }
    let scenario = match scenario {
        Some(p) => Scenario::load(&p)?,
        None => Scenario::field_course(NoiseModel::default()),
    };
    let seed = seed.unwrap_or(scenario.seed);
    let stop = rover_cli::stop_on_ctrl_c()?;
    let opts = HostOptions { config, scenario, seed, bind };
    let summary = serve(&opts, stop, |addr| {
        // scripts wait for this line before connecting
        println!("listening on {addr}");
    })?;
    log::info!("served {} sessions, sent {} telemetry datagrams", summary.sessions, summary.telemetry_sent);
    Ok(())
}
