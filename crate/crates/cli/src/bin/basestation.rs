use std::io::BufRead;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rover_cli::console::{self, ConsoleHub, DEFAULT_CONSOLE_PORT};
use rover_cli::keyboard::{parse_line, Input};
use rover_cli::station::{run_station, StationOptions};
use rover_core::basestation::GeoBounds;
use rover_core::protocol::net::DEFAULT_TELEMETRY_PORT;
use rover_core::protocol::SessionConfig;
use rover_core::GeoPoint;

/// Operator ground station.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Connect to a rover and serve the operator console.
    Connect {
        /// Rover control address, `host:port`.
        #[arg(long)]
        rover: String,
        #[arg(long, default_value_t = DEFAULT_TELEMETRY_PORT)]
        telemetry_port: u16,
        #[arg(long, default_value_t = DEFAULT_CONSOLE_PORT)]
        console_port: u16,
        /// Serve the console UI from this directory instead of the bundled page.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Directory for the mission log and trail exports.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Background image for the trail map.
        #[arg(long)]
        map: Option<String>,
        /// Map bounds as `lat1,lon1,lat2,lon2`.
        #[arg(long, value_parser = parse_bounds)]
        bounds: Option<GeoBounds>,
        /// Ignore stdin (for running as a service).
        #[arg(long)]
        no_stdin: bool,
        /// Terminal key presses are released after this many milliseconds.
        #[arg(long, default_value_t = 300)]
        key_hold_ms: u64,
        /// Exit after this many seconds.
        #[arg(long)]
        duration_s: Option<f64>,
    },
}

fn parse_bounds(s: &str) -> anyhow::Result<GeoBounds> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().context("bounds must be numbers")?;
    let [lat1, lon1, lat2, lon2] = v[..] else {
        bail!("bounds need four numbers: lat1,lon1,lat2,lon2");
    };
    Ok(GeoBounds::from_corners(GeoPoint::new(lat1, lon1)?, GeoPoint::new(lat2, lon2)?))
}

fn main() -> anyhow::Result<()> {
    rover_cli::init_logging();
    let Command::Connect { rover, telemetry_port, console_port, ui_dir, log, map, bounds, no_stdin, key_hold_ms, duration_s } =
        Cli::parse().command;

    let (hub, console_rx) = ConsoleHub::new(ui_dir);
    let addr = console::spawn(hub.clone(), console_port)?;
    log::info!("console at http://{addr}/");
    let stop = rover_cli::stop_on_ctrl_c()?;

    let terminal = if no_stdin {
        None
    } else {
        let (tx, rx) = mpsc::channel();
        let stop = stop.clone();
        std::thread::Builder::new().name("stdin".into()).spawn(move || {
            for line in std::io::stdin().lock().lines() {
                let Ok(line) = line else { break };
                match parse_line(&line) {
                    Ok(Input::Command(cmd)) => {
                        if tx.send(cmd).is_err() {
                            break;
                        }
                    }
                    Ok(Input::Quit) => break,
                    Err(e) => eprintln!("{e}"),
                }
            }
            stop.store(true, Ordering::Relaxed);
        })?;
        Some(rx)
    };
    if let Some(secs) = duration_s {
        let stop = stop.clone();
        std::thread::spawn(move || {
            std::thread::sleep(Duration::from_secs_f64(secs.max(0.0)));
            stop.store(true, Ordering::Relaxed);
        });
    }

    let opts = StationOptions { rover, telemetry_port, session: SessionConfig::default(), log_dir: log, map, bounds, key_hold_ms };
    let summary = run_station(&opts, &hub, console_rx, terminal, stop)?;
    println!(
        "{}",
        serde_json::json!({
            "commandsSent": summary.commands_sent,
            "telemetryReceived": summary.telemetry_received,
            "logRecords": summary.log_records,
            "trailPoints": summary.trail_points,
        })
    );
    Ok(())
}
