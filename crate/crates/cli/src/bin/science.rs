use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rover_core::science::{analyze_csv, biomass_fraction, ph_habitable};

/// Soil habitability analysis.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a CSV of samples, writing one JSON report per line.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Is this pH inside the band that supports life?
    Ph { value: f64 },
    /// Fraction of mass lost on heating.
    Biomass { before_g: f64, after_g: f64 },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Analyze { input, output } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let out: Box<dyn Write> = match output {
                Some(p) => Box::new(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?)),
                None => Box::new(io::stdout().lock()),
            };
            let n = analyze_csv(file, out)?;
            eprintln!("analyzed {n} samples");
        }
        Command::Ph { value } => println!("{}", ph_habitable(value)?),
        Command::Biomass { before_g, after_g } => println!("{:.4}", biomass_fraction(before_g, after_g)?),
    }
    Ok(())
}
