use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wedgewave::artifacts::images_to_string;
use wedgewave::config::{parse_run_config, Artifact, RunConfig};
use wedgewave::images::build_wedge_images;
use wedgewave::run::{run_artifacts, validate_system};
use wedgewave::Error;

#[derive(Parser)]
#[command(
    name = "wedgewave",
    version,
    about = "Free wave packets in a wedge of opening pi/N"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the signed image transformations for a wedge of angle pi/N.
    Images {
        n: usize,
        /// Also print where each term maps this point, as "x,y".
        #[arg(long, value_parser = parse_point, default_value = "1,0")]
        probe: (f64, f64),
    },
    /// Write every artifact listed in the config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Write the expectation-value series.
    Expect {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write half-line momentum densities and their statistics.
    Momentum1d {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check group closure, wall values and the Schrodinger residual.
    Validate {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn load(path: &PathBuf) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(parse_run_config(&text)?)
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter {
            name: "threads",
            reason: "must be at least 1".into(),
        }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Format(e.to_string())),
    }
}

fn produce(
    config: &PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
    only: Option<Artifact>,
    gamma: Option<f64>,
) -> Result<ExitCode, Error> {
    let mut cfg = load(config)?;
    if let Some(g) = gamma {
        cfg.gamma = g;
    }
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    let artifacts = match only {
        Some(a) => vec![a],
        None => cfg.outputs.clone(),
    };
    let manifest = in_pool(threads, || run_artifacts(&cfg, &artifacts, &dir))??;
    for note in &manifest.notes {
        eprintln!("warning: {note}");
    }
    println!(
        "wrote {} files to {}",
        manifest.entries.len() + 1,
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Images { n, probe } => {
            let terms = build_wedge_images(n)?;
            print!("{}", images_to_string(&terms, probe));
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            out,
            threads,
            gamma,
        } => produce(&config, out, threads, None, gamma),
        Command::Expect {
            config,
            out,
            threads,
        } => produce(&config, out, threads, Some(Artifact::Series), None),
        Command::Momentum1d {
            config,
            out,
            threads,
        } => produce(&config, out, threads, Some(Artifact::Momentum1d), None),
        Command::Validate { config, threads } => {
            let cfg = load(&config)?;
            let system = cfg.system()?;
            let report = in_pool(threads, || validate_system(&system, &cfg.times))??;
            print!("{}", report.to_text());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}
