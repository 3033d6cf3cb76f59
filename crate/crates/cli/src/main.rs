//! `qsk`: batch driver for the quantum k-SAT search experiments.

mod args;
mod commands;
mod manifest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use qsk_core::{Error, Result};

use args::Command;
use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(
    name = "qsk",
    version,
    about = "Single-step quantum search over random k-SAT ensembles"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "QSK_THREADS")]
    threads: Option<usize>,
    /// Result file (default: stdout).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Manifest file (default: `<output>.manifest.json`, or stderr without --output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::usage(format!("thread pool: {e}")))?;
    }
    let config = match cli.command {
        Command::Replay(r) => Manifest::read(&r.manifest)?.config,
        c => c,
    };
    if matches!(config, Command::Replay(_)) {
        return Err(Error::usage("a manifest cannot replay another replay"));
    }
    let start = Instant::now();
    let summary = {
        let mut out: Box<dyn Write> = match &cli.output {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| with_path(e, p))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        let summary = commands::execute(&config, &mut out)?;
        out.flush()?;
        summary
    };
    let manifest = Manifest::new(config, cli.output.clone(), start.elapsed(), summary);
    match (&cli.manifest, &cli.output) {
        (Some(p), _) => manifest.write(p),
        (None, Some(o)) => {
            let mut name = o.clone().into_os_string();
            name.push(".manifest.json");
            manifest.write(&PathBuf::from(name))
        }
        (None, None) => {
            let mut err = io::stderr().lock();
            serde_json::to_writer_pretty(&mut err, &manifest)?;
            writeln!(err)?;
            Ok(())
        }
    }
}

pub(crate) fn with_path(e: io::Error, p: &std::path::Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsk: {e}");
            if let Error::Convergence { trajectory, .. } = &e {
                for p in trajectory.iter().rev().take(5).rev() {
                    eprintln!(
                        "  at (Re x, Im x, y) = ({:.6e}, {:.6e}, {:.6e})",
                        p[0], p[1], p[2]
                    );
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
