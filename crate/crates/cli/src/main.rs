//! `fpr`: run fermion-pair register experiments from TOML configs.

mod catalog;
mod config;
mod error;
mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, Format, Kind};
use error::CliError;
use experiments::Artifact;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fpr", version, about = "Config-driven experiments on fermion-pair registers")]
#[command(after_help = "Relative output paths resolve against $FPR_OUTPUT_DIR when it is set.")]
struct Cli {
    /// Worker threads for parallel sections; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
    /// List experiment kinds, or document the parameters of one kind.
    List { kind: Option<String> },
    /// Check a config against the schema without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": "threads", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_status() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::List { kind: None } => print!("{}", catalog::overview()),
        Command::List { kind: Some(k) } => print!("{}", catalog::describe(Kind::parse(&k)?)),
        Command::Validate { config } => {
            let c = ExperimentConfig::load(&config)?;
            println!("{}: valid {} config, sha256 {}, output {}", config.display(), c.kind, c.hash, c.output_path().display());
        }
        Command::Run { config, force } => {
            let c = ExperimentConfig::load(&config)?;
            let out = c.output_path();
            let companions: Vec<PathBuf> = experiments::companion_suffixes(&c).iter().map(|s| companion_path(&out, s)).collect();
            if !force {
                if let Some(p) = std::iter::once(&out).chain(&companions).find(|p| p.exists()) {
                    return Err(CliError::OutputExists(p.clone()));
                }
            }
            let artifact = experiments::run(&c)?;
            write_outputs(&c, &out, &artifact)?;
            println!("{}", out.display());
            for p in &companions {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

/// `dir/stem.ext` with `suffix` in place of `.ext`.
fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn preamble(c: &ExperimentConfig) -> String {
    format!("# fpr {VERSION}\n# kind {}\n# config_sha256 {}\n", c.kind, c.hash)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let wrap = |source| CliError::Write { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    let mut f = std::fs::File::create(path).map_err(wrap)?;
    f.write_all(bytes).map_err(wrap)
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Simulation(e.into());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Simulation(fermion_pair::Error::Io(e.into_error())))
}

fn write_outputs(c: &ExperimentConfig, out: &Path, a: &Artifact) -> Result<(), CliError> {
    let bytes = match c.format {
        Format::Csv => {
            let mut b = preamble(c).into_bytes();
            b.extend(csv_bytes(&a.table.header, &a.table.rows)?);
            b
        }
        Format::Json => {
            let doc = json!({
                "kind": c.kind.name(),
                "version": VERSION,
                "config_sha256": c.hash,
                "seed": c.seed,
                "parameters": c.parameters.to_json(),
                "result": a.result,
            });
            let mut b = serde_json::to_vec_pretty(&doc).expect("json serializes");
            b.push(b'\n');
            b
        }
    };
    write_file(out, &bytes)?;
    for comp in &a.companions {
        let mut b = preamble(c).into_bytes();
        b.extend(&comp.csv);
        write_file(&companion_path(out, &comp.suffix), &b)?;
    }
    Ok(())
}
