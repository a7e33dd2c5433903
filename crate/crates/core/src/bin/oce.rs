use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oce::cli::config::{drift_spec_from, ExperimentConfig, KeyValues, ReportFormat};
use oce::cli::experiment::run_experiment;
use oce::cli::io::write_instances_csv;
use oce::cli::report::{consistency_from, emit_report, format_summary, read_records, roc_summaries};
use oce::cli::exit_code;
use oce::drift::{generate, DriftKind, DriftStreamSpec};
use oce::error::{Error, Result};

#[derive(Parser)]
#[command(name = "oce", version, about = "Online and batch cost-sensitive ensembles for imbalanced streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key = value config file.
    Run {
        config: PathBuf,
        /// Overrides the config's `output` directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's `format` (csv, jsonl or both).
        #[arg(long)]
        format: Option<ReportFormat>,
    },
    /// Write a SINE1/SINE1G/SINE1M stream as CSV.
    ///
    /// The argument is either a key = value file (kind, length, ratio, transition,
    /// seed) or just a kind name, which uses the defaults.
    GenStream {
        spec: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize record files written by `run`.
    Report {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Also write ROC and summary files here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// The spec and the `output` path it names, if any.
fn load_drift_spec(arg: &str) -> Result<(DriftStreamSpec, Option<PathBuf>)> {
    let path = Path::new(arg);
    if path.is_file() {
        let kv = KeyValues::read(path)?;
        let allowed = ["kind", "length", "ratio", "transition", "seed", "output"];
        if let Some(k) = kv.unknown_keys(&allowed).first() {
            return Err(Error::Config(format!("unknown key '{k}' in {}", path.display())));
        }
        let spec = drift_spec_from(&kv, "kind", "")?.ok_or_else(|| Error::Config("drift spec lacks 'kind'".into()))?;
        return Ok((spec, kv.get("output").map(PathBuf::from)));
    }
    let kind: DriftKind = arg.parse()?;
    Ok((DriftStreamSpec::new(kind, 4000, 90.0, 0), None))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output, format } => {
            let mut cfg = ExperimentConfig::read(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            if let Some(f) = format {
                cfg.format = f;
            }
            let records = run_experiment(&cfg)?;
            let files = emit_report(&records, &cfg.output, cfg.format)?;
            let summaries = roc_summaries(&records)?;
            print!("{}", format_summary(&summaries, consistency_from(&summaries)?.as_ref()));
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::GenStream { spec, output, seed } => {
            let (mut spec, named) = load_drift_spec(&spec)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let stream = generate(&spec)?;
            let path = output.or(named).unwrap_or_else(|| PathBuf::from(format!("{}_{}.csv", spec.kind, spec.seed)));
            write_instances_csv(&path, &stream)?;
            let n_pos = stream.iter().filter(|i| i.label.is_positive()).count();
            eprintln!("wrote {} ({} instances, {} positives)", path.display(), stream.len(), n_pos);
        }
        Command::Report { records, output } => {
            let mut all = Vec::new();
            for p in &records {
                all.extend(read_records(p)?);
            }
            let summaries = roc_summaries(&all)?;
            print!("{}", format_summary(&summaries, consistency_from(&summaries)?.as_ref()));
            if let Some(dir) = output {
                for f in emit_report(&all, &dir, ReportFormat::Csv)? {
                    eprintln!("wrote {}", f.display());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
