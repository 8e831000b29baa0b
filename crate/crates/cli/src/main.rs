use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stratsweep::experiment::{run_experiment, Experiment, RawConfig, KEYS};

const EXPERIMENTS: [&str; 7] = [
    "disk-mpml",
    "sh-mpml",
    "sh-tensor",
    "perturbation-study",
    "modal-sensitivity",
    "riccati-1d",
    "one-sweep",
];

#[derive(Parser, Debug)]
#[command(
    name = "stratsweep",
    about = "Sweeping preconditioner experiments for stratified media",
    after_help = key_help()
)]
struct Cli {
    /// Experiment to run.
    #[arg(value_parser = EXPERIMENTS)]
    experiment: String,

    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for the CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn key_help() -> String {
    let mut s = String::from("Config keys (also accepted as --key=value overrides):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<20} {d}\n"));
    }
    s
}

/// Splits `--key=value` overrides from the arguments clap handles.
fn split_args(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut clap_args = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        match a.strip_prefix("--").and_then(|s| s.split_once('=')) {
            Some((k, _)) if k != "config" && k != "out" => overrides.push(a),
            _ => clap_args.push(a),
        }
    }
    (clap_args, overrides)
}

fn run(cli: Cli, overrides: &[String]) -> stratsweep::Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::default(),
    };
    cfg.apply_overrides(overrides)?;
    let exp: Experiment = cli.experiment.parse()?;
    let out = run_experiment(exp, &cfg)?;
    out.write_to(&cli.out)?;
    // a closed stdout (e.g. piped into `head`) is not an error
    let mut stdout = std::io::stdout().lock();
    let _ = write!(stdout, "{}", out.table);
    for (name, _) in &out.files {
        let _ = writeln!(stdout, "wrote {}", cli.out.join(name).display());
    }
    if out.exit_code() != 0 {
        eprintln!("warning: some GMRES runs did not reach the tolerance");
    }
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let (clap_args, overrides) = split_args(std::env::args().collect());
    let cli = Cli::parse_from(clap_args);
    match run(cli, &overrides) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
