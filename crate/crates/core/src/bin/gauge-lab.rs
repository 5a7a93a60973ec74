use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gauge_lab::experiment::{emit_report, run_experiment, ExperimentConfig, OutputFormat};
use gauge_lab::expr::{Bindings, Expr};
use gauge_lab::fields::classify_gauge_function;
use gauge_lab::model::PhysicalParams;

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "gauge-lab", about = "Gauge transformations of the 1D minimally coupled Hamiltonian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `output_dir` from the config, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Classify one gauge function.
    Classify {
        #[arg(long)]
        chi: String,
        /// Constant binding `NAME=VALUE`; may be repeated.
        #[arg(long = "const", value_name = "NAME=VALUE")]
        constants: Vec<String>,
    },
    /// Print the version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Text => OutputFormat::Text,
        }
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_CONFIG)
}

fn run(config: PathBuf, out: Option<PathBuf>, format: Format) -> ExitCode {
    let cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let files = match emit_report(&report, format.into(), &dir) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    for a in &report.assertions {
        println!("{} {}", if a.passed { "PASS" } else { "FAIL" }, a.name);
    }
    for f in &files {
        println!("wrote {}", f.display());
    }
    eprintln!("wall-clock: {:.3} s", report.wall_clock.as_secs_f64());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", value.trim()))?;
    Ok((name.trim().to_string(), value))
}

fn classify(chi: &str, constants: &[String]) -> ExitCode {
    let mut bindings: Bindings = PhysicalParams::default().bindings();
    for c in constants {
        match parse_binding(c) {
            Ok((k, v)) => bindings.insert(k, v),
            Err(e) => return fail(e),
        }
    }
    let result = Expr::parse(chi).and_then(|e| classify_gauge_function(&e, &bindings));
    match result {
        Ok(c) => {
            println!("{}", serde_json::to_string(&c).expect("classification serializes"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, format } => run(config, out, format),
        Command::Classify { chi, constants } => classify(&chi, &constants),
        Command::Version => {
            println!("gauge-lab {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
