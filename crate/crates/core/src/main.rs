use std::fmt::Display;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use faassim::config::{load_config, ConfigError, ExperimentConfig};
use faassim::experiment::{
    run_experiment, write_outputs, ExperimentError, ExperimentOutput, ReportDocument,
};
use faassim::metrics::{compare, Ratio};
use faassim::presets;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(author, version, about = "Serverless latency and caching simulator", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a preset or a config file and write records.csv + report.json.
    Run(RunArgs),
    /// List the built-in presets.
    Presets,
    /// Write a preset's config documents as JSON files.
    ExportPreset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare two report.json files (first relative to second).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MeasureArg::Response)]
        measure: MeasureArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Response,
    Backend,
}

#[derive(clap::Args, Debug)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "config"])))]
struct RunArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed. Presets default to 1, config files to their own seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of requests.
    #[arg(long)]
    requests: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, conflicts_with = "include_cold")]
    exclude_cold: bool,
    #[arg(long)]
    include_cold: bool,
}

enum Failure {
    Config(String),
    Io(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(EXIT_CONFIG)
            }
            Failure::Io(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(EXIT_IO)
            }
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets => {
            for name in presets::PRESET_NAMES {
                say(format_args!("{name}"));
            }
            Ok(())
        }
        Command::ExportPreset { name, out } => export_preset(&name, &out),
        Command::Compare { a, b, measure } => compare_reports(&a, &b, measure),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}

/// Prints a line, ignoring a closed stdout (e.g. piped into `head`).
fn say(line: impl Display) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn lookup_preset(name: &str) -> Result<Vec<ExperimentConfig>, Failure> {
    presets::preset(name).ok_or_else(|| {
        Failure::Config(format!(
            "unknown preset {name:?}; known presets: {}",
            presets::PRESET_NAMES.join(", ")
        ))
    })
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (mut configs, from_preset) = match (&args.preset, &args.config) {
        (Some(name), _) => (lookup_preset(name)?, true),
        (None, Some(path)) => (vec![load_config(path)?], false),
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    for cfg in &mut configs {
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        } else if from_preset {
            cfg.seed = 1;
        }
        if let Some(n) = args.requests {
            cfg.n_requests = n;
        }
        if args.exclude_cold {
            cfg.exclude_cold = true;
        }
        if args.include_cold {
            cfg.exclude_cold = false;
        }
    }

    // Independent experiments run in parallel; each writes its own files.
    let results: Vec<Result<ExperimentOutput, ExperimentError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || run_experiment(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let multi = outputs.len() > 1;
    for out in &outputs {
        let dir = if multi {
            args.out.join(&out.config.name)
        } else {
            args.out.clone()
        };
        let (records, report) = write_outputs(out, &dir)
            .map_err(|e| Failure::Io(format!("writing outputs to {}: {e}", dir.display())))?;
        print_summary(out);
        say(format_args!(
            "  wrote {} and {}",
            records.display(),
            report.display()
        ));
    }
    if multi {
        print_relative(&outputs);
    }
    Ok(())
}

fn print_summary(out: &ExperimentOutput) {
    let r = &out.report;
    let hit = r
        .hit_ratio
        .map(|h| format!(" hit_ratio={h:.3}"))
        .unwrap_or_default();
    say(format_args!(
        "{}: n={} mean={:.3}ms p50={:.3}ms p95={:.3}ms p99={:.3}ms cold_starts={}{}",
        out.config.name, r.count, r.mean, r.p50, r.p95, r.p99, r.cold_start_count, hit
    ));
}

/// Every experiment of a sweep against the first one.
fn print_relative(outputs: &[ExperimentOutput]) {
    let baseline = &outputs[0];
    for out in &outputs[1..] {
        let c = compare(&out.report, &baseline.report);
        say(format_args!(
            "{} vs {}: mean ratio {}, relative increase {}, difference {:.3}ms",
            out.config.name,
            baseline.config.name,
            fmt_ratio(c.mean_ratio),
            fmt_ratio(c.mean_relative_increase),
            c.mean_difference
        ));
    }
}

fn fmt_ratio(r: Ratio) -> String {
    match r {
        Ratio::Value(v) => format!("{v:.3}"),
        Ratio::Undefined => "undefined".into(),
    }
}

fn export_preset(name: &str, out: &Path) -> Result<(), Failure> {
    let configs = lookup_preset(name)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    for cfg in configs {
        let path = out.join(format!("{}.json", cfg.name));
        let mut text = serde_json::to_string_pretty(&cfg).expect("config serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        say(format_args!("{}", path.display()));
    }
    Ok(())
}

fn read_report(path: &Path) -> Result<ReportDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn compare_reports(a: &Path, b: &Path, measure: MeasureArg) -> Result<(), Failure> {
    let (a_doc, b_doc) = (read_report(a)?, read_report(b)?);
    let pick = |doc: ReportDocument, path: &Path| match measure {
        MeasureArg::Response => Ok(doc.report),
        MeasureArg::Backend => doc.backend_access.ok_or_else(|| {
            Failure::Config(format!("{} has no database access summary", path.display()))
        }),
    };
    let c = compare(&pick(a_doc, a)?, &pick(b_doc, b)?);
    say(format_args!(
        "{}",
        serde_json::to_string_pretty(&c).expect("comparison serializes")
    ));
    Ok(())
}
