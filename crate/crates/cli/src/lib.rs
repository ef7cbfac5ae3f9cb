//! Command-line front end for the regretlab permutation experiments.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use regretlab::{
    check_bounds, emit_report, evaluate, label_sequence, make_domain, make_threshold_class,
    CaseKind, EtaVariant, ExperimentCase, LearnerConfig, LearnerKind, PermutationStream,
    ReportEntry, ReportFormat,
};

use crate::config::{ExperimentConfig, ModeSpec, PartialConfig, PermSpec, SEED_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BOUND_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "regretlab",
    version,
    about = "Online learning permutation experiments"
)]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the threshold class and labelled sequence for a case.
    Gen(GenArgs),
}

fn parse_case(s: &str) -> Result<CaseKind, String> {
    match s {
        "realizable" => Ok(CaseKind::Realizable),
        "unrealizable" => Ok(CaseKind::Unrealizable),
        other => Err(format!(
            "expected realizable or unrealizable, got `{other}`"
        )),
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    dump_config: bool,
    #[arg(long, value_parser = parse_case)]
    case: Option<CaseKind>,
    /// Sequence length.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Number of threshold hypotheses (default T/2).
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated learner names.
    #[arg(long, value_delimiter = ',')]
    learners: Option<Vec<LearnerKind>>,
    /// exhaustive | sampled:N
    #[arg(long)]
    perm: Option<PermSpec>,
    /// Master seed; falls back to $REGRETLAB_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// sqrt8 | sqrt2
    #[arg(long)]
    eta_variant: Option<EtaVariant>,
    /// analytic | sampled:N
    #[arg(long)]
    mode: Option<ModeSpec>,
    /// csv | json | markdown
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Report destination (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Check theoretical bounds (on unless `--check-bounds=false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    check_bounds: Option<bool>,
}

impl RunArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            case: self.case,
            horizon: self.horizon,
            d: self.d,
            learners: self.learners.clone(),
            perm: self.perm,
            seed: self.seed,
            eta_variant: self.eta_variant,
            mode: self.mode,
            format: self.format,
            out: self.out.clone(),
            jobs: self.jobs,
            check_bounds: self.check_bounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Emit {
    Sequence,
    Class,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long = "T")]
    horizon: usize,
    /// Number of hypotheses (default max(1, T/2)).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = parse_case, default_value = "realizable")]
    case: CaseKind,
    /// What to print on stdout when --out-dir is not given.
    #[arg(long, value_enum, default_value = "sequence")]
    emit: Emit,
    /// Write class.json and sequence.csv into this directory instead.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs, and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let rendered = e.to_string();
            eprintln!(
                "{}",
                rendered
                    .lines()
                    .next()
                    .unwrap_or("error: invalid arguments")
            );
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Some(Command::Gen(args)) => gen(args).map(|_| EXIT_OK),
        None => run(&cli.run),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            EXIT_USAGE
        }
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let d = args.d.unwrap_or((args.horizon / 2).max(1));
    let case = ExperimentCase::new(args.case, args.horizon, d)?;
    let domain = make_domain(args.horizon);
    let class = make_threshold_class(d, &domain)?;
    let seq = label_sequence(&case, &domain);
    match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            write_output(Some(&dir.join("class.json")), &(class.to_json() + "\n"))?;
            write_output(Some(&dir.join("sequence.csv")), &seq.to_csv())
        }
        None => match args.emit {
            Emit::Sequence => write_output(None, &seq.to_csv()),
            Emit::Class => write_output(None, &(class.to_json() + "\n")),
        },
    }
}

/// `EXIT_BOUND_FAILED` if any verdict failed, `EXIT_OK` otherwise.
pub fn exit_code(entries: &[ReportEntry]) -> i32 {
    if entries.iter().all(ReportEntry::all_pass) {
        EXIT_OK
    } else {
        EXIT_BOUND_FAILED
    }
}

fn run(args: &RunArgs) -> anyhow::Result<i32> {
    let mut partial = args.partial();
    if let Some(path) = &args.config {
        partial = partial.or(PartialConfig::load(path)?);
    }
    let config = partial.resolve(std::env::var(SEED_ENV).ok())?;
    if args.dump_config {
        write_output(None, &config.to_json())?;
        return Ok(EXIT_OK);
    }

    let entries = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| run_experiment(&config))?,
        None => run_experiment(&config)?,
    };
    let report = emit_report(&entries, config.format)?;
    write_output(config.out.as_ref(), &report)?;

    Ok(exit_code(&entries))
}

/// Evaluates every configured learner on the configured case, in learner order.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<Vec<ReportEntry>> {
    config.validate()?;
    let case = ExperimentCase::new(config.case, config.horizon, config.d)?;
    let domain = make_domain(config.horizon);
    let class = make_threshold_class(config.d, &domain)?;
    let stream =
        PermutationStream::new(config.permutation_source(), label_sequence(&case, &domain))?;
    config
        .learners
        .iter()
        .map(|&kind| {
            let learner = LearnerConfig::with_eta(kind, config.eta_variant);
            let report = evaluate(learner, config.case, &class, &stream, config.run_mode())?;
            let verdicts = if config.check_bounds {
                check_bounds(&report, &class)
            } else {
                Vec::new()
            };
            Ok(ReportEntry { report, verdicts })
        })
        .collect()
}
