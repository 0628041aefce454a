mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::{CliError, Format};

#[derive(Parser)]
#[command(name = "fria", version, about = "Fundamental-rights impact assessments for high-risk AI systems")]
struct Cli {
    /// Member state whose rules apply (ISO code, e.g. IE).
    #[arg(long, global = true)]
    jurisdiction: Option<String>,
    /// Directory with catalog files; missing files fall back to the built-in seed.
    #[arg(long, global = true, value_name = "DIR")]
    catalog: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Where to write the produced document. Commands that update an
    /// assessment rewrite the input file when this is not given.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Name recorded in the audit log.
    #[arg(long, global = true, default_value = "cli")]
    actor: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stage 1: decide FRIA and DPIA necessity for a system profile.
    Check {
        profile: PathBuf,
        /// Id of the assessment written with --out.
        #[arg(long, default_value = "assessment")]
        id: String,
    },
    /// Stage 2: reuse a DPIA to prefill the FRIA.
    ImportDpia { assessment: PathBuf, dpia: PathBuf },
    /// Mark the DPIA stage as not applicable.
    SkipDpia { assessment: PathBuf },
    /// Show FRIA fields that still need an answer.
    Gaps { assessment: PathBuf },
    /// Stage 3: apply an answers file and list the questions left.
    Assess { assessment: PathBuf, answers: PathBuf },
    #[command(subcommand)]
    Risks(RisksCommand),
    #[command(subcommand)]
    Impacts(ImpactsCommand),
    #[command(subcommand)]
    Report(ReportCommand),
    /// Build a notification payload for an issued report.
    Notify(NotifyArgs),
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory of the revision store.
        #[arg(long, default_value = "fria-data")]
        data: PathBuf,
        /// Require `Authorization: Bearer <token>` on every request.
        #[arg(long, env = "FRIA_TOKEN")]
        token: Option<String>,
    },
    /// Write the passport-control example inputs to a directory.
    Demo { dir: PathBuf },
}

#[derive(Subcommand)]
enum RisksCommand {
    /// Add or replace risks from a file, score them and apply mitigations.
    Score {
        assessment: PathBuf,
        risks: Option<PathBuf>,
        /// Also add the suggested candidate risks.
        #[arg(long)]
        suggest: bool,
    },
}

#[derive(Subcommand)]
enum ImpactsCommand {
    /// Stage 4: close information gathering if needed and derive impacts.
    Derive {
        assessment: PathBuf,
        /// Per-impact status and adopted remedies; stage 4 closes once no impact is open.
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Stage 5: compile the report and record its issue in the assessment.
    Compile { assessment: PathBuf },
}

#[derive(Args)]
struct NotifyArgs {
    report: PathBuf,
    /// Only dry runs exist: nothing is transmitted.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, value_enum, default_value_t = Mode::SelfAssessment)]
    mode: Mode,
    #[arg(long)]
    authority: Option<String>,
    #[arg(long)]
    submitter_id: String,
    #[arg(long)]
    submitter_name: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    MarketSurveillance,
    SelfAssessment,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Check catalog files against their schema and consistency rules.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Count rules per outcome.
    Tally {
        #[arg(long, default_value = "annex3")]
        source: String,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let format = cli.format;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::print_error(format, &e);
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
