//! Command-line interface. All pipeline subcommands are driven by one config
//! file for reproducibility; flags cover only per-invocation choices.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use finmask_core::matcher::match_spans;
use finmask_core::score::ScenarioCriterion;

use crate::config::LoadedConfig;
use crate::lexfile;
use crate::pipeline;

#[derive(Parser)]
#[command(
    name = "finmask",
    version,
    about = "Build masked-number benchmarks from financial filings and score model predictions"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse filings into sentence and table record files.
    Ingest(ConfigArg),
    /// Detect, sample, and mask numeric spans into a benchmark file.
    Build(ConfigArg),
    /// Label each task with the answerability panel and keep unanimous tasks.
    Annotate(ConfigArg),
    /// Run every configured model over the retained tasks and score answers.
    Evaluate(ConfigArg),
    /// Aggregate prediction records into accuracy and diagnostic reports.
    Report {
        #[command(flatten)]
        config: ConfigArg,
        /// Human adjudications (JSONL of {task_id, label, annotator_id}) for
        /// the panel-agreement table.
        #[arg(long)]
        human_labels: Option<PathBuf>,
        /// Correctness criterion for per-scenario strata.
        #[arg(long, value_enum, default_value_t = CriterionArg::Overall)]
        criterion: CriterionArg,
    },
    /// Match one prediction against one ground truth and print the verdict.
    Match {
        ground_truth: String,
        prediction: String,
        /// Unit lexicon file; the built-in default when absent.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct ConfigArg {
    /// Pipeline configuration file.
    #[arg(long, default_value = "pipeline.toml")]
    config: PathBuf,
}

impl ConfigArg {
    fn load(&self) -> Result<LoadedConfig> {
        LoadedConfig::load(&self.config)
            .with_context(|| format!("loading config {}", self.config.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Overall,
    Value,
}

impl From<CriterionArg> for ScenarioCriterion {
    fn from(c: CriterionArg) -> ScenarioCriterion {
        match c {
            CriterionArg::Overall => ScenarioCriterion::Overall,
            CriterionArg::Value => ScenarioCriterion::Value,
        }
    }
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest(config) => {
            let loaded = config.load()?;
            let summary = pipeline::ingest::run_ingest(&loaded)?;
            println!(
                "ingested {} documents: {} sentences, {} tables -> {}",
                summary.documents,
                summary.sentences,
                summary.tables,
                loaded.output_dir().display()
            );
        }
        Command::Build(config) => {
            let loaded = config.load()?;
            let summary = pipeline::build::run_build(&loaded)?;
            println!(
                "built {} tasks from {} sampled sentences across {} documents -> {}",
                summary.tasks,
                summary.sampled_sentences,
                summary.documents,
                loaded.layout().benchmark().display()
            );
        }
        Command::Annotate(config) => {
            let loaded = config.load()?;
            let summary = pipeline::annotate::run_annotate(&loaded)?;
            println!(
                "annotated {} tasks: {} retained, {} abstentions -> {}",
                summary.tasks,
                summary.retained,
                summary.abstentions,
                loaded.layout().annotated_benchmark().display()
            );
        }
        Command::Evaluate(config) => {
            let loaded = config.load()?;
            let summary = pipeline::evaluate::run_evaluate(&loaded)?;
            for (model, records, calls) in &summary.models {
                println!(
                    "evaluated `{model}`: {records} records over {} tasks ({calls} transport calls)",
                    summary.retained_tasks
                );
            }
            if summary.failures > 0 {
                println!("{} predictions failed after retries; see failures/", summary.failures);
            }
        }
        Command::Report { config, human_labels, criterion } => {
            let loaded = config.load()?;
            let summary =
                pipeline::report::run_report(&loaded, human_labels.as_deref(), criterion.into())?;
            println!(
                "reported on {} records from {} models -> {}",
                summary.records,
                summary.models,
                loaded.layout().report_text().display()
            );
            let text = std::fs::read_to_string(loaded.layout().report_text())?;
            println!("\n{text}");
        }
        Command::Match { ground_truth, prediction, lexicon } => {
            let lexicon = match lexicon {
                None => lexfile::default_lexicon(),
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading lexicon {}", path.display()))?;
                    lexfile::parse_lexicon(&text)
                        .with_context(|| format!("parsing lexicon {}", path.display()))?
                }
            };
            let result = match_spans(&ground_truth, &prediction, &lexicon);
            println!("{}", serde_json::to_string_pretty(&result)?);
        }
    }
    Ok(())
}
