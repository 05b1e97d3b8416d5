//! Evaluate stage: each configured model predicts every retained task's
//! masked span; answers are scored with the precision-relaxed matcher. A
//! model that never produces parseable JSON for a task is recorded as a
//! failed prediction after the full retry budget (incorrect everywhere),
//! not dropped.

use anyhow::{bail, Context, Result};
use finmask_core::matcher::match_spans;
use finmask_core::score::{PredictionRecord, Scenario};
use finmask_core::task::TaskInstance;
use finmask_core::UnitLexicon;
use rayon::prelude::*;

use crate::config::LoadedConfig;
use crate::gateway::{
    render_prediction_prompt, validate_prediction, ModelClient, MAX_ATTEMPTS,
};
use crate::records::{load_benchmark, write_jsonl};

use super::{FailureRecord, StageManifest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluateSummary {
    pub retained_tasks: usize,
    /// (model name, records written, transport calls) per evaluated model.
    pub models: Vec<(String, usize, u64)>,
    pub failures: usize,
}

pub fn run_evaluate(loaded: &LoadedConfig) -> Result<EvaluateSummary> {
    let layout = loaded.layout();
    let (_, tasks) = load_benchmark(&layout.annotated_benchmark())
        .context("loading annotated benchmark (run `annotate` first)")?;
    if tasks.iter().any(|t| t.answerability.is_none()) {
        bail!(
            "benchmark at {} has tasks without consensus labels; run `annotate`",
            layout.annotated_benchmark().display()
        );
    }
    let model_names = &loaded.config.evaluate.models;
    if model_names.is_empty() {
        bail!("evaluate.models is empty; list at least one model");
    }

    let mut retained: Vec<&TaskInstance> = tasks
        .iter()
        .filter(|t| t.answerability.as_ref().is_some_and(|c| c.retained))
        .collect();
    retained.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    let lexicon = super::load_lexicon(loaded)?;
    let cache_dir = loaded.cache_dir();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(loaded.config.evaluate.concurrency)
        .build()
        .context("building evaluation thread pool")?;

    let mut manifest = StageManifest::new("evaluate", loaded);
    manifest.record_input(&layout.annotated_benchmark())?;
    let mut models = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    for name in model_names {
        let client = super::build_model(
            name,
            &loaded.config.models[name],
            &cache_dir,
            Some(&tasks),
        )?;
        let outcomes: Vec<(PredictionRecord, Option<FailureRecord>)> = pool.install(|| {
            retained
                .par_iter()
                .map(|task| predict_one(&client, task, &lexicon))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut records: Vec<PredictionRecord> = Vec::with_capacity(outcomes.len());
        for (record, failure) in outcomes {
            records.push(record);
            failures.extend(failure);
        }
        records.sort_by(|a, b| a.task_id.cmp(&b.task_id));
        let path = layout.predictions(name);
        write_jsonl(&path, &records)
            .with_context(|| format!("writing predictions for `{name}`"))?;
        manifest.record_output(&path)?;
        manifest.count(&format!("records_{name}"), records.len() as u64);
        models.push((name.clone(), records.len(), client.transport_calls()));
    }
    let failure_count = super::write_failures(&layout, "evaluate", failures)?;
    manifest.count("retained_tasks", retained.len() as u64);
    manifest.count("failures", failure_count as u64);
    manifest.write(&layout)?;

    Ok(EvaluateSummary { retained_tasks: retained.len(), models, failures: failure_count })
}

fn predict_one(
    client: &ModelClient,
    task: &TaskInstance,
    lexicon: &UnitLexicon,
) -> Result<(PredictionRecord, Option<FailureRecord>)> {
    let prompt = render_prediction_prompt(task)
        .with_context(|| format!("rendering prediction prompt for {}", task.task_id))?;
    match client.query(&prompt.rendered_text, validate_prediction) {
        Ok(outcome) => {
            let reply = outcome.reply;
            let scenario = match reply.scenario.as_str() {
                "A" => Some(Scenario::A),
                "B" => Some(Scenario::B),
                "C" => Some(Scenario::C),
                "D" => Some(Scenario::D),
                _ => None,
            };
            let match_result = match_spans(&task.ground_truth, &reply.answer, lexicon);
            Ok((
                PredictionRecord {
                    task_id: task.task_id.clone(),
                    model_name: client.model_name().to_string(),
                    ground_truth: task.ground_truth.clone(),
                    answer_text: reply.answer,
                    self_scenario: scenario,
                    necessary_metrics: reply.necessary_metrics,
                    references: reply.references,
                    attempts: outcome.attempt,
                    match_result,
                },
                None,
            ))
        }
        Err(e) if e.is_exhaustion() => {
            // Scored as a failed prediction: empty answer never matches.
            let match_result = match_spans(&task.ground_truth, "", lexicon);
            Ok((
                PredictionRecord {
                    task_id: task.task_id.clone(),
                    model_name: client.model_name().to_string(),
                    ground_truth: task.ground_truth.clone(),
                    answer_text: String::new(),
                    self_scenario: None,
                    necessary_metrics: Vec::new(),
                    references: Vec::new(),
                    attempts: MAX_ATTEMPTS,
                    match_result,
                },
                Some(FailureRecord {
                    task_id: task.task_id.clone(),
                    model_name: client.model_name().to_string(),
                    error: e.to_string(),
                }),
            ))
        }
        Err(e) => Err(e).with_context(|| {
            format!("model `{}` failed on task {}", client.model_name(), task.task_id)
        }),
    }
}
