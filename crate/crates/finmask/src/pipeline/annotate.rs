//! Annotate stage: every panel model labels every task's masked span as
//! answerable or unanswerable from the same context the evaluated models
//! will see. A task is retained only on a unanimous answerable verdict; a
//! panelist that never yields a valid reply abstains, which blocks
//! unanimity.

use anyhow::{bail, Context, Result};
use finmask_core::agreement::{consensus, AnnotationVerdict, VoteLabel};

use crate::config::LoadedConfig;
use crate::gateway::{
    render_answerability_prompt, render_tables, tag_span, validate_answerability, ModelClient,
};
use crate::records::{load_benchmark, write_benchmark, write_jsonl};

use super::{FailureRecord, StageManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotateSummary {
    pub tasks: usize,
    pub retained: usize,
    pub abstentions: usize,
    /// Transport calls per panel model, in panel order.
    pub transport_calls: u64,
}

pub fn run_annotate(loaded: &LoadedConfig) -> Result<AnnotateSummary> {
    let layout = loaded.layout();
    let (header, mut tasks) =
        load_benchmark(&layout.benchmark()).context("loading benchmark (run `build` first)")?;
    let panel_names = &loaded.config.annotate.panel;
    if panel_names.is_empty() {
        bail!("annotate.panel is empty; list at least one model");
    }
    let cache_dir = loaded.cache_dir();
    let panel: Vec<ModelClient> = panel_names
        .iter()
        .map(|name| super::build_model(name, &loaded.config.models[name], &cache_dir, None))
        .collect::<Result<_>>()?;

    let mut verdicts: Vec<AnnotationVerdict> = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    for task in &tasks {
        let tagged = tag_span(task);
        let tables = render_tables(&task.context.tables);
        let pre = task.context.prev_sentence.as_ref().map(|s| s.text.as_str()).unwrap_or("");
        let post = task.context.next_sentence.as_ref().map(|s| s.text.as_str()).unwrap_or("");
        let prompt =
            render_answerability_prompt(&tables, &task.filing_date, pre, &tagged, post)
                .with_context(|| format!("rendering answerability prompt for {}", task.task_id))?;
        for client in &panel {
            let outcome = client
                .query(&prompt.rendered_text, |v| validate_answerability(v, &task.ground_truth));
            let (label, reasoning) = match outcome {
                Ok(q) => {
                    let label = match q.reply.label.as_str() {
                        "answerable" => VoteLabel::Answerable,
                        _ => VoteLabel::Unanswerable,
                    };
                    (label, q.reply.reasoning)
                }
                Err(e) if e.is_exhaustion() => {
                    failures.push(FailureRecord {
                        task_id: task.task_id.clone(),
                        model_name: client.model_name().to_string(),
                        error: e.to_string(),
                    });
                    (VoteLabel::Abstain, String::new())
                }
                Err(e) => {
                    return Err(e).with_context(|| {
                        format!(
                            "panel model `{}` failed on task {}",
                            client.model_name(),
                            task.task_id
                        )
                    })
                }
            };
            verdicts.push(AnnotationVerdict {
                task_id: task.task_id.clone(),
                model_name: client.model_name().to_string(),
                label,
                reasoning,
            });
        }
    }

    verdicts.sort_by(|a, b| {
        (a.task_id.as_str(), a.model_name.as_str()).cmp(&(b.task_id.as_str(), b.model_name.as_str()))
    });
    let results = consensus(verdicts.clone());
    let retained = results.iter().filter(|r| r.retained).count();
    for task in &mut tasks {
        task.answerability =
            results.iter().find(|r| r.task_id == task.task_id).cloned();
    }

    write_jsonl(&layout.annotations(), &verdicts).context("writing annotation verdicts")?;
    write_jsonl(&layout.consensus(), &results).context("writing consensus results")?;
    write_benchmark(&layout.annotated_benchmark(), &header, &tasks)
        .context("writing annotated benchmark")?;
    let abstentions = super::write_failures(&layout, "annotate", failures)?;

    let mut manifest = StageManifest::new("annotate", loaded);
    manifest.record_input(&layout.benchmark())?;
    manifest.record_output(&layout.annotations())?;
    manifest.record_output(&layout.consensus())?;
    manifest.record_output(&layout.annotated_benchmark())?;
    manifest.count("tasks", tasks.len() as u64);
    manifest.count("retained", retained as u64);
    manifest.count("abstentions", abstentions as u64);
    manifest.write(&layout)?;

    Ok(AnnotateSummary {
        tasks: tasks.len(),
        retained,
        abstentions,
        transport_calls: panel.iter().map(|c| c.transport_calls()).sum(),
    })
}
