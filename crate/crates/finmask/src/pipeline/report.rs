//! Report stage: prediction records in, accuracy report out — a structured
//! JSON file plus a text table with the Overall / Value / Unit / per-scenario
//! columns, the scale-error census, and (when human labels are supplied) the
//! panel-agreement cross-tabulation.

use std::path::Path;

use anyhow::{bail, Context, Result};
use finmask_core::agreement::{
    agreement_report, fleiss_kappa, AgreementTable, HumanLabel, VoteLabel,
};
use finmask_core::score::{
    aggregate_scenarios, compute_report, scale_error_diagnostic, AccuracyReport,
    PredictionRecord, Scenario, ScaleErrorCount, ScenarioCriterion,
};
use serde::Serialize;

use crate::config::LoadedConfig;
use crate::records::{load_consensus, load_jsonl, load_predictions, write_atomic};

use super::StageManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportSummary {
    pub models: usize,
    pub records: usize,
    pub with_agreement: bool,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    accuracy: &'a AccuracyReport,
    scale_census: &'a [ScaleErrorCount],
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement: Option<&'a AgreementTable>,
    /// Fleiss' kappa over the panel votes; absent without human labels or
    /// when every voting task had an abstention.
    #[serde(skip_serializing_if = "Option::is_none")]
    panel_kappa: Option<f64>,
}

pub fn run_report(
    loaded: &LoadedConfig,
    human_labels: Option<&Path>,
    criterion: ScenarioCriterion,
) -> Result<ReportSummary> {
    let layout = loaded.layout();
    if loaded.config.evaluate.models.is_empty() {
        bail!("evaluate.models is empty; nothing to report on");
    }
    let mut records: Vec<PredictionRecord> = Vec::new();
    let mut inputs = Vec::new();
    for name in &loaded.config.evaluate.models {
        let path = layout.predictions(name);
        let model_records = load_predictions(&path).with_context(|| {
            format!("loading predictions for `{name}` (run `evaluate` first)")
        })?;
        records.extend(model_records);
        inputs.push(path);
    }

    let labels = aggregate_scenarios(&records);
    let lexicon = super::load_lexicon(loaded)?;
    let accuracy = compute_report(&records, &labels, criterion, &lexicon)
        .context("computing the accuracy report")?;
    let census = scale_error_diagnostic(&records, &lexicon);
    let (agreement, panel_kappa) = match human_labels {
        None => (None, None),
        Some(path) => {
            let consensus = load_consensus(&layout.consensus())
                .context("loading consensus results (run `annotate` first)")?;
            let humans: Vec<HumanLabel> = load_jsonl(path)
                .with_context(|| format!("loading human labels {}", path.display()))?;
            let table = agreement_report(&consensus, &humans)
                .context("cross-tabulating panel votes against human labels")?;
            // Kappa covers only tasks where every member cast a real vote;
            // a panel of abstainers contributes nothing to agreement.
            let counts: Vec<[u64; 2]> = consensus
                .iter()
                .filter_map(|c| {
                    let yes =
                        c.votes.iter().filter(|v| v.label == VoteLabel::Answerable).count();
                    let no =
                        c.votes.iter().filter(|v| v.label == VoteLabel::Unanswerable).count();
                    (yes + no == c.votes.len()).then_some([yes as u64, no as u64])
                })
                .collect();
            (Some(table), fleiss_kappa(&counts).ok())
        }
    };

    let file = ReportFile {
        accuracy: &accuracy,
        scale_census: &census,
        agreement: agreement.as_ref(),
        panel_kappa,
    };
    let json = serde_json::to_vec_pretty(&file)?;
    write_atomic(&layout.report_json(), &json).context("writing report.json")?;
    let text = render_text_report(&accuracy, &census, agreement.as_ref(), panel_kappa);
    write_atomic(&layout.report_text(), text.as_bytes()).context("writing report.txt")?;

    let mut manifest = StageManifest::new("report", loaded);
    for path in &inputs {
        manifest.record_input(path)?;
    }
    if let Some(path) = human_labels {
        manifest.record_input(path)?;
    }
    manifest.record_output(&layout.report_json())?;
    manifest.record_output(&layout.report_text())?;
    manifest.count("records", records.len() as u64);
    manifest.count("models", accuracy.models.len() as u64);
    manifest.write(&layout)?;

    Ok(ReportSummary {
        models: accuracy.models.len(),
        records: records.len(),
        with_agreement: agreement.is_some(),
    })
}

fn pct(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

/// Formats the accuracy table, the scale-error census, and the optional
/// agreement table as aligned plain text.
pub fn render_text_report(
    accuracy: &AccuracyReport,
    census: &[ScaleErrorCount],
    agreement: Option<&AgreementTable>,
    panel_kappa: Option<f64>,
) -> String {
    let criterion = match accuracy.criterion {
        ScenarioCriterion::Overall => "overall",
        ScenarioCriterion::Value => "value",
    };
    let mut head = vec![
        "model".to_string(),
        "n".to_string(),
        "overall".to_string(),
        "value".to_string(),
        "unit".to_string(),
        "corrected".to_string(),
    ];
    for s in Scenario::ALL {
        head.push(format!("{s}"));
    }
    let mut rows = vec![head];
    for m in &accuracy.models {
        let mut row = vec![
            m.model_name.clone(),
            m.n.to_string(),
            pct(m.overall_acc()),
            pct(m.value_acc()),
            pct(m.unit_acc()),
            pct(m.scale_corrected_value_acc()),
        ];
        for s in Scenario::ALL {
            row.push(match m.per_scenario.get(&s) {
                Some(c) if c.n > 0 => format!("{} ({})", pct(c.accuracy()), c.n),
                _ => "-".to_string(),
            });
        }
        rows.push(row);
    }
    let mut out = String::new();
    out.push_str(&format!("Model accuracy (scenario criterion: {criterion})\n"));
    out.push_str(&render_columns(&rows));

    out.push_str("\nScale-error census\n");
    let mut rows = vec![vec![
        "model".to_string(),
        "n".to_string(),
        "value-correct".to_string(),
        "scale-errors".to_string(),
        "raw".to_string(),
        "corrected".to_string(),
        "gap".to_string(),
    ]];
    for c in census {
        let raw = c.value_correct as f64 / c.n as f64;
        let corrected = c.corrected_value_correct() as f64 / c.n as f64;
        rows.push(vec![
            c.model_name.clone(),
            c.n.to_string(),
            c.value_correct.to_string(),
            c.scale_errors.to_string(),
            pct(raw),
            pct(corrected),
            format!("{:+.1} pts", (corrected - raw) * 100.0),
        ]);
    }
    out.push_str(&render_columns(&rows));

    if let Some(table) = agreement {
        out.push_str(&format!("\nPanel agreement ({} raters, {} tasks)\n", table.panel_size, table.total_tasks()));
        let mut rows = vec![vec![
            "votes".to_string(),
            "human yes".to_string(),
            "human no".to_string(),
        ]];
        for row in &table.rows {
            let label = if row.yes_votes == table.panel_size {
                format!("{} Yes", table.panel_size)
            } else if row.yes_votes == 0 {
                format!("{} No", table.panel_size)
            } else {
                format!("{} Yes, {} No", row.yes_votes, table.panel_size - row.yes_votes)
            };
            rows.push(vec![label, row.human_yes.to_string(), row.human_no.to_string()]);
        }
        out.push_str(&render_columns(&rows));
        if let Some(r) = &table.unanimous_yes_precision {
            out.push_str(&format!(
                "unanimous-yes precision: {r} ({})\n",
                pct(r.as_f64())
            ));
        }
        if let Some(r) = &table.unanimous_no_precision {
            out.push_str(&format!(
                "unanimous-no precision:  {r} ({})\n",
                pct(r.as_f64())
            ));
        }
        if let Some(kappa) = panel_kappa {
            out.push_str(&format!("Fleiss' kappa: {kappa:.4}\n"));
        }
    }
    out
}

/// Left-aligns the first column and right-aligns the rest, two spaces apart.
fn render_columns(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if i == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[i]));
            } else {
                line.push_str(&format!("{:>width$}", cell, width = widths[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use finmask_core::agreement::{AgreementRow, Ratio};
    use finmask_core::score::{ModelReport, StratumCount};
    use std::collections::BTreeMap;

    #[test]
    fn text_report_renders_all_sections() {
        let mut per_scenario = BTreeMap::new();
        per_scenario.insert(Scenario::A, StratumCount { correct: 9, n: 10 });
        per_scenario.insert(Scenario::B, StratumCount { correct: 1, n: 2 });
        let accuracy = AccuracyReport {
            criterion: ScenarioCriterion::Overall,
            models: vec![ModelReport {
                model_name: "subject".into(),
                n: 12,
                value_correct: 10,
                unit_correct: 11,
                overall_correct: 10,
                scale_errors: 1,
                per_scenario,
            }],
        };
        let census = vec![ScaleErrorCount {
            model_name: "subject".into(),
            n: 12,
            value_correct: 10,
            scale_errors: 1,
        }];
        let agreement = AgreementTable {
            panel_size: 3,
            rows: vec![
                AgreementRow { yes_votes: 3, human_yes: 276, human_no: 11 },
                AgreementRow { yes_votes: 2, human_yes: 12, human_no: 23 },
                AgreementRow { yes_votes: 1, human_yes: 11, human_no: 164 },
                AgreementRow { yes_votes: 0, human_yes: 1, human_no: 626 },
            ],
            unanimous_yes_precision: Some(Ratio { numerator: 276, denominator: 287 }),
            unanimous_no_precision: Some(Ratio { numerator: 626, denominator: 627 }),
        };
        let text = render_text_report(&accuracy, &census, Some(&agreement), Some(0.5132));
        assert!(text.contains("Model accuracy (scenario criterion: overall)"));
        assert!(text.contains("90.0% (10)"), "scenario A cell missing:\n{text}");
        assert!(text.contains("Scale-error census"));
        assert!(text.contains("+8.3 pts"));
        assert!(text.contains("3 Yes"));
        assert!(text.contains("2 Yes, 1 No"));
        assert!(text.contains("unanimous-yes precision: 276/287 (96.2%)"));
        assert!(text.contains("Fleiss' kappa: 0.5132"));
        assert!(text.contains("unanimous-no precision:  626/627 (99.8%)"));
        // Scenario D has no stratum: rendered as "-".
        assert!(text.lines().any(|l| l.trim_end().ends_with('-')));
    }
}
