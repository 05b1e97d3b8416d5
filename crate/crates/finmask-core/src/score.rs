//! Scoring: scenario aggregation across models, stratified accuracy reports,
//! and the scale-error census.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lexicon::UnitLexicon;
use crate::matcher::{normalize_number, MatchResult};

/// Reasoning scenario a task demands, simplest to hardest: direct lookup,
/// comparative calculation, bivariate calculation, multivariate calculation.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Scenario {
    A,
    B,
    C,
    D,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::A, Scenario::B, Scenario::C, Scenario::D];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
            Scenario::D => "D",
        })
    }
}

/// One model's scored answer for one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task_id: String,
    pub model_name: String,
    /// Carried alongside the answer so records re-score without the benchmark.
    pub ground_truth: String,
    pub answer_text: String,
    /// Absent when the model never produced parseable JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub necessary_metrics: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
    pub attempts: u32,
    #[serde(rename = "match")]
    pub match_result: MatchResult,
}

/// The scenario a task settles on after polling every model that got it
/// right. `label` is `None` when no model answered correctly (unresolved);
/// such tasks are excluded from scenario-stratified denominators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioLabel {
    pub task_id: String,
    pub label: Option<Scenario>,
    /// Number of correct models that voted for `label`.
    pub support: u32,
}

/// Aggregates self-declared scenarios across models: for each task, the modal
/// scenario among models whose match is an overall success; ties go to the
/// simpler scenario (A before B before C before D).
pub fn aggregate_scenarios(records: &[PredictionRecord]) -> Vec<ScenarioLabel> {
    let mut votes: BTreeMap<&str, BTreeMap<Scenario, u32>> = BTreeMap::new();
    for r in records {
        let tally = votes.entry(r.task_id.as_str()).or_default();
        if r.match_result.overall {
            if let Some(s) = r.self_scenario {
                *tally.entry(s).or_insert(0) += 1;
            }
        }
    }
    votes
        .into_iter()
        .map(|(task_id, tally)| {
            let mut label = None;
            let mut support = 0u32;
            for s in Scenario::ALL {
                let count = tally.get(&s).copied().unwrap_or(0);
                if count > support {
                    support = count;
                    label = Some(s);
                }
            }
            ScenarioLabel { task_id: String::from(task_id), label, support }
        })
        .collect()
}

/// Whether per-scenario correctness counts full matches or numeric-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioCriterion {
    Overall,
    Value,
}

/// Exact correct/total counts for one stratum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumCount {
    pub correct: u64,
    pub n: u64,
}

impl StratumCount {
    pub fn accuracy(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.correct as f64 / self.n as f64
        }
    }
}

/// Accuracy breakdown for one model, kept as exact integer counts; the
/// fractional accuracies are derived views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_name: String,
    pub n: u64,
    pub value_correct: u64,
    pub unit_correct: u64,
    pub overall_correct: u64,
    /// Records whose numeric match fails only by magnitude (see
    /// [`is_scale_error`]).
    pub scale_errors: u64,
    pub per_scenario: BTreeMap<Scenario, StratumCount>,
}

impl ModelReport {
    pub fn value_acc(&self) -> f64 {
        self.value_correct as f64 / self.n as f64
    }

    pub fn unit_acc(&self) -> f64 {
        self.unit_correct as f64 / self.n as f64
    }

    pub fn overall_acc(&self) -> f64 {
        self.overall_correct as f64 / self.n as f64
    }

    /// Value accuracy counting scale errors as correct.
    pub fn scale_corrected_value_acc(&self) -> f64 {
        (self.value_correct + self.scale_errors) as f64 / self.n as f64
    }
}

/// Per-model accuracy reports over one record set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub criterion: ScenarioCriterion,
    /// Sorted by model name.
    pub models: Vec<ModelReport>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreError {
    EmptyEvaluation,
}

impl fmt::Display for ScoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreError::EmptyEvaluation => f.write_str("no prediction records to score"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ScoreError {}

/// Builds the per-model accuracy report. Scenario strata cover only tasks
/// with a resolved label; per-stratum correctness follows `criterion`.
pub fn compute_report(
    records: &[PredictionRecord],
    labels: &[ScenarioLabel],
    criterion: ScenarioCriterion,
    lexicon: &UnitLexicon,
) -> Result<AccuracyReport, ScoreError> {
    if records.is_empty() {
        return Err(ScoreError::EmptyEvaluation);
    }
    let label_of: BTreeMap<&str, Scenario> = labels
        .iter()
        .filter_map(|l| l.label.map(|s| (l.task_id.as_str(), s)))
        .collect();
    let mut by_model: BTreeMap<&str, Vec<&PredictionRecord>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model_name.as_str()).or_default().push(r);
    }
    let models = by_model
        .into_iter()
        .map(|(model_name, rs)| {
            let mut report = ModelReport {
                model_name: String::from(model_name),
                n: rs.len() as u64,
                value_correct: 0,
                unit_correct: 0,
                overall_correct: 0,
                scale_errors: 0,
                per_scenario: BTreeMap::new(),
            };
            for r in rs {
                let m = &r.match_result;
                report.value_correct += u64::from(m.is_numeric_match);
                report.unit_correct += u64::from(m.is_unit_match);
                report.overall_correct += u64::from(m.overall);
                report.scale_errors +=
                    u64::from(is_scale_error(&r.ground_truth, &r.answer_text, m, lexicon));
                if let Some(&scenario) = label_of.get(r.task_id.as_str()) {
                    let stratum = report.per_scenario.entry(scenario).or_default();
                    stratum.n += 1;
                    let correct = match criterion {
                        ScenarioCriterion::Overall => m.overall,
                        ScenarioCriterion::Value => m.is_numeric_match,
                    };
                    stratum.correct += u64::from(correct);
                }
            }
            report
        })
        .collect();
    Ok(AccuracyReport { criterion, models })
}

/// A failed numeric match that succeeds once both sides are stripped of
/// their scale factors: the literals agree at the coarser literal precision,
/// so only the magnitude was wrong ("$150" for "$150 million").
pub fn is_scale_error(
    ground_truth: &str,
    prediction: &str,
    outcome: &MatchResult,
    lexicon: &UnitLexicon,
) -> bool {
    if outcome.is_numeric_match {
        return false;
    }
    let (Ok(t), Ok(p)) =
        (normalize_number(ground_truth, lexicon), normalize_number(prediction, lexicon))
    else {
        return false;
    };
    let coarser = t.unscaled_precision().max(p.unscaled_precision());
    match (
        t.unscaled_value().div_round_half_away(&coarser),
        p.unscaled_value().div_round_half_away(&coarser),
    ) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Scale-error tallies for one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleErrorCount {
    pub model_name: String,
    pub n: u64,
    pub value_correct: u64,
    pub scale_errors: u64,
}

impl ScaleErrorCount {
    pub fn corrected_value_correct(&self) -> u64 {
        self.value_correct + self.scale_errors
    }
}

/// Census of scale errors per model over a record set.
pub fn scale_error_diagnostic(
    records: &[PredictionRecord],
    lexicon: &UnitLexicon,
) -> Vec<ScaleErrorCount> {
    let mut by_model: BTreeMap<&str, ScaleErrorCount> = BTreeMap::new();
    for r in records {
        let entry = by_model.entry(r.model_name.as_str()).or_insert_with(|| ScaleErrorCount {
            model_name: r.model_name.clone(),
            n: 0,
            value_correct: 0,
            scale_errors: 0,
        });
        entry.n += 1;
        entry.value_correct += u64::from(r.match_result.is_numeric_match);
        entry.scale_errors += u64::from(is_scale_error(
            &r.ground_truth,
            &r.answer_text,
            &r.match_result,
            lexicon,
        ));
    }
    by_model.into_values().collect()
}
