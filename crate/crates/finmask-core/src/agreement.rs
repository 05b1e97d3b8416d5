//! Panel consensus over answerability votes and agreement statistics.
//!
//! A task survives into the benchmark only when every panel member votes
//! answerable; an abstention (a member that exhausted its retries) counts
//! against retention. Agreement against human adjudication is reported as a
//! vote-pattern table with exact precision ratios for the unanimous rows,
//! plus Fleiss' kappa over the rater-item matrix.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// One panel member's answerability vote for one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteLabel {
    Answerable,
    Unanswerable,
    /// Recorded when a panel member never produced a usable verdict.
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationVerdict {
    pub task_id: String,
    pub model_name: String,
    pub label: VoteLabel,
    #[serde(default)]
    pub reasoning: String,
}

/// All votes for one task and the unanimity outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusResult {
    pub task_id: String,
    pub votes: Vec<AnnotationVerdict>,
    /// True iff every vote is `Answerable`.
    pub retained: bool,
}

/// Folds verdicts into per-task consensus. Votes are grouped by task id and
/// ordered by model name, so the result is independent of input order.
pub fn consensus(verdicts: Vec<AnnotationVerdict>) -> Vec<ConsensusResult> {
    let mut by_task: BTreeMap<String, Vec<AnnotationVerdict>> = BTreeMap::new();
    for v in verdicts {
        by_task.entry(v.task_id.clone()).or_default().push(v);
    }
    by_task
        .into_iter()
        .map(|(task_id, mut votes)| {
            votes.sort_by(|a, b| a.model_name.cmp(&b.model_name));
            let retained =
                !votes.is_empty() && votes.iter().all(|v| v.label == VoteLabel::Answerable);
            ConsensusResult { task_id, votes, retained }
        })
        .collect()
}

/// A human adjudication for one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanLabel {
    pub task_id: String,
    pub label: VoteLabel,
    #[serde(default)]
    pub annotator_id: String,
}

/// An exact fraction, kept unreduced so "276 of 287" survives as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// One vote pattern (how many members said yes) against human labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub yes_votes: usize,
    pub human_yes: u64,
    pub human_no: u64,
}

/// Cross-tabulation of panel vote patterns with human adjudication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementTable {
    pub panel_size: usize,
    /// Rows ordered from unanimous-yes down to unanimous-no.
    pub rows: Vec<AgreementRow>,
    /// Of tasks every member called answerable, the fraction humans agreed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unanimous_yes_precision: Option<Ratio>,
    /// Of tasks every member called unanswerable, the fraction humans agreed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unanimous_no_precision: Option<Ratio>,
}

impl AgreementTable {
    pub fn total_tasks(&self) -> u64 {
        self.rows.iter().map(|r| r.human_yes + r.human_no).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgreementError {
    /// Consensus and human label files do not cover the same task ids.
    JoinError { missing_human: usize, missing_consensus: usize },
    /// A task id appears more than once in the human labels.
    DuplicateHumanLabel(String),
    /// A human label must be answerable or unanswerable, never abstain.
    BadHumanLabel(String),
    /// Panel sizes differ between tasks.
    InconsistentPanel,
    NoTasks,
}

impl fmt::Display for AgreementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgreementError::JoinError { missing_human, missing_consensus } => write!(
                f,
                "task ids do not line up: {missing_human} without human labels, \
                 {missing_consensus} without consensus"
            ),
            AgreementError::DuplicateHumanLabel(id) => {
                write!(f, "duplicate human label for task `{id}`")
            }
            AgreementError::BadHumanLabel(id) => {
                write!(f, "human label for task `{id}` must not be abstain")
            }
            AgreementError::InconsistentPanel => f.write_str("panel sizes differ between tasks"),
            AgreementError::NoTasks => f.write_str("no tasks to tabulate"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AgreementError {}

/// Cross-tabulates consensus vote patterns against human labels.
pub fn agreement_report(
    consensus_results: &[ConsensusResult],
    human_labels: &[HumanLabel],
) -> Result<AgreementTable, AgreementError> {
    if consensus_results.is_empty() {
        return Err(AgreementError::NoTasks);
    }
    let mut human: BTreeMap<&str, bool> = BTreeMap::new();
    for label in human_labels {
        let answerable = match label.label {
            VoteLabel::Answerable => true,
            VoteLabel::Unanswerable => false,
            VoteLabel::Abstain => {
                return Err(AgreementError::BadHumanLabel(label.task_id.clone()))
            }
        };
        if human.insert(&label.task_id, answerable).is_some() {
            return Err(AgreementError::DuplicateHumanLabel(label.task_id.clone()));
        }
    }
    let missing_human = consensus_results
        .iter()
        .filter(|c| !human.contains_key(c.task_id.as_str()))
        .count();
    let covered: usize = consensus_results
        .iter()
        .filter(|c| human.contains_key(c.task_id.as_str()))
        .count();
    let missing_consensus = human.len() - covered;
    if missing_human > 0 || missing_consensus > 0 {
        return Err(AgreementError::JoinError { missing_human, missing_consensus });
    }
    let panel_size = consensus_results[0].votes.len();
    if consensus_results.iter().any(|c| c.votes.len() != panel_size) {
        return Err(AgreementError::InconsistentPanel);
    }
    let mut rows: Vec<AgreementRow> = (0..=panel_size)
        .rev()
        .map(|yes_votes| AgreementRow { yes_votes, human_yes: 0, human_no: 0 })
        .collect();
    for c in consensus_results {
        let yes =
            c.votes.iter().filter(|v| v.label == VoteLabel::Answerable).count();
        let row = &mut rows[panel_size - yes];
        if human[c.task_id.as_str()] {
            row.human_yes += 1;
        } else {
            row.human_no += 1;
        }
    }
    let precision = |row: &AgreementRow, want_yes: bool| {
        let total = row.human_yes + row.human_no;
        if total == 0 {
            None
        } else {
            Some(Ratio {
                numerator: if want_yes { row.human_yes } else { row.human_no },
                denominator: total,
            })
        }
    };
    let unanimous_yes_precision = precision(&rows[0], true);
    let unanimous_no_precision = precision(&rows[panel_size], false);
    Ok(AgreementTable { panel_size, rows, unanimous_yes_precision, unanimous_no_precision })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KappaError {
    NoItems,
    /// Fewer than two raters, or rows with differing rater counts.
    BadRaterCount,
    /// Chance agreement is total and observed agreement is not perfect.
    Degenerate,
}

impl fmt::Display for KappaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaError::NoItems => f.write_str("kappa needs at least one item"),
            KappaError::BadRaterCount => {
                f.write_str("kappa needs >=2 raters and equal raters per item")
            }
            KappaError::Degenerate => {
                f.write_str("chance agreement is 1 but observed agreement is not")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for KappaError {}

/// Fleiss' kappa over a binary rater-item matrix. Each row holds the number
/// of raters choosing category 0 and category 1 for that item; rows must sum
/// to the same rater count. Perfect agreement returns exactly 1.0.
pub fn fleiss_kappa(counts: &[[u64; 2]]) -> Result<f64, KappaError> {
    if counts.is_empty() {
        return Err(KappaError::NoItems);
    }
    let n = counts[0][0] + counts[0][1];
    if n < 2 || counts.iter().any(|row| row[0] + row[1] != n) {
        return Err(KappaError::BadRaterCount);
    }
    let m = counts.len() as f64;
    let n_f = n as f64;
    let mut p_bar = 0.0f64;
    let mut totals = [0u64; 2];
    for row in counts {
        let pairs: u64 = row.iter().map(|&c| c * c.saturating_sub(1)).sum();
        p_bar += pairs as f64 / (n_f * (n_f - 1.0));
        totals[0] += row[0];
        totals[1] += row[1];
    }
    p_bar /= m;
    if p_bar == 1.0 {
        return Ok(1.0);
    }
    let p0 = totals[0] as f64 / (m * n_f);
    let p1 = totals[1] as f64 / (m * n_f);
    let p_e = p0 * p0 + p1 * p1;
    if p_e >= 1.0 {
        return Err(KappaError::Degenerate);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}
