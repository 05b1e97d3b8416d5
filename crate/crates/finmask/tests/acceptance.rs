//! Acceptance suite: eight go/no-go checks over the whole workspace, one
//! test per criterion. Run with `cargo test --test acceptance -- --nocapture`
//! to see one `ACCEPTANCE <n> PASS` line per criterion.
//!
//! Expected values are authored independently of the code under test: worked
//! examples are checked against hand-derived decimals, the matcher is
//! compared with the brute-force oracle in `finmask-testgen`, and the vote
//! cross-tab lives in a hand-written fixture file. None of them are ever
//! regenerated from the implementation.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use finmask::config::LoadedConfig;
use finmask::lexfile::default_lexicon;
use finmask::pipeline::annotate::run_annotate;
use finmask::pipeline::build::run_build;
use finmask::pipeline::evaluate::run_evaluate;
use finmask::pipeline::ingest::run_ingest;
use finmask::pipeline::report::run_report;
use finmask::records::{load_benchmark, load_jsonl, SentenceRecord};
use finmask_core::agreement::{
    agreement_report, consensus, fleiss_kappa, AnnotationVerdict, HumanLabel, Ratio, VoteLabel,
};
use finmask_core::matcher::{match_spans, normalize_number};
use finmask_core::score::{
    compute_report, scale_error_diagnostic, PredictionRecord, Scenario, ScenarioCriterion,
    ScenarioLabel, StratumCount,
};
use finmask_core::Decimal;
use finmask_testgen::{
    canonical, draw_format, draw_related_semantic, draw_semantic, oracle_numeric_match,
    oracle_unit_match, render,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Deserialize;
use tempfile::TempDir;

#[test]
fn criterion_1_matcher_worked_examples() {
    let started = Instant::now();
    let lexicon = default_lexicon();

    let n = normalize_number("1.23 billion", &lexicon).unwrap();
    assert_eq!(n.value(), Decimal::new(123, 7), "1.23 billion must equal 1.23e9 exactly");

    let n = normalize_number("1,230,000", &lexicon).unwrap();
    assert_eq!(n.precision(), Decimal::pow10(4), "precision of 1,230,000 must be 10^4");

    let m = match_spans("$1,230 million", "USD 1.23 billion", &lexicon);
    assert!(m.is_numeric_match, "values must match at the coarser precision");
    assert!(m.is_unit_match, "USD covers the $ unit group");
    assert!(m.overall);

    assert!(started.elapsed() < Duration::from_secs(1), "criterion 1 must run in <1s");
    println!("ACCEPTANCE 1 PASS — matcher worked examples are exact");
}

#[test]
fn criterion_2_matcher_agrees_with_brute_force_oracle() {
    let started = Instant::now();
    let lexicon = default_lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED_5EED);

    let cases = 10_000u32;
    for case in 0..cases {
        let truth_sem = draw_semantic(&mut rng);
        let pred_sem = draw_related_semantic(&mut rng, &truth_sem);
        let truth = render(&truth_sem, &draw_format(&mut rng));
        let pred = render(&pred_sem, &draw_format(&mut rng));

        let got = match_spans(&truth, &pred, &lexicon);
        let want_numeric = oracle_numeric_match(&canonical(&truth_sem), &canonical(&pred_sem));
        let want_unit = oracle_unit_match(truth_sem.units, pred_sem.units);
        assert_eq!(
            got.is_numeric_match, want_numeric,
            "case {case}: numeric disagreement on truth={truth:?} pred={pred:?} \
             (sem {truth_sem:?} vs {pred_sem:?})"
        );
        assert_eq!(
            got.is_unit_match, want_unit,
            "case {case}: unit disagreement on truth={truth:?} pred={pred:?}"
        );

        // Reflexivity: every rendering fully matches itself.
        let reflexive = match_spans(&truth, &truth, &lexicon);
        assert!(reflexive.overall, "case {case}: {truth:?} must match itself");

        // Numeric symmetry: the coarser-precision rule has no sided-ness.
        let reversed = match_spans(&pred, &truth, &lexicon);
        assert_eq!(
            got.is_numeric_match, reversed.is_numeric_match,
            "case {case}: numeric match must be symmetric for {truth:?} / {pred:?}"
        );
    }

    assert!(started.elapsed() < Duration::from_secs(30), "criterion 2 must run in <30s");
    println!(
        "ACCEPTANCE 2 PASS — {cases} generated variants: zero oracle disagreements, \
         reflexive, numerically symmetric"
    );
}

/// Row of the hand-written vote cross-tab fixture.
#[derive(Deserialize)]
struct VoteRow {
    yes_votes: usize,
    human_yes: u64,
    human_no: u64,
}

#[derive(Deserialize)]
struct VoteFixture {
    panel_size: usize,
    rows: Vec<VoteRow>,
}

/// Expands the fixture's count table into per-task panel verdicts and human
/// labels. Task ids are synthetic but unique.
fn expand_vote_fixture(fixture: &VoteFixture) -> (Vec<AnnotationVerdict>, Vec<HumanLabel>) {
    let mut verdicts = Vec::new();
    let mut humans = Vec::new();
    let mut task = 0usize;
    for row in &fixture.rows {
        for (human_answerable, count) in [(true, row.human_yes), (false, row.human_no)] {
            for _ in 0..count {
                let task_id = format!("vote-{task:04}");
                task += 1;
                for member in 0..fixture.panel_size {
                    verdicts.push(AnnotationVerdict {
                        task_id: task_id.clone(),
                        model_name: format!("panelist-{member}"),
                        label: if member < row.yes_votes {
                            VoteLabel::Answerable
                        } else {
                            VoteLabel::Unanswerable
                        },
                        reasoning: String::new(),
                    });
                }
                humans.push(HumanLabel {
                    task_id,
                    label: if human_answerable {
                        VoteLabel::Answerable
                    } else {
                        VoteLabel::Unanswerable
                    },
                    annotator_id: String::from("adjudicator"),
                });
            }
        }
    }
    (verdicts, humans)
}

#[test]
fn criterion_3_consensus_precision_fractions() {
    let started = Instant::now();
    let fixture: VoteFixture =
        serde_json::from_str(include_str!("fixtures/vote_crosstab.json")).unwrap();
    let (verdicts, humans) = expand_vote_fixture(&fixture);

    let results = consensus(verdicts);
    let table = agreement_report(&results, &humans).unwrap();

    assert_eq!(table.panel_size, 3);
    assert_eq!(
        table.unanimous_yes_precision,
        Some(Ratio { numerator: 276, denominator: 287 }),
        "unanimous-yes precision must be exactly 276/287"
    );
    assert_eq!(
        table.unanimous_no_precision,
        Some(Ratio { numerator: 626, denominator: 627 }),
        "unanimous-no precision must be exactly 626/627"
    );
    // The cross-tab itself must reproduce the fixture rows verbatim.
    for (row, want) in table.rows.iter().zip(&fixture.rows) {
        assert_eq!(row.yes_votes, want.yes_votes);
        assert_eq!(row.human_yes, want.human_yes);
        assert_eq!(row.human_no, want.human_no);
    }
    assert_eq!(table.total_tasks(), 1124);

    assert!(started.elapsed() < Duration::from_secs(1), "criterion 3 must run in <1s");
    println!(
        "ACCEPTANCE 3 PASS — unanimous-yes 276/287 and unanimous-no 626/627, exact rationals"
    );
}

#[test]
fn criterion_4_fleiss_kappa_bounds() {
    let started = Instant::now();

    // Perfect agreement with both labels present: kappa is exactly 1.
    let perfect: Vec<[u64; 2]> =
        (0..100).map(|i| if i % 2 == 0 { [3, 0] } else { [0, 3] }).collect();
    let kappa = fleiss_kappa(&perfect).unwrap();
    assert_eq!(kappa, 1.0, "perfect agreement must give exactly 1.0");

    // Three raters voting independently at random: kappa concentrates at 0.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let counts: Vec<[u64; 2]> = (0..10_000)
        .map(|_| {
            let yes = (0..3).filter(|_| rng.next_u64() % 2 == 0).count() as u64;
            [yes, 3 - yes]
        })
        .collect();
    let independent = fleiss_kappa(&counts).unwrap();
    assert!(
        independent.abs() < 0.05,
        "independent raters over 10k items must give |kappa| < 0.05, got {independent}"
    );

    assert!(started.elapsed() < Duration::from_secs(5), "criterion 4 must run in <5s");
    println!(
        "ACCEPTANCE 4 PASS — perfect agreement κ = 1.0 exact; independent raters κ = {independent:.4}"
    );
}

#[test]
fn criterion_5_weighted_overall_accuracy() {
    let started = Instant::now();
    let lexicon = default_lexicon();

    // Scenario strata sized like the main split, with fixed per-scenario
    // correct counts. Hand computation of the weighted overall accuracy:
    //   (1474 + 597 + 130 + 9) / (1606 + 635 + 135 + 10)
    //   = 2210 / 2386 = 0.9262363... -> 92.6236%.
    let strata = [
        (Scenario::A, 1606u64, 1474u64),
        (Scenario::B, 635, 597),
        (Scenario::C, 135, 130),
        (Scenario::D, 10, 9),
    ];
    const HAND_COMPUTED_OVERALL_PCT: f64 = 92.6236;

    let mut records = Vec::new();
    let mut labels = Vec::new();
    let mut id = 0usize;
    for (scenario, n, correct) in strata {
        for i in 0..n {
            let task_id = format!("syn-{id:05}");
            id += 1;
            let answer = if i < correct { "$1.0 million" } else { "$7.7 million" };
            records.push(PredictionRecord {
                task_id: task_id.clone(),
                model_name: String::from("subject"),
                ground_truth: String::from("$1.0 million"),
                answer_text: String::from(answer),
                self_scenario: Some(scenario),
                necessary_metrics: Vec::new(),
                references: Vec::new(),
                attempts: 1,
                match_result: match_spans("$1.0 million", answer, &lexicon),
            });
            labels.push(ScenarioLabel { task_id, label: Some(scenario), support: 1 });
        }
    }

    let report =
        compute_report(&records, &labels, ScenarioCriterion::Overall, &lexicon).unwrap();
    assert_eq!(report.models.len(), 1);
    let model = &report.models[0];

    // Exact integer counts first, then the headline percentage.
    assert_eq!(model.n, 2386);
    assert_eq!(model.overall_correct, 2210);
    for (scenario, n, correct) in strata {
        assert_eq!(model.per_scenario[&scenario], StratumCount { correct, n });
    }
    let overall_pct = model.overall_acc() * 100.0;
    assert!(
        (overall_pct - HAND_COMPUTED_OVERALL_PCT).abs() < 0.05,
        "overall accuracy {overall_pct:.4} must be within 0.05 points of hand-computed \
         {HAND_COMPUTED_OVERALL_PCT}"
    );

    assert!(started.elapsed() < Duration::from_secs(1), "criterion 5 must run in <1s");
    println!(
        "ACCEPTANCE 5 PASS — weighted overall {overall_pct:.4}% within 0.05 points of \
         hand-computed {HAND_COMPUTED_OVERALL_PCT}%"
    );
}

/// Writes the fixture-corpus pipeline config into `dir` and returns it
/// loaded. The config bytes are identical for every caller, so stage
/// manifests (which embed the config digest) are comparable across runs.
fn fixture_config(dir: &Path) -> LoadedConfig {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/filings/manifest.json");
    let text = format!(
        r#"[input]
manifest = "{manifest}"

[build]
sample_n = 10
seed = 7

[annotate]
panel = ["anno-a", "anno-b", "anno-c"]

[evaluate]
models = ["subject"]
concurrency = 2

[models.anno-a]
kind = "stub"
behavior = "answer_all"

[models.anno-b]
kind = "stub"
behavior = "answer_all"

[models.anno-c]
kind = "stub"
behavior = "answer_all"

[models.subject]
kind = "stub"
behavior = "echo_benchmark"
wrong_every = 6
drop_scale_every = 9

[cache]
dir = ".finmask-cache"

[output]
dir = "out"
"#,
        manifest = manifest.display()
    );
    let path = dir.join("pipeline.toml");
    fs::write(&path, text).unwrap();
    LoadedConfig::load(&path).unwrap()
}

struct RunCalls {
    annotate: u64,
    evaluate: u64,
}

/// Runs all five stages and returns the transport call counts observed.
fn run_full_pipeline(loaded: &LoadedConfig) -> RunCalls {
    run_ingest(loaded).unwrap();
    run_build(loaded).unwrap();
    let annotate = run_annotate(loaded).unwrap();
    let evaluate = run_evaluate(loaded).unwrap();
    run_report(loaded, None, ScenarioCriterion::Overall).unwrap();
    RunCalls {
        annotate: annotate.transport_calls,
        evaluate: evaluate.models.iter().map(|(_, _, calls)| *calls).sum(),
    }
}

/// Every file under `root`, keyed by relative path.
fn snapshot_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn assert_identical_trees(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) {
    let a_files: Vec<&String> = a.keys().collect();
    let b_files: Vec<&String> = b.keys().collect();
    assert_eq!(a_files, b_files, "output trees list different files");
    for (name, bytes) in a {
        assert_eq!(bytes, &b[name], "output file {name} differs between runs");
    }
}

#[test]
fn criterion_6_end_to_end_determinism() {
    let started = Instant::now();

    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    let config_a = fixture_config(dir_a.path());
    let config_b = fixture_config(dir_b.path());

    // Two cold runs in separate directories with separate caches.
    let cold_a = run_full_pipeline(&config_a);
    let cold_b = run_full_pipeline(&config_b);
    assert!(cold_a.annotate > 0 && cold_a.evaluate > 0, "cold run must hit the transport");

    let tree_a = snapshot_tree(&dir_a.path().join("out"));
    let tree_b = snapshot_tree(&dir_b.path().join("out"));
    assert!(
        tree_a.keys().any(|k| k.starts_with("predictions/"))
            && tree_a.contains_key("benchmark.jsonl")
            && tree_a.contains_key("report/report.json"),
        "pipeline must produce benchmark, prediction, and report files"
    );
    assert_identical_trees(&tree_a, &tree_b);

    // Warm rerun over run A's cache: byte-identical files, zero transport.
    let warm = run_full_pipeline(&config_a);
    assert_eq!(warm.annotate, 0, "warm annotate must replay entirely from cache");
    assert_eq!(warm.evaluate, 0, "warm evaluate must replay entirely from cache");
    let tree_warm = snapshot_tree(&dir_a.path().join("out"));
    assert_identical_trees(&tree_a, &tree_warm);

    assert_eq!(cold_a.annotate, cold_b.annotate);
    assert_eq!(cold_a.evaluate, cold_b.evaluate);

    assert!(started.elapsed() < Duration::from_secs(60), "criterion 6 must run in <60s");
    println!(
        "ACCEPTANCE 6 PASS — {} output files byte-identical across two cold runs and a \
         warm rerun; warm rerun made 0 transport calls",
        tree_a.len()
    );
}

#[test]
fn criterion_7_mask_restore_identity() {
    let started = Instant::now();

    let dir = TempDir::new().unwrap();
    let loaded = fixture_config(dir.path());
    run_ingest(&loaded).unwrap();
    run_build(&loaded).unwrap();

    let layout = loaded.layout();
    let (_, tasks) = load_benchmark(&layout.benchmark()).unwrap();
    let sentences: Vec<SentenceRecord> = load_jsonl(&layout.sentences()).unwrap();
    let text_of: BTreeMap<(String, usize), String> = sentences
        .into_iter()
        .map(|s| ((s.company_id, s.sentence.index), s.sentence.text))
        .collect();

    assert!(!tasks.is_empty(), "fixture corpus must yield at least one task");
    for task in &tasks {
        let original = &text_of[&(task.company_id.clone(), task.sentence_index)];
        assert_eq!(
            task.corrupted_sentence.matches("[MASK]").count(),
            1,
            "task {} must carry exactly one mask",
            task.task_id
        );
        let restored = task.corrupted_sentence.replacen("[MASK]", &task.ground_truth, 1);
        assert_eq!(
            &restored, original,
            "task {}: restoring the mask must reproduce the original sentence",
            task.task_id
        );
    }

    assert!(started.elapsed() < Duration::from_secs(60));
    println!(
        "ACCEPTANCE 7 PASS — mask-restore identity holds on all {} built instances",
        tasks.len()
    );
}

#[test]
fn criterion_8_scale_error_census() {
    let started = Instant::now();
    let lexicon = default_lexicon();

    // 1000 records with a known composition: 370 numerically correct, 207
    // scale errors (right mantissa, missing scale word), 423 plain wrong.
    let mut records = Vec::new();
    for i in 0..1000usize {
        let answer = if i < 370 {
            "$3.7 million"
        } else if i < 370 + 207 {
            "$3.7"
        } else {
            "$9.9 million"
        };
        records.push(PredictionRecord {
            task_id: format!("census-{i:04}"),
            model_name: String::from("subject"),
            ground_truth: String::from("$3.7 million"),
            answer_text: String::from(answer),
            self_scenario: Some(Scenario::A),
            necessary_metrics: Vec::new(),
            references: Vec::new(),
            attempts: 1,
            match_result: match_spans("$3.7 million", answer, &lexicon),
        });
    }

    let census = scale_error_diagnostic(&records, &lexicon);
    assert_eq!(census.len(), 1);
    let count = &census[0];
    assert_eq!(count.n, 1000);
    assert_eq!(count.value_correct, 370, "raw value accuracy must be exactly 370/1000");
    assert_eq!(count.scale_errors, 207, "census must find exactly the injected scale errors");
    assert_eq!(
        count.corrected_value_correct() - count.value_correct,
        207,
        "corrected minus raw must equal the injected scale-error count exactly"
    );
    // In percentage points: 37.0% raw -> 57.7% corrected, a +20.7 gap.
    let raw_pct = count.value_correct * 100;
    let corrected_pct = count.corrected_value_correct() * 100;
    assert_eq!(raw_pct, 370 * 100);
    assert_eq!(corrected_pct - raw_pct, 207 * 100); // 20.7 points over n=1000

    assert!(started.elapsed() < Duration::from_secs(1), "criterion 8 must run in <1s");
    println!(
        "ACCEPTANCE 8 PASS — census reports 370/1000 raw vs 577/1000 corrected: \
         a +20.7 point gap, exactly the injected fraction"
    );
}
