//! Acceptance suite: one test per shipping criterion. Each test prints a
//! single `ACCEPTANCE <n> ... PASS` line with its measured numbers; a failed
//! assertion carries the same numbers. The training criteria are stochastic
//! and evaluated over three fixed seeds with the tolerances stated inline.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::OnceLock;
use std::time::Instant;

use natlog::datagen::{
    corpus_to_tsv, datasets_to_tsv, generate, make_split, Corpus, DatasetClass, GenConfig,
    SplitSetting, SplitSpec,
};
use natlog::eval::{evaluate, EvaluationReport};
use natlog::grammar::serialize;
use natlog::lexicon::Lexicon;
use natlog::model::Variant;
use natlog::projectivity::label_pair_natlog;
use natlog::relation::{relation_of_sets, Relation, SetMask, ALL_RELATIONS};
use natlog::semantics::ModelChecker;
use natlog::trainer::{gradcheck_harness, grad_check, train, TrainConfig, TrainOutcome};

fn shared_corpus() -> &'static (Lexicon, Corpus) {
    static CORPUS: OnceLock<(Lexicon, Corpus)> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let lex = Lexicon::default_lexicon().expect("default lexicon is consistent");
        let (corpus, _) = generate(&lex, &GenConfig::default()).expect("corpus generation");
        (lex, corpus)
    })
}

/// Training configuration for the acceptance runs: default hyperparameters
/// (16/45 dimensions, batch 32, rate 0.2, lambda 2e-4), a 200-epoch cap.
fn acceptance_config(seed: u64) -> TrainConfig {
    TrainConfig { seed, max_epochs: 200, early_stop_patience: 50, ..TrainConfig::default() }
}

const SEEDS: [u64; 3] = [1, 2, 3];

fn run_experiment(setting: SplitSetting, target: Option<&str>, seed: u64) -> (TrainOutcome, EvaluationReport) {
    let (lex, corpus) = shared_corpus();
    let spec = SplitSpec::new(setting, target, seed);
    let split = make_split(corpus, &spec).expect("split");
    let outcome = train(&split, lex.vocabulary(), &acceptance_config(seed)).expect("training");
    let report = evaluate(&outcome.params, &split.test).expect("evaluation");
    (outcome, report)
}

fn proper_subsets(n: u32) -> impl Iterator<Item = SetMask> {
    (1..(1u64 << n) - 1).map(|m| m)
}

#[test]
fn acceptance_1_join_table_matches_enumeration() {
    let start = Instant::now();
    // Attainable outer relations for every chain over universes of 1..=6
    // elements, non-degenerate sets only.
    let mut attainable = [[[false; 7]; 7]; 7];
    for n in 1..=6u32 {
        let universe = (1u64 << n) - 1;
        for y in proper_subsets(n) {
            let xs: Vec<(SetMask, Relation)> =
                proper_subsets(n).map(|x| (x, relation_of_sets(x, y, universe))).collect();
            for &(x, rxy) in &xs {
                for z in proper_subsets(n) {
                    let ryz = relation_of_sets(y, z, universe);
                    attainable[rxy.index()][ryz.index()]
                        [relation_of_sets(x, z, universe).index()] = true;
                }
            }
        }
    }
    for r1 in ALL_RELATIONS {
        for r2 in ALL_RELATIONS {
            let found: Vec<Relation> = ALL_RELATIONS
                .into_iter()
                .filter(|r| attainable[r1.index()][r2.index()][r.index()])
                .collect();
            assert!(!found.is_empty(), "no witnesses for {r1} then {r2}");
            let expected = if found.len() == 1 { found[0] } else { Relation::Independence };
            assert_eq!(
                natlog::relation::join(r1, r2),
                expected,
                "join({r1}, {r2}) disagrees with brute force"
            );
        }
    }
    // The worked composition: negation joined with reverse entailment gives
    // alternation.
    assert_eq!(
        natlog::relation::join(Relation::Negation, Relation::ReverseEntailment),
        Relation::Alternation
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "join enumeration took {elapsed:?}");
    println!("ACCEPTANCE 1 join-table oracle equivalence: PASS (49 entries, {elapsed:?})");
}

#[test]
fn acceptance_2_dual_oracle_agreement() {
    let start = Instant::now();
    let (lex, corpus) = shared_corpus();
    let checker = ModelChecker::new(lex);
    let mut checked = 0usize;
    for dataset in &corpus.datasets {
        for pair in &dataset.pairs {
            let natlog_label = label_pair_natlog(&pair.left, &pair.right, lex)
                .expect("symbolic oracle labels every shipped pair");
            let model_label = checker
                .label(&pair.left, &pair.right)
                .expect("no shipped pair is degenerate");
            assert_eq!(
                natlog_label, model_label,
                "oracles disagree on {} / {}",
                serialize(&pair.left),
                serialize(&pair.right)
            );
            assert_eq!(natlog_label, pair.gold, "stored gold label is stale");
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "oracle agreement took {elapsed:?}");
    println!("ACCEPTANCE 2 dual-oracle agreement: PASS ({checked} pairs agree, {elapsed:?})");
}

#[test]
fn acceptance_3_corpus_scale_and_canonical_examples() {
    let (_, corpus) = shared_corpus();
    let datasets = corpus.datasets.len();
    let pairs = corpus.pair_count();
    assert!((150..=250).contains(&datasets), "{datasets} datasets outside 150..=250");
    assert!((8_000..=16_000).contains(&pairs), "{pairs} pairs outside 8000..=16000");
    for class in [
        DatasetClass::Monotonicity,
        DatasetClass::QuantifierSubstitution,
        DatasetClass::MonotonicityQuantifierSubstitution,
        DatasetClass::NegationVariant,
    ] {
        assert!(
            corpus.datasets.iter().any(|d| d.class == class),
            "dataset class {class} missing"
        );
    }
    // The canonical table rows, one triple of fillers from each of the four
    // sample datasets, with their printed labels.
    let canonical = [
        ("(some dog) mobile", "(some puppy) mobile", ">"),
        ("(some animal) mobile", "(some cat) mobile", ">"),
        ("(some Asian) mobile", "(some Thai) mobile", ">"),
        ("(all puppy) bark", "(some puppy) bark", "<"),
        ("(all cat) bark", "(some cat) bark", "<"),
        ("(all hippo) bark", "(some hippo) bark", "<"),
        ("(all puppy) French", "(some puppy) European", "<"),
        ("(all cat) French", "(some cat) European", "<"),
        ("(all hippo) French", "(some hippo) European", "<"),
        ("(all puppy) bark", "(no puppy) (not bark)", "="),
        ("(all cat) bark", "(no cat) (not bark)", "="),
        ("(all hippo) bark", "(no hippo) (not bark)", "="),
    ];
    for (left, right, symbol) in canonical {
        let found = corpus.datasets.iter().flat_map(|d| &d.pairs).find(|p| {
            serialize(&p.left) == left && serialize(&p.right) == right
        });
        let pair = found.unwrap_or_else(|| panic!("corpus is missing {left} / {right}"));
        assert_eq!(pair.gold.symbol(), symbol, "{left} / {right} labeled {}", pair.gold);
    }
    println!(
        "ACCEPTANCE 3 corpus scale: PASS ({datasets} datasets, {pairs} pairs, all classes and canonical examples present)"
    );
}

#[test]
fn acceptance_4_gradient_correctness() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for variant in [Variant::Tied, Variant::Untied] {
        // The harness mixes plain and negated trees over a 4-dimensional
        // miniature model.
        let (params, examples) = gradcheck_harness(2024, variant, 10);
        let report = grad_check(&params, &examples, 1e-6);
        assert!(
            report.max_relative_error < 1e-4,
            "{} variant: max relative error {:.3e}\n{report}",
            variant.name(),
            report.max_relative_error
        );
        worst = worst.max(report.max_relative_error);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "gradient check took {elapsed:?}");
    println!(
        "ACCEPTANCE 4 gradient correctness: PASS (max relative error {worst:.3e} < 1e-4, tied and untied, {elapsed:?})"
    );
}

#[test]
fn acceptance_5_all_split_reproduction() {
    let start = Instant::now();
    let mut best = 0.0f64;
    let mut per_seed = Vec::new();
    for seed in SEEDS {
        let (_, report) = run_experiment(SplitSetting::AllSplit, None, seed);
        let acc = report.all_test.accuracy();
        per_seed.push(format!("seed {seed}: {acc:.4}"));
        best = best.max(acc);
    }
    assert!(
        best >= 0.98,
        "best all-split test accuracy {best:.4} below 0.98 ({})",
        per_seed.join(", ")
    );
    println!(
        "ACCEPTANCE 5 all-split reproduction: PASS (best {best:.4} >= 0.98; {}; {:?})",
        per_seed.join(", "),
        start.elapsed()
    );
}

/// Best value of a report metric across the three seeds.
fn best_over_seeds(
    setting: SplitSetting,
    target: &str,
    metric: impl Fn(&EvaluationReport) -> f64,
) -> f64 {
    SEEDS
        .iter()
        .map(|&seed| metric(&run_experiment(setting, Some(target), seed).1))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn acceptance_6_generalization_patterns() {
    let start = Instant::now();
    let alternation_target = "qsub.most.no.bark";
    let independence_target = "qsub.two.all.bark";
    {
        let (_, corpus) = shared_corpus();
        assert_eq!(corpus.dataset(alternation_target).unwrap().gold, Relation::Alternation);
        assert_eq!(corpus.dataset(independence_target).unwrap().gold, Relation::Independence);
    }

    let set_out_target = best_over_seeds(SplitSetting::SetOut, alternation_target, |r| {
        r.target_only.accuracy()
    });
    assert!(
        set_out_target >= 0.90,
        "set-out target-only accuracy {set_out_target:.4} below 0.90 for {alternation_target}"
    );

    let pair_out_all = best_over_seeds(SplitSetting::PairOut, alternation_target, |r| {
        r.all_test.accuracy()
    });
    assert!(
        pair_out_all >= 0.88,
        "pair-out all-test accuracy {pair_out_all:.4} below 0.88 for {alternation_target}"
    );

    let subclass_target = best_over_seeds(SplitSetting::SubclassOut, independence_target, |r| {
        r.target_only.accuracy()
    });
    assert!(
        subclass_target >= 0.90,
        "subclass-out target-only accuracy {subclass_target:.4} below 0.90 for {independence_target}"
    );

    let set_out_all = best_over_seeds(SplitSetting::SetOut, independence_target, |r| {
        r.all_test.accuracy()
    });
    assert!(
        set_out_all >= 0.94,
        "set-out all-test accuracy {set_out_all:.4} below 0.94 for {independence_target}"
    );

    println!(
        "ACCEPTANCE 6 generalization pattern: PASS (alternation target: set-out target {set_out_target:.4} >= 0.90, pair-out all-test {pair_out_all:.4} >= 0.88; independence target: subclass-out target {subclass_target:.4} >= 0.90, set-out all-test {set_out_all:.4} >= 0.94; {:?})",
        start.elapsed()
    );
}

#[test]
fn acceptance_7_failure_mode_reproduction() {
    let start = Instant::now();
    let target = "qsub.some.no.bark";
    {
        let (_, corpus) = shared_corpus();
        assert_eq!(corpus.dataset(target).unwrap().gold, Relation::Negation);
    }
    let mut summaries = Vec::new();
    for setting in [SplitSetting::SetOut, SplitSetting::SubclassOut, SplitSetting::PairOut] {
        // A seed satisfies the criterion when the model keeps overall
        // accuracy while failing on the held-out negation pattern; the
        // histogram condition asks the failure to be the systematic guess of
        // alternation in the set-out and subclass-out settings.
        let need_histogram =
            matches!(setting, SplitSetting::SetOut | SplitSetting::SubclassOut);
        let mut witness = None;
        let mut observed = Vec::new();
        for seed in SEEDS {
            let (_, report) = run_experiment(setting, Some(target), seed);
            let target_acc = report.target_only.accuracy();
            let all_acc = report.all_test.accuracy();
            let majority = report.target_majority_prediction();
            observed.push(format!(
                "seed {seed}: target {target_acc:.3}, all-test {all_acc:.3}, majority {}",
                majority.map(|r| r.symbol()).unwrap_or("-")
            ));
            let histogram_ok =
                !need_histogram || majority == Some(Relation::Alternation);
            if target_acc <= 0.20 && all_acc >= 0.80 && histogram_ok {
                witness = Some((seed, target_acc, all_acc));
                break;
            }
        }
        let (seed, target_acc, all_acc) = witness.unwrap_or_else(|| {
            panic!(
                "{}: no seed reproduces the failure mode ({})",
                setting.name(),
                observed.join("; ")
            )
        });
        summaries.push(format!(
            "{} seed {seed}: target {target_acc:.3} <= 0.20, all-test {all_acc:.3} >= 0.80",
            setting.name()
        ));
    }
    println!(
        "ACCEPTANCE 7 failure-mode reproduction: PASS ({}; {:?})",
        summaries.join("; "),
        start.elapsed()
    );
}

#[test]
fn acceptance_8_determinism() {
    let start = Instant::now();
    let lex = Lexicon::default_lexicon().unwrap();
    let (c1, _) = generate(&lex, &GenConfig::default()).unwrap();
    let (c2, _) = generate(&lex, &GenConfig::default()).unwrap();
    assert_eq!(corpus_to_tsv(&c1), corpus_to_tsv(&c2), "corpus files differ across regeneration");
    assert_eq!(datasets_to_tsv(&c1), datasets_to_tsv(&c2), "dataset manifests differ");

    let spec = SplitSpec::new(SplitSetting::AllSplit, None, 11);
    let split1 = make_split(&c1, &spec).unwrap();
    let split2 = make_split(&c2, &spec).unwrap();
    let config = TrainConfig { seed: 11, max_epochs: 5, ..TrainConfig::default() };
    let run1 = train(&split1, lex.vocabulary(), &config).unwrap();
    let run2 = train(&split2, lex.vocabulary(), &config).unwrap();
    assert_eq!(run1.history, run2.history, "training histories are not bit-identical");
    assert_eq!(run1.params, run2.params, "trained parameters differ");
    println!(
        "ACCEPTANCE 8 determinism: PASS (byte-identical corpus, bit-identical {}-epoch histories; {:?})",
        config.max_epochs,
        start.elapsed()
    );
}
