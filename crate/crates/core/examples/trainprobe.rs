use natlog::datagen::{generate, make_split, GenConfig, SplitSetting, SplitSpec};
use natlog::lexicon::Lexicon;
use natlog::trainer::{train, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let setting = args.get(1).map(String::as_str).unwrap_or("all-split");
    let target = args.get(2).cloned();
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let max_epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(100);
    let patience: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(25);

    let lex = Lexicon::default_lexicon().unwrap();
    let (corpus, _) = generate(&lex, &GenConfig::default()).unwrap();
    let spec = SplitSpec::new(
        SplitSetting::parse_name(setting).unwrap(),
        target.as_deref(),
        seed,
    );
    let split = make_split(&corpus, &spec).unwrap();
    println!("train={} test={}", split.train.len(), split.test.len());
    let config = TrainConfig { seed, max_epochs, early_stop_patience: patience, ..TrainConfig::default() };
    let t0 = std::time::Instant::now();
    let outcome = train(&split, lex.vocabulary(), &config).unwrap();
    println!("trained in {:?}, best epoch {}", t0.elapsed(), outcome.best_epoch);
    for row in outcome.history.iter().filter(|r| r.epoch % 5 == 0 || r.epoch == outcome.history.len()-1) {
        println!(
            "epoch {:3}  train_loss {:.4}  train_acc {:.4}  test_acc {:.4}",
            row.epoch, row.train_loss, row.train_accuracy, row.test_accuracy
        );
    }
    // Evaluate with subset breakdown at the best checkpoint.
    let report = natlog::eval::evaluate(&outcome.params, &split.test).unwrap();
    println!("target-only={:?} all-held-out={:?} all-test={:.4}",
        report.target_only.accuracy(), report.all_held_out.accuracy(), report.all_test.accuracy());
    println!("-- confusion (gold -> wrong predictions):");
    for (gi, row) in report.confusion.iter().enumerate() {
        for (pi, v) in row.iter().enumerate() {
            if gi != pi && *v > 0 {
                println!("   {} -> {}: {}",
                    natlog::relation::ALL_RELATIONS[gi].symbol(),
                    natlog::relation::ALL_RELATIONS[pi].symbol(), v);
            }
        }
    }
    println!("-- weakest datasets:");
    let mut rows: Vec<_> = report.per_dataset.iter().collect();
    rows.sort_by(|a, b| a.1.accuracy().partial_cmp(&b.1.accuracy()).unwrap());
    for (id, s) in rows.iter().take(12) {
        println!("   {:44} {:3} pairs  {:.3}", id, s.pairs, s.accuracy());
    }
    if let Some(m) = report.target_majority_prediction() {
        println!("target majority prediction: {}", m.symbol());
    }
}
