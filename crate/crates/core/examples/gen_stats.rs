use natlog::datagen::{generate, GenConfig};
use natlog::lexicon::Lexicon;
fn main() {
    let lex = Lexicon::default_lexicon().unwrap();
    let t0 = std::time::Instant::now();
    let (corpus, report) = generate(&lex, &GenConfig::default()).unwrap();
    println!("generation took {:?}", t0.elapsed());
    println!("datasets={} pairs={}", corpus.datasets.len(), corpus.pair_count());
    for (class, n) in &report.class_counts {
        println!("  class {class}: {n} pairs");
    }
    let hist = corpus.label_histogram();
    for r in natlog::relation::ALL_RELATIONS {
        println!("  label {}: {}", r.symbol(), hist[r.index()]);
    }
    println!("disagreement-drops={} other-skips={} dropped-datasets={}",
        report.disagreements.len(), report.skipped.len(), report.dropped_datasets.len());
}
