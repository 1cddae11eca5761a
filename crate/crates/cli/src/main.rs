//! Command-line experiment harness: corpus generation, training runs for the
//! four experimental settings, evaluation breakdowns, and gradient checking.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use natlog::datagen::{
    self, corpus_from_tsv, corpus_to_tsv, datasets_to_tsv, make_split, manifest_from_text,
    manifest_to_text, Corpus, GenConfig, SplitSetting, SplitSpec,
};
use natlog::eval::{evaluate, EvaluationReport};
use natlog::lexicon::Lexicon;
use natlog::model::{load_checkpoint, save_checkpoint, Variant};
use natlog::trainer::{
    gradcheck_harness, grad_check, history_to_tsv, train, TrainConfig, TrainError,
};

#[derive(Parser)]
#[command(
    name = "natlog",
    about = "Entailment-corpus generation and tree tensor network experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the corpus from a lexicon and write it with a report.
    Generate(GenerateArgs),
    /// Train on one experimental setting and evaluate the result.
    Train(TrainArgs),
    /// Re-evaluate a saved checkpoint against a split manifest.
    Eval(EvalArgs),
    /// Check analytic gradients against finite differences on a miniature model.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Lexicon file; defaults to the built-in lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Generation seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for corpus.tsv, datasets.tsv, lexicon.tsv, report.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory produced by `generate`.
    #[arg(long)]
    corpus: PathBuf,
    /// Experimental setting.
    #[arg(long)]
    setting: String,
    /// Target dataset id (required for every setting except all-split).
    #[arg(long)]
    target: Option<String>,
    /// Base seed; also the split seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Training configuration file (flat key=value).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Composition variant override.
    #[arg(long)]
    variant: Option<String>,
    /// Number of consecutive seeds to run.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Directory produced by `generate`.
    #[arg(long)]
    corpus: PathBuf,
    /// Split manifest written by `train`.
    #[arg(long)]
    manifest: PathBuf,
    /// Optional output directory for report.txt and report.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Check only this variant; default checks both.
    #[arg(long)]
    variant: Option<String>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Numeric(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn report(&self) {
        match self {
            Failure::Usage(msg) => eprintln!("usage error: {msg}"),
            Failure::Data(err) => eprintln!("data error: {err:#}"),
            Failure::Numeric(err) => eprintln!("numeric failure: {err:#}"),
        }
    }
}

fn data_err(err: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(err.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Let clap print help/version normally; everything else is a
            // usage error with exit code 1.
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            failure.report();
            ExitCode::from(failure.code())
        }
    }
}

fn load_lexicon(path: &Option<PathBuf>) -> Result<(Lexicon, String), Failure> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading lexicon {}", p.display()))
                .map_err(Failure::Data)?;
            let lex = Lexicon::parse(&text).map_err(data_err)?;
            Ok((lex, text))
        }
        None => {
            let text = Lexicon::default_source().to_string();
            let lex = Lexicon::default_lexicon().map_err(data_err)?;
            Ok((lex, text))
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Data)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let (lex, lexicon_text) = load_lexicon(&args.lexicon)?;
    let config = GenConfig { seed: args.seed, ..GenConfig::default() };
    let (corpus, report) = datagen::generate(&lex, &config).map_err(data_err)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(Failure::Data)?;
    write(&args.out.join("corpus.tsv"), &corpus_to_tsv(&corpus))?;
    write(&args.out.join("datasets.tsv"), &datasets_to_tsv(&corpus))?;
    write(&args.out.join("lexicon.tsv"), &lexicon_text)?;
    let mut text = format!("generation-seed\t{}\n", args.seed);
    text.push_str(&report.render());
    write(&args.out.join("report.txt"), &text)?;

    println!(
        "generated {} datasets, {} pairs ({} candidate pairs skipped, {} oracle disagreements dropped)",
        corpus.datasets.len(),
        corpus.pair_count(),
        report.skipped.len(),
        report.disagreements.len()
    );
    Ok(())
}

fn load_corpus(dir: &Path) -> Result<(Lexicon, Corpus), Failure> {
    let lexicon_text = std::fs::read_to_string(dir.join("lexicon.tsv"))
        .with_context(|| format!("reading {}", dir.join("lexicon.tsv").display()))
        .map_err(Failure::Data)?;
    let lex = Lexicon::parse(&lexicon_text).map_err(data_err)?;
    let corpus_text = std::fs::read_to_string(dir.join("corpus.tsv"))
        .with_context(|| format!("reading {}", dir.join("corpus.tsv").display()))
        .map_err(Failure::Data)?;
    let datasets_text = std::fs::read_to_string(dir.join("datasets.tsv"))
        .with_context(|| format!("reading {}", dir.join("datasets.tsv").display()))
        .map_err(Failure::Data)?;
    let corpus = corpus_from_tsv(&corpus_text, &datasets_text, &lex, 0).map_err(data_err)?;
    Ok((lex, corpus))
}

fn subset_cell(s: &natlog::eval::SubsetAccuracy) -> String {
    if s.pairs == 0 {
        "-".to_string()
    } else {
        format!("{:.6}", s.accuracy())
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let setting = SplitSetting::parse_name(&args.setting)
        .ok_or_else(|| Failure::Usage(format!("unknown setting {:?}", args.setting)))?;
    let variant = match &args.variant {
        Some(v) => Some(
            Variant::parse_name(v)
                .ok_or_else(|| Failure::Usage(format!("unknown variant {v:?}")))?,
        ),
        None => None,
    };
    if args.seeds == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }

    let mut base_config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(Failure::Data)?;
            TrainConfig::parse(&text).map_err(data_err)?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = variant {
        base_config.variant = v;
    }
    if let Some(seed) = args.seed {
        base_config.seed = seed;
    }

    let (lex, corpus) = load_corpus(&args.corpus)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(Failure::Data)?;

    let mut summary = String::from(
        "seed\tbest_epoch\ttrain_acc\tall_test\ttarget_only\tall_held_out\n",
    );
    let mut best: Option<(u64, f64)> = None;
    for offset in 0..args.seeds {
        let seed = base_config.seed + offset;
        let config = TrainConfig { seed, ..base_config.clone() };
        let spec = SplitSpec::new(setting, args.target.as_deref(), seed);
        let split = make_split(&corpus, &spec).map_err(data_err)?;

        let outcome = match train(&split, lex.vocabulary(), &config) {
            Ok(o) => o,
            Err(e @ TrainError::Diverged { .. }) => return Err(Failure::Numeric(anyhow!(e))),
            Err(e) => return Err(data_err(e)),
        };
        let report = evaluate(&outcome.params, &split.test).map_err(data_err)?;

        let run_dir = args.out.join(format!("seed-{seed}"));
        std::fs::create_dir_all(&run_dir)
            .with_context(|| format!("creating {}", run_dir.display()))
            .map_err(Failure::Data)?;
        save_checkpoint(&outcome.params, &run_dir.join("checkpoint.bin")).map_err(data_err)?;
        write(&run_dir.join("history.tsv"), &history_to_tsv(&outcome.history))?;
        write(&run_dir.join("manifest.tsv"), &manifest_to_text(&corpus, &split))?;
        write(&run_dir.join("config.txt"), &config.render())?;
        write(&run_dir.join("report.txt"), &render_run_header(&spec, seed, &report))?;
        write(&run_dir.join("report.tsv"), &report.render_tsv())?;

        let train_acc = outcome.history[outcome.best_epoch].train_accuracy;
        let _ = writeln!(
            summary,
            "{seed}\t{}\t{:.6}\t{}\t{}\t{}",
            outcome.best_epoch,
            train_acc,
            subset_cell(&report.all_test),
            subset_cell(&report.target_only),
            subset_cell(&report.all_held_out),
        );
        let score = report.all_test.accuracy();
        if best.map(|(_, s)| score > s).unwrap_or(true) {
            best = Some((seed, score));
        }
        println!(
            "seed {seed}: best epoch {}, train {:.4}, all-test {}",
            outcome.best_epoch,
            train_acc,
            subset_cell(&report.all_test)
        );
    }
    if let Some((seed, score)) = best {
        let _ = writeln!(summary, "# best-seed={seed} all_test={score:.6}");
        println!("best seed {seed} with all-test accuracy {score:.4}");
    }
    write(&args.out.join("summary.tsv"), &summary)?;
    Ok(())
}

fn render_run_header(spec: &SplitSpec, seed: u64, report: &EvaluationReport) -> String {
    let mut out = format!(
        "setting={} target={} seed={seed}\n\n",
        spec.setting,
        spec.target.as_deref().unwrap_or("-")
    );
    out.push_str(&report.render_text());
    out
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let (_, corpus) = load_corpus(&args.corpus)?;
    let manifest_text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))
        .map_err(Failure::Data)?;
    let split = manifest_from_text(&corpus, &manifest_text).map_err(data_err)?;
    let params = load_checkpoint(&args.checkpoint).map_err(data_err)?;
    let report = evaluate(&params, &split.test).map_err(data_err)?;
    let text = render_run_header(&split.spec, split.spec.seed, &report);
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .with_context(|| format!("creating {}", out.display()))
            .map_err(Failure::Data)?;
        write(&out.join("report.txt"), &text)?;
        write(&out.join("report.tsv"), &report.render_tsv())?;
    }
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<(), Failure> {
    let variants = match &args.variant {
        Some(v) => vec![Variant::parse_name(v)
            .ok_or_else(|| Failure::Usage(format!("unknown variant {v:?}")))?],
        None => vec![Variant::Tied, Variant::Untied],
    };
    let mut worst: f64 = 0.0;
    for variant in variants {
        let (params, examples) = gradcheck_harness(args.seed, variant, 10);
        let report = grad_check(&params, &examples, 1e-6);
        println!("variant {}:\n{report}\n", variant.name());
        worst = worst.max(report.max_relative_error);
    }
    if worst >= 1e-4 {
        return Err(Failure::Numeric(anyhow!(
            "gradient check failed: max relative error {worst:.3e} (threshold 1e-4)"
        )));
    }
    println!("gradient check passed: max relative error {worst:.3e} < 1e-4");
    Ok(())
}
