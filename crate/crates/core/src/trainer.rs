//! Minibatch SGD with AdaGrad and L2 regularization, plus the
//! finite-difference gradient checker that validates the backward pass.
//!
//! Training is fully determined by (seed, config, split): parameter
//! initialization, per-epoch shuffles, and batch order all derive from the
//! seed, so identical runs produce bit-identical histories.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::datagen::{subseed, LabeledPair, Split};
use crate::grammar::to_tree;
use crate::model::{
    backward, forward_indexed, Gradients, IndexedTree, ModelError, ModelParams, Variant,
    DEFAULT_COMPARISON_DIM, DEFAULT_WORD_DIM,
};
use crate::relation::Relation;

/// Hyperparameters and run controls. The optimizer defaults are the paperily
/// fixed recipe: minibatches of 32, AdaGrad from a base rate of 0.2, L2
/// coefficient 2e-4, uniform initialization in [-0.1, 0.1].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub base_learning_rate: f64,
    pub l2_lambda: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub variant: Variant,
    pub adagrad_epsilon: f64,
    pub word_dim: usize,
    pub comparison_dim: usize,
    /// Stop after this many epochs without a training-accuracy improvement.
    pub early_stop_patience: usize,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            batch_size: 32,
            base_learning_rate: 0.2,
            l2_lambda: 0.0002,
            max_epochs: 500,
            seed: 1,
            variant: Variant::Tied,
            adagrad_epsilon: 1e-6,
            word_dim: DEFAULT_WORD_DIM,
            comparison_dim: DEFAULT_COMPARISON_DIM,
            early_stop_patience: 50,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected key=value, found {text:?}")]
    BadLine { line: usize, text: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: invalid value {value:?} for {key}")]
    BadValue { line: usize, key: String, value: String },
}

impl TrainConfig {
    /// Parses the flat `key=value` format; unknown keys are rejected.
    /// Lines starting with `#` and blank lines are ignored.
    pub fn parse(text: &str) -> Result<TrainConfig, ConfigError> {
        let mut config = TrainConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| ConfigError::BadLine { line, text: raw.to_string() })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "batch_size" => config.batch_size = value.parse().map_err(|_| bad())?,
                "base_learning_rate" => {
                    config.base_learning_rate = value.parse().map_err(|_| bad())?
                }
                "l2_lambda" => config.l2_lambda = value.parse().map_err(|_| bad())?,
                "max_epochs" => config.max_epochs = value.parse().map_err(|_| bad())?,
                "seed" => config.seed = value.parse().map_err(|_| bad())?,
                "variant" => {
                    config.variant = Variant::parse_name(value).ok_or_else(bad)?;
                }
                "adagrad_epsilon" => config.adagrad_epsilon = value.parse().map_err(|_| bad())?,
                "word_dim" => config.word_dim = value.parse().map_err(|_| bad())?,
                "comparison_dim" => config.comparison_dim = value.parse().map_err(|_| bad())?,
                "early_stop_patience" => {
                    config.early_stop_patience = value.parse().map_err(|_| bad())?
                }
                other => {
                    return Err(ConfigError::UnknownKey { line, key: other.to_string() });
                }
            }
        }
        Ok(config)
    }

    pub fn render(&self) -> String {
        format!(
            "batch_size={}\nbase_learning_rate={}\nl2_lambda={}\nmax_epochs={}\nseed={}\n\
             variant={}\nadagrad_epsilon={}\nword_dim={}\ncomparison_dim={}\n\
             early_stop_patience={}\n",
            self.batch_size,
            self.base_learning_rate,
            self.l2_lambda,
            self.max_epochs,
            self.seed,
            self.variant.name(),
            self.adagrad_epsilon,
            self.word_dim,
            self.comparison_dim,
            self.early_stop_patience
        )
    }
}

/// A pair reduced to indexed trees for the hot loop.
pub struct IndexedExample {
    pub left: IndexedTree,
    pub right: IndexedTree,
    pub gold: Relation,
}

pub fn index_pairs(
    pairs: &[LabeledPair],
    params: &ModelParams,
) -> Result<Vec<IndexedExample>, ModelError> {
    pairs
        .iter()
        .map(|p| {
            Ok(IndexedExample {
                left: params.index_tree(&to_tree(&p.left))?,
                right: params.index_tree(&to_tree(&p.right))?,
                gold: p.gold,
            })
        })
        .collect()
}

/// Pooled gradient over a batch: per-example gradients summed, then the L2
/// term `λ·θ` added once per batch for every parameter entry, embeddings
/// included. Returns the mean unregularized loss and the number of correct
/// argmax predictions alongside the gradients.
pub fn batch_gradient(
    batch: &[IndexedExample],
    params: &ModelParams,
    l2_lambda: f64,
) -> (f64, usize, Gradients) {
    let refs: Vec<&IndexedExample> = batch.iter().collect();
    batch_gradient_refs(&refs, params, l2_lambda)
}

fn batch_gradient_refs(
    batch: &[&IndexedExample],
    params: &ModelParams,
    l2_lambda: f64,
) -> (f64, usize, Gradients) {
    assert!(!batch.is_empty(), "batch must be non-empty");
    let mut total = Gradients::zeros_like(params);
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for ex in batch {
        let trace = forward_indexed(&ex.left, &ex.right, params);
        if trace.predicted() == ex.gold {
            correct += 1;
        }
        let (loss, grads) = backward(&trace, ex.gold, params);
        loss_sum += loss;
        total.add_assign(&grads);
    }
    if l2_lambda != 0.0 {
        for (g, p) in total.tensors_mut().into_iter().zip(params.tensors()) {
            crate::tensor::axpy(l2_lambda, p.1, g);
        }
    }
    (loss_sum / batch.len() as f64, correct, total)
}

/// Accumulated squared gradients, one entry per parameter entry.
pub struct AdaGradState {
    pub accumulator: Gradients,
}

impl AdaGradState {
    pub fn new(params: &ModelParams) -> AdaGradState {
        AdaGradState { accumulator: Gradients::zeros_like(params) }
    }
}

/// One AdaGrad step: `state += g²; θ -= η · g / (√state + ε)` elementwise.
/// Entries with a zero gradient are untouched.
pub fn adagrad_update(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdaGradState,
    config: &TrainConfig,
) {
    let lr = config.base_learning_rate;
    let eps = config.adagrad_epsilon;
    for ((p, g), s) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.accumulator.tensors_mut())
    {
        assert_eq!(p.len(), g.len(), "gradient shape mismatch");
        for i in 0..p.len() {
            let gi = g[i];
            if gi != 0.0 {
                s[i] += gi * gi;
                p[i] -= lr * gi / (s[i].sqrt() + eps);
            }
        }
    }
}

/// One row of the training history. Train loss and accuracy are measured
/// over the epoch's minibatch passes (before each update); test accuracy is
/// measured after the epoch. Row zero is a clean pre-training evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Unregularized loss plus the ½λ‖θ‖² penalty the L2 gradient term
    /// corresponds to, measured at the end of the epoch.
    pub train_loss_regularized: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrain,
    #[error(transparent)]
    Vocabulary(#[from] ModelError),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },
}

/// Headered TSV rendering of a training history.
pub fn history_to_tsv(history: &[EpochStats]) -> String {
    let mut out = String::from("epoch\ttrain_loss\ttrain_acc\ttest_acc\ttrain_loss_reg\n");
    for row in history {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
            row.epoch, row.train_loss, row.train_accuracy, row.test_accuracy, row.train_loss_regularized
        ));
    }
    out
}

fn evaluate_examples(examples: &[IndexedExample], params: &ModelParams) -> (f64, f64) {
    if examples.is_empty() {
        return (0.0, 0.0);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for ex in examples {
        let trace = forward_indexed(&ex.left, &ex.right, params);
        loss += -trace.probabilities[ex.gold.index()].ln();
        if trace.predicted() == ex.gold {
            correct += 1;
        }
    }
    (loss / examples.len() as f64, correct as f64 / examples.len() as f64)
}

fn l2_penalty(params: &ModelParams, lambda: f64) -> f64 {
    let sq: f64 = params.tensors().iter().map(|(_, t)| t.iter().map(|v| v * v).sum::<f64>()).sum();
    0.5 * lambda * sq
}

/// Trains a model on a split. Deterministic given the config seed; returns
/// the parameters of the epoch with the best training accuracy (latest on
/// ties) and the full history.
pub fn train(
    split: &Split,
    vocab: Vec<String>,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if split.train.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(config.seed, "init"));
    let mut params = ModelParams::new(
        vocab,
        config.word_dim,
        config.comparison_dim,
        config.variant,
        &mut rng,
    );
    let train_examples = index_pairs(&split.train, &params)?;
    let test_pairs: Vec<LabeledPair> = split.test.iter().map(|(p, _)| p.clone()).collect();
    let test_examples = index_pairs(&test_pairs, &params)?;

    let mut state = AdaGradState::new(&params);
    let mut history = Vec::with_capacity(config.max_epochs + 1);

    let (loss0, acc0) = evaluate_examples(&train_examples, &params);
    let (_, test_acc0) = evaluate_examples(&test_examples, &params);
    history.push(EpochStats {
        epoch: 0,
        train_loss: loss0,
        train_accuracy: acc0,
        test_accuracy: test_acc0,
        train_loss_regularized: loss0 + l2_penalty(&params, config.l2_lambda),
    });

    let mut best_params = params.clone();
    let mut best_epoch = 0usize;
    let mut best_accuracy = acc0;
    // The checkpoint refreshes on ties so it tracks the latest peak, but the
    // patience clock only resets on strict improvement.
    let mut last_improvement = 0usize;

    let mut order: Vec<usize> = (0..train_examples.len()).collect();
    for epoch in 1..=config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(config.seed, &format!("epoch.{epoch}")));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&IndexedExample> = chunk.iter().map(|&i| &train_examples[i]).collect();
            let (mean_loss, batch_correct, grads) =
                batch_gradient_refs(&batch, &params, config.l2_lambda);
            loss_sum += mean_loss * batch.len() as f64;
            correct += batch_correct;
            adagrad_update(&mut params, &grads, &mut state, config);
        }

        let train_loss = loss_sum / train_examples.len() as f64;
        if !train_loss.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        let train_accuracy = correct as f64 / train_examples.len() as f64;
        let (_, test_accuracy) = evaluate_examples(&test_examples, &params);
        history.push(EpochStats {
            epoch,
            train_loss,
            train_accuracy,
            test_accuracy,
            train_loss_regularized: train_loss + l2_penalty(&params, config.l2_lambda),
        });

        if train_accuracy > best_accuracy {
            last_improvement = epoch;
        }
        if train_accuracy >= best_accuracy {
            best_accuracy = train_accuracy;
            best_epoch = epoch;
            best_params = params.clone();
        }
        if epoch - last_improvement >= config.early_stop_patience {
            break;
        }
    }

    Ok(TrainOutcome { params: best_params, history, best_epoch })
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TensorCheck {
    pub name: &'static str,
    pub max_relative_error: f64,
    pub entries_checked: usize,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub per_tensor: Vec<TensorCheck>,
    pub max_relative_error: f64,
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.per_tensor {
            writeln!(
                f,
                "{:-24} entries {:5}  max relative error {:.3e}",
                t.name, t.entries_checked, t.max_relative_error
            )?;
        }
        write!(f, "overall max relative error {:.3e}", self.max_relative_error)
    }
}

fn total_loss(examples: &[IndexedExample], params: &ModelParams) -> f64 {
    examples
        .iter()
        .map(|ex| {
            let trace = forward_indexed(&ex.left, &ex.right, params);
            -trace.probabilities[ex.gold.index()].ln()
        })
        .sum()
}

/// Compares analytic gradients of the summed loss against central finite
/// differences, entry by entry. `mangle` post-processes the analytic
/// gradients and exists so tests can prove the check catches a corrupted
/// backward pass.
pub fn grad_check_with(
    params: &ModelParams,
    examples: &[IndexedExample],
    epsilon: f64,
    mangle: impl Fn(&mut Gradients),
) -> GradCheckReport {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut analytic = Gradients::zeros_like(params);
    for ex in examples {
        let trace = forward_indexed(&ex.left, &ex.right, params);
        let (_, grads) = backward(&trace, ex.gold, params);
        analytic.add_assign(&grads);
    }
    mangle(&mut analytic);

    let names: Vec<&'static str> = params.tensors().iter().map(|(n, _)| *n).collect();
    let mut work = params.clone();
    let mut per_tensor = Vec::new();
    let mut overall: f64 = 0.0;
    for (t, name) in names.iter().enumerate() {
        let len = params.tensors()[t].1.len();
        let mut max_err: f64 = 0.0;
        for i in 0..len {
            let original = params.tensors()[t].1[i];
            work.tensors_mut()[t][i] = original + epsilon;
            let up = total_loss(examples, &work);
            work.tensors_mut()[t][i] = original - epsilon;
            let down = total_loss(examples, &work);
            work.tensors_mut()[t][i] = original;
            let numeric = (up - down) / (2.0 * epsilon);
            let a = analytic.tensors()[t][i];
            // Entries whose gradient sits below the floor carry no signal
            // about derivative correctness; without the floor, central
            // differences of a loss of order one bottom out near 1e-9 of
            // absolute noise and would dominate the relative error.
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            max_err = max_err.max(err);
        }
        overall = overall.max(max_err);
        per_tensor.push(TensorCheck { name, max_relative_error: max_err, entries_checked: len });
    }
    GradCheckReport { per_tensor, max_relative_error: overall }
}

/// Gradient check of the current backward pass on the given examples.
pub fn grad_check(
    params: &ModelParams,
    examples: &[IndexedExample],
    epsilon: f64,
) -> GradCheckReport {
    grad_check_with(params, examples, epsilon, |_| {})
}

/// Minimum distance of any comparison-layer pre-activation from the
/// rectifier kink across the examples. Checks with a margin comfortably
/// above epsilon cannot be polluted by the kink.
pub fn kink_margin(params: &ModelParams, examples: &[IndexedExample]) -> f64 {
    let mut margin = f64::INFINITY;
    for ex in examples {
        let trace = forward_indexed(&ex.left, &ex.right, params);
        // Invert the rectifier: y >= 0 -> z = y, y < 0 -> z = y / 0.01.
        for preact in trace
            .comparison_output()
            .iter()
            .map(|&y| if y < 0.0 { y / 0.01 } else { y })
        {
            margin = margin.min(preact.abs());
        }
    }
    margin
}

/// Builds a miniature randomly initialized model (4-dimensional words, a
/// 6-dimensional comparison layer) and random tree pairs covering plain and
/// negated shapes, then returns them for checking. Parameters are scaled up
/// from the training initialization so gradient magnitudes sit well above
/// finite-difference noise, and example sets with pre-activations near the
/// rectifier kink are rejected.
pub fn gradcheck_harness(
    seed: u64,
    variant: Variant,
    example_count: usize,
) -> (ModelParams, Vec<IndexedExample>) {
    use crate::grammar::{CompositionContext, CompositionTree};
    use rand::Rng;

    let vocab: Vec<String> =
        ["qa", "qb", "pa", "pb", "pc", "pd", "not"].iter().map(|s| s.to_string()).collect();
    for attempt in 0.. {
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, &format!("gradcheck.{attempt}")));
        let mut params = ModelParams::new(vocab.clone(), 4, 6, variant, &mut rng);
        for tensor in params.tensors_mut() {
            for v in tensor.iter_mut() {
                *v *= 5.0;
            }
        }
        let mut examples = Vec::new();
        for _ in 0..example_count {
            let pick = |rng: &mut ChaCha8Rng| ["pa", "pb", "pc", "pd"][rng.gen_range(0..4)];
            let quant = |rng: &mut ChaCha8Rng| ["qa", "qb"][rng.gen_range(0..2)];
            let side = |rng: &mut ChaCha8Rng| {
                let arg1: CompositionTree = if rng.gen_bool(0.4) {
                    CompositionTree::node(
                        CompositionContext::Negation,
                        CompositionTree::leaf("not"),
                        CompositionTree::leaf(pick(rng)),
                    )
                } else {
                    CompositionTree::leaf(pick(rng))
                };
                let arg2: CompositionTree = if rng.gen_bool(0.4) {
                    CompositionTree::node(
                        CompositionContext::Negation,
                        CompositionTree::leaf("not"),
                        CompositionTree::leaf(pick(rng)),
                    )
                } else {
                    CompositionTree::leaf(pick(rng))
                };
                CompositionTree::node(
                    CompositionContext::QuantifierSecondArg,
                    CompositionTree::node(
                        CompositionContext::QuantifierFirstArg,
                        CompositionTree::leaf(quant(rng)),
                        arg1,
                    ),
                    arg2,
                )
            };
            let left = side(&mut rng);
            let right = side(&mut rng);
            let gold = crate::relation::ALL_RELATIONS[rng.gen_range(0..7)];
            examples.push(IndexedExample {
                left: params.index_tree(&left).unwrap(),
                right: params.index_tree(&right).unwrap(),
                gold,
            });
        }
        if kink_margin(&params, &examples) > 1e-4 {
            return (params, examples);
        }
    }
    unreachable!()
}
