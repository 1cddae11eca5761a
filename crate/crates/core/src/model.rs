//! The tree-structured tensor network: embedding lookup, a bilinear+affine
//! composition layer under tanh applied up each sentence tree, a comparison
//! layer of the same shape under a leaky rectifier across the two sentence
//! vectors, and a softmax classifier over the seven relations.
//!
//! Per node, composition computes
//! `y_i = tanh(xlᵀ A_i xr + B_i [xl; xr] + c_i)`; comparison is identical in
//! shape with its own parameters and the leaky rectifier. The backward pass
//! is exact backpropagation through the per-example tree structure: gradient
//! contributions of repeated parameter uses (and repeated words) are summed.
//!
//! An untied variant carries three separately parametrized composition
//! functions selected by the node context (negation, quantifier plus first
//! argument, quantifier phrase plus second argument).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::grammar::{CompositionContext, CompositionTree};
use crate::relation::{Relation, ALL_RELATIONS};
use crate::tensor::{affine, bilinear, leaky_relu, softmax, tanh_vec, Matrix, Tensor3};

pub const RELATION_COUNT: usize = 7;
/// Default word-vector dimensionality.
pub const DEFAULT_WORD_DIM: usize = 16;
/// Default comparison feature dimensionality.
pub const DEFAULT_COMPARISON_DIM: usize = 45;
/// Parameter initialization range.
pub const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Tied,
    Untied,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Tied => "tied",
            Variant::Untied => "untied",
        }
    }

    pub fn parse_name(s: &str) -> Option<Variant> {
        Some(match s {
            "tied" => Variant::Tied,
            "untied" => Variant::Untied,
            _ => return None,
        })
    }
}

/// One bilinear+affine layer: `slices` square slices over inputs of size
/// `dim`, a `slices × 2·dim` linear map, and a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub tensor: Tensor3,
    pub linear: Matrix,
    pub bias: Vec<f64>,
}

impl LayerParams {
    fn uniform(rng: &mut impl Rng, slices: usize, dim: usize) -> LayerParams {
        LayerParams {
            tensor: Tensor3::uniform(rng, slices, dim, -INIT_RANGE, INIT_RANGE),
            linear: Matrix::uniform(rng, slices, 2 * dim, -INIT_RANGE, INIT_RANGE),
            bias: crate::tensor::init_uniform(rng, -INIT_RANGE, INIT_RANGE, slices),
        }
    }

    fn zeros(slices: usize, dim: usize) -> LayerParams {
        LayerParams {
            tensor: Tensor3::zeros(slices, dim),
            linear: Matrix::zeros(slices, 2 * dim),
            bias: vec![0.0; slices],
        }
    }

    /// Pre-activation `xlᵀ A xr + B [xl; xr] + c`.
    fn preactivation(&self, xl: &[f64], xr: &[f64]) -> Vec<f64> {
        let mut z = affine(&self.linear, xl, xr, &self.bias);
        let bil = bilinear(&self.tensor, xl, xr);
        for (zi, bi) in z.iter_mut().zip(&bil) {
            *zi += bi;
        }
        z
    }

    /// Accumulates layer gradients for pre-activation deltas and returns the
    /// deltas of the two inputs.
    fn backward(
        &self,
        grads: &mut LayerParams,
        xl: &[f64],
        xr: &[f64],
        dz: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let dim = self.tensor.dim;
        let mut dxl = vec![0.0; dim];
        let mut dxr = vec![0.0; dim];
        for (i, &d) in dz.iter().enumerate() {
            grads.bias[i] += d;
            // dB_i = d · [xl; xr]; dz flows into both inputs through B.
            let row = grads.linear.row_mut(i);
            crate::tensor::axpy(d, xl, &mut row[..dim]);
            crate::tensor::axpy(d, xr, &mut row[dim..]);
            let w = self.linear.row(i);
            crate::tensor::axpy(d, &w[..dim], &mut dxl);
            crate::tensor::axpy(d, &w[dim..], &mut dxr);
            if d != 0.0 {
                // dA_i = d · xl xrᵀ; dxl += d · A_i xr; dxr += d · A_iᵀ xl.
                let slice = self.tensor.slice(i);
                let gslice = grads.tensor.slice_mut(i);
                for j in 0..dim {
                    let gr = &mut gslice[j * dim..(j + 1) * dim];
                    crate::tensor::axpy(d * xl[j], xr, gr);
                    let ar = &slice[j * dim..(j + 1) * dim];
                    dxl[j] += d * crate::tensor::dot(ar, xr);
                    crate::tensor::axpy(d * xl[j], ar, &mut dxr);
                }
            }
        }
        (dxl, dxr)
    }
}

/// Composition parameters: one set, or three sets keyed by node context.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionSet {
    Tied(LayerParams),
    Untied { negation: LayerParams, first_arg: LayerParams, second_arg: LayerParams },
}

impl CompositionSet {
    pub fn variant(&self) -> Variant {
        match self {
            CompositionSet::Tied(_) => Variant::Tied,
            CompositionSet::Untied { .. } => Variant::Untied,
        }
    }
}

/// Returns the composition parameter set for a node context: the single set
/// when tied, the context-matched set when untied.
pub fn select_composition_params(
    context: CompositionContext,
    composition: &CompositionSet,
) -> &LayerParams {
    match composition {
        CompositionSet::Tied(p) => p,
        CompositionSet::Untied { negation, first_arg, second_arg } => match context {
            CompositionContext::Negation => negation,
            CompositionContext::QuantifierFirstArg => first_arg,
            CompositionContext::QuantifierSecondArg => second_arg,
        },
    }
}

fn select_composition_params_mut(
    context: CompositionContext,
    composition: &mut CompositionSet,
) -> &mut LayerParams {
    match composition {
        CompositionSet::Tied(p) => p,
        CompositionSet::Untied { negation, first_arg, second_arg } => match context {
            CompositionContext::Negation => negation,
            CompositionContext::QuantifierFirstArg => first_arg,
            CompositionContext::QuantifierSecondArg => second_arg,
        },
    }
}

/// All trainable parameters, including the vocabulary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    vocab: Vec<String>,
    vocab_index: BTreeMap<String, usize>,
    pub word_dim: usize,
    pub comparison_dim: usize,
    /// One row per vocabulary token.
    pub embeddings: Matrix,
    pub composition: CompositionSet,
    pub comparison: LayerParams,
    pub classifier_weights: Matrix,
    pub classifier_bias: Vec<f64>,
}

impl ModelParams {
    /// Fresh parameters, every entry uniform in `[-0.1, 0.1]`.
    pub fn new(
        vocab: Vec<String>,
        word_dim: usize,
        comparison_dim: usize,
        variant: Variant,
        rng: &mut impl Rng,
    ) -> ModelParams {
        let vocab_index =
            vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect::<BTreeMap<_, _>>();
        assert_eq!(vocab_index.len(), vocab.len(), "duplicate vocabulary tokens");
        let embeddings = Matrix::uniform(rng, vocab.len(), word_dim, -INIT_RANGE, INIT_RANGE);
        let composition = match variant {
            Variant::Tied => CompositionSet::Tied(LayerParams::uniform(rng, word_dim, word_dim)),
            Variant::Untied => CompositionSet::Untied {
                negation: LayerParams::uniform(rng, word_dim, word_dim),
                first_arg: LayerParams::uniform(rng, word_dim, word_dim),
                second_arg: LayerParams::uniform(rng, word_dim, word_dim),
            },
        };
        ModelParams {
            vocab,
            vocab_index,
            word_dim,
            comparison_dim,
            embeddings,
            composition,
            comparison: LayerParams::uniform(rng, comparison_dim, word_dim),
            classifier_weights: Matrix::uniform(
                rng,
                RELATION_COUNT,
                comparison_dim,
                -INIT_RANGE,
                INIT_RANGE,
            ),
            classifier_bias: crate::tensor::init_uniform(
                rng,
                -INIT_RANGE,
                INIT_RANGE,
                RELATION_COUNT,
            ),
        }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn variant(&self) -> Variant {
        self.composition.variant()
    }

    pub fn token_index(&self, token: &str) -> Option<usize> {
        self.vocab_index.get(token).copied()
    }

    /// All parameter tensors as named flat slices, in the fixed canonical
    /// order used by the optimizer, the checkpoint format, and the gradient
    /// checker.
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out: Vec<(&'static str, &[f64])> = vec![("embeddings", &self.embeddings.data)];
        match &self.composition {
            CompositionSet::Tied(p) => {
                out.push(("compose.tensor", &p.tensor.data));
                out.push(("compose.linear", &p.linear.data));
                out.push(("compose.bias", &p.bias));
            }
            CompositionSet::Untied { negation, first_arg, second_arg } => {
                for (tag, p) in [
                    ("compose.negation", negation),
                    ("compose.first", first_arg),
                    ("compose.second", second_arg),
                ] {
                    // Leak-free static-ish names: fixed set, spelled out.
                    let (t, l, b) = match tag {
                        "compose.negation" => (
                            "compose.negation.tensor",
                            "compose.negation.linear",
                            "compose.negation.bias",
                        ),
                        "compose.first" => (
                            "compose.first.tensor",
                            "compose.first.linear",
                            "compose.first.bias",
                        ),
                        _ => (
                            "compose.second.tensor",
                            "compose.second.linear",
                            "compose.second.bias",
                        ),
                    };
                    out.push((t, &p.tensor.data));
                    out.push((l, &p.linear.data));
                    out.push((b, &p.bias));
                }
            }
        }
        out.push(("compare.tensor", &self.comparison.tensor.data));
        out.push(("compare.linear", &self.comparison.linear.data));
        out.push(("compare.bias", &self.comparison.bias));
        out.push(("classifier.weights", &self.classifier_weights.data));
        out.push(("classifier.bias", &self.classifier_bias));
        out
    }

    /// Mutable view of the same tensors in the same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.embeddings.data];
        match &mut self.composition {
            CompositionSet::Tied(p) => {
                out.push(&mut p.tensor.data);
                out.push(&mut p.linear.data);
                out.push(&mut p.bias);
            }
            CompositionSet::Untied { negation, first_arg, second_arg } => {
                for p in [negation, first_arg, second_arg] {
                    out.push(&mut p.tensor.data);
                    out.push(&mut p.linear.data);
                    out.push(&mut p.bias);
                }
            }
        }
        out.push(&mut self.comparison.tensor.data);
        out.push(&mut self.comparison.linear.data);
        out.push(&mut self.comparison.bias);
        out.push(&mut self.classifier_weights.data);
        out.push(&mut self.classifier_bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Gradients (or any parameter-shaped accumulator): the same structure as
/// [`ModelParams`] minus the vocabulary strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: Matrix,
    pub composition: CompositionSet,
    pub comparison: LayerParams,
    pub classifier_weights: Matrix,
    pub classifier_bias: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Gradients {
        let (n, c) = (params.word_dim, params.comparison_dim);
        Gradients {
            embeddings: Matrix::zeros(params.vocab.len(), n),
            composition: match params.variant() {
                Variant::Tied => CompositionSet::Tied(LayerParams::zeros(n, n)),
                Variant::Untied => CompositionSet::Untied {
                    negation: LayerParams::zeros(n, n),
                    first_arg: LayerParams::zeros(n, n),
                    second_arg: LayerParams::zeros(n, n),
                },
            },
            comparison: LayerParams::zeros(c, n),
            classifier_weights: Matrix::zeros(RELATION_COUNT, c),
            classifier_bias: vec![0.0; RELATION_COUNT],
        }
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.embeddings.data];
        match &self.composition {
            CompositionSet::Tied(p) => {
                out.push(&p.tensor.data);
                out.push(&p.linear.data);
                out.push(&p.bias);
            }
            CompositionSet::Untied { negation, first_arg, second_arg } => {
                for p in [negation, first_arg, second_arg] {
                    out.push(&p.tensor.data);
                    out.push(&p.linear.data);
                    out.push(&p.bias);
                }
            }
        }
        out.push(&self.comparison.tensor.data);
        out.push(&self.comparison.linear.data);
        out.push(&self.comparison.bias);
        out.push(&self.classifier_weights.data);
        out.push(&self.classifier_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.embeddings.data];
        match &mut self.composition {
            CompositionSet::Tied(p) => {
                out.push(&mut p.tensor.data);
                out.push(&mut p.linear.data);
                out.push(&mut p.bias);
            }
            CompositionSet::Untied { negation, first_arg, second_arg } => {
                for p in [negation, first_arg, second_arg] {
                    out.push(&mut p.tensor.data);
                    out.push(&mut p.linear.data);
                    out.push(&mut p.bias);
                }
            }
        }
        out.push(&mut self.comparison.tensor.data);
        out.push(&mut self.comparison.linear.data);
        out.push(&mut self.comparison.bias);
        out.push(&mut self.classifier_weights.data);
        out.push(&mut self.classifier_bias);
        out
    }

    /// `self += other`
    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            crate::tensor::axpy(1.0, b, a);
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token {0:?} is not in the model vocabulary")]
    OutOfVocabulary(String),
}

/// A composition tree with leaves resolved to vocabulary rows. Trees are
/// indexed once so the training loop does no string work.
#[derive(Debug, Clone)]
pub enum IndexedTree {
    Leaf(usize),
    Node { context: CompositionContext, left: Box<IndexedTree>, right: Box<IndexedTree> },
}

impl ModelParams {
    pub fn index_tree(&self, tree: &CompositionTree) -> Result<IndexedTree, ModelError> {
        Ok(match tree {
            CompositionTree::Leaf(tok) => IndexedTree::Leaf(
                self.token_index(tok)
                    .ok_or_else(|| ModelError::OutOfVocabulary(tok.clone()))?,
            ),
            CompositionTree::Node { context, left, right } => IndexedTree::Node {
                context: *context,
                left: Box::new(self.index_tree(left)?),
                right: Box::new(self.index_tree(right)?),
            },
        })
    }
}

/// Cached activations of one tree, mirroring its shape.
#[derive(Debug, Clone)]
enum TraceNode {
    Leaf {
        row: usize,
        output: Vec<f64>,
    },
    Node {
        context: CompositionContext,
        left: Box<TraceNode>,
        right: Box<TraceNode>,
        output: Vec<f64>,
    },
}

impl TraceNode {
    fn output(&self) -> &[f64] {
        match self {
            TraceNode::Leaf { output, .. } | TraceNode::Node { output, .. } => output,
        }
    }
}

/// Everything the backward pass needs: per-node activations on both sides,
/// the comparison feature, and the predicted distribution.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    left: TraceNode,
    right: TraceNode,
    comparison_output: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl ForwardTrace {
    pub fn predicted(&self) -> Relation {
        predict_from_probabilities(&self.probabilities)
    }

    /// The rectified comparison feature vector.
    pub fn comparison_output(&self) -> &[f64] {
        &self.comparison_output
    }
}

/// Argmax with ties broken by the canonical relation order.
pub fn predict_from_probabilities(probabilities: &[f64]) -> Relation {
    let mut best = 0usize;
    for i in 1..probabilities.len() {
        if probabilities[i] > probabilities[best] {
            best = i;
        }
    }
    ALL_RELATIONS[best]
}

fn forward_node(tree: &IndexedTree, params: &ModelParams) -> TraceNode {
    match tree {
        IndexedTree::Leaf(row) => {
            TraceNode::Leaf { row: *row, output: params.embeddings.row(*row).to_vec() }
        }
        IndexedTree::Node { context, left, right } => {
            let l = forward_node(left, params);
            let r = forward_node(right, params);
            let layer = select_composition_params(*context, &params.composition);
            let z = layer.preactivation(l.output(), r.output());
            TraceNode::Node {
                context: *context,
                left: Box::new(l),
                right: Box::new(r),
                output: tanh_vec(&z),
            }
        }
    }
}

/// Runs the network over an indexed pair of trees.
pub fn forward_indexed(left: &IndexedTree, right: &IndexedTree, params: &ModelParams) -> ForwardTrace {
    let l = forward_node(left, params);
    let r = forward_node(right, params);
    let z = params.comparison.preactivation(l.output(), r.output());
    let comparison_output = leaky_relu(&z);
    let mut logits = params.classifier_bias.clone();
    let mut acc = vec![0.0; RELATION_COUNT];
    params.classifier_weights.matvec_into(&comparison_output, &mut acc);
    for (l, a) in logits.iter_mut().zip(&acc) {
        *l += a;
    }
    let probabilities = softmax(&logits);
    ForwardTrace { left: l, right: r, comparison_output, probabilities }
}

/// Runs the network over a pair of composition trees, resolving tokens
/// against the vocabulary. Returns the distribution over the seven relations
/// together with the trace needed for the backward pass.
pub fn forward(
    left: &CompositionTree,
    right: &CompositionTree,
    params: &ModelParams,
) -> Result<(Vec<f64>, ForwardTrace), ModelError> {
    let li = params.index_tree(left)?;
    let ri = params.index_tree(right)?;
    let trace = forward_indexed(&li, &ri, params);
    Ok((trace.probabilities.clone(), trace))
}

fn backward_node(node: &TraceNode, delta: &[f64], params: &ModelParams, grads: &mut Gradients) {
    match node {
        TraceNode::Leaf { row, .. } => {
            // Repeated words accumulate one summed gradient row.
            crate::tensor::axpy(1.0, delta, grads.embeddings.row_mut(*row));
        }
        TraceNode::Node { context, left, right, output } => {
            // tanh'(z) from the cached output: 1 - y².
            let dz: Vec<f64> =
                delta.iter().zip(output).map(|(d, y)| d * (1.0 - y * y)).collect();
            let layer = select_composition_params(*context, &params.composition);
            let glayer = select_composition_params_mut(*context, &mut grads.composition);
            let (dl, dr) = layer.backward(glayer, left.output(), right.output(), &dz);
            backward_node(left, &dl, params, grads);
            backward_node(right, &dr, params, grads);
        }
    }
}

/// Leaky-rectifier derivative from the cached output; the output and the
/// pre-activation always share a sign, and the subgradient at zero takes the
/// positive branch.
fn leaky_slope(y: f64) -> f64 {
    if y < 0.0 {
        0.01
    } else {
        1.0
    }
}

/// Exact gradients of `-log p(gold)` with respect to every parameter,
/// including the word vectors.
pub fn backward(trace: &ForwardTrace, gold: Relation, params: &ModelParams) -> (f64, Gradients) {
    let mut grads = Gradients::zeros_like(params);
    let loss = -trace.probabilities[gold.index()].ln();

    // Softmax cross-entropy: d(logits) = p - onehot(gold).
    let mut dlogits = trace.probabilities.clone();
    dlogits[gold.index()] -= 1.0;

    grads.classifier_weights.add_outer(1.0, &dlogits, &trace.comparison_output);
    crate::tensor::axpy(1.0, &dlogits, &mut grads.classifier_bias);

    let mut dcmp = vec![0.0; params.comparison_dim];
    params.classifier_weights.matvec_transpose_add(&dlogits, &mut dcmp);
    let dz: Vec<f64> = dcmp
        .iter()
        .zip(&trace.comparison_output)
        .map(|(d, y)| d * leaky_slope(*y))
        .collect();
    let (dl, dr) = params.comparison.backward(
        &mut grads.comparison,
        trace.left.output(),
        trace.right.output(),
        &dz,
    );
    backward_node(&trace.left, &dl, params, &mut grads);
    backward_node(&trace.right, &dr, params, &mut grads);
    (loss, grads)
}

/// One composition step in isolation: `tanh(xlᵀ A xr + B [xl; xr] + c)`.
pub fn compose(xl: &[f64], xr: &[f64], layer: &LayerParams) -> Vec<f64> {
    tanh_vec(&layer.preactivation(xl, xr))
}

/// One comparison step in isolation: the same form under the leaky rectifier.
pub fn compare(xl: &[f64], xr: &[f64], layer: &LayerParams) -> Vec<f64> {
    leaky_relu(&layer.preactivation(xl, xr))
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------
//
// Binary layout, little endian:
//   magic "NLTN", format version u32 = 1,
//   variant u8 (0 tied / 1 untied), word_dim u32, comparison_dim u32,
//   vocab_len u32, then per token: byte length u32 + UTF-8 bytes,
//   then every parameter tensor in canonical order (see
//   [`ModelParams::tensors`]) as raw f64 little-endian values.
// Loading a checkpoint restores the parameters bit for bit.

const CHECKPOINT_MAGIC: &[u8; 4] = b"NLTN";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<(), CheckpointError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.push(match params.variant() {
        Variant::Tied => 0,
        Variant::Untied => 1,
    });
    buf.extend_from_slice(&(params.word_dim as u32).to_le_bytes());
    buf.extend_from_slice(&(params.comparison_dim as u32).to_le_bytes());
    buf.extend_from_slice(&(params.vocab.len() as u32).to_le_bytes());
    for token in &params.vocab {
        buf.extend_from_slice(&(token.len() as u32).to_le_bytes());
        buf.extend_from_slice(token.as_bytes());
    }
    for (_, tensor) in params.tensors() {
        for v in tensor {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], CheckpointError> {
        let s = bytes
            .get(*pos..*pos + n)
            .ok_or_else(|| CheckpointError::Corrupt("truncated".into()))?;
        *pos += n;
        Ok(s)
    };
    let u32_at = |pos: &mut usize| -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap()))
    };

    if take(&mut pos, 4)? != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32_at(&mut pos)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let variant = match take(&mut pos, 1)?[0] {
        0 => Variant::Tied,
        1 => Variant::Untied,
        v => return Err(CheckpointError::Corrupt(format!("unknown variant byte {v}"))),
    };
    let word_dim = u32_at(&mut pos)? as usize;
    let comparison_dim = u32_at(&mut pos)? as usize;
    let vocab_len = u32_at(&mut pos)? as usize;
    let mut vocab = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        let len = u32_at(&mut pos)? as usize;
        let s = std::str::from_utf8(take(&mut pos, len)?)
            .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        vocab.push(s.to_string());
    }

    // Build a zero-shaped model, then fill every tensor in canonical order.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    use rand::SeedableRng;
    let mut params = ModelParams::new(vocab, word_dim, comparison_dim, variant, &mut rng);
    for tensor in params.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = f64::from_le_bytes(
                bytes
                    .get(pos..pos + 8)
                    .ok_or_else(|| CheckpointError::Corrupt("truncated tensor data".into()))?
                    .try_into()
                    .unwrap(),
            );
            pos += 8;
        }
    }
    if pos != bytes.len() {
        return Err(CheckpointError::Corrupt(format!(
            "{} trailing bytes",
            bytes.len() - pos
        )));
    }
    Ok(params)
}
