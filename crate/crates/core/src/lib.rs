//! Natural-logic entailment over a closed quantified fragment: a symbolic
//! labeling engine with two independent gold oracles, a procedural corpus
//! generator, and a tree-structured tensor network trained to predict the
//! seven entailment relations from sentence pairs.

pub mod datagen;
pub mod eval;
pub mod grammar;
pub mod lexicon;
pub mod model;
pub mod projectivity;
pub mod relation;
pub mod semantics;
pub mod tensor;
pub mod trainer;

pub use grammar::{parse, serialize, CompositionTree, Quantifier, Sentence};
pub use lexicon::Lexicon;
pub use relation::Relation;
