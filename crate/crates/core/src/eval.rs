//! Evaluation of a trained model over a tagged test partition: accuracy on
//! the target dataset, on all held-out datasets, and on the full test set,
//! plus per-dataset accuracies, a confusion matrix, and the predicted-label
//! histogram of the target dataset (the raw material for error analysis).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::datagen::{LabeledPair, SubsetTag};
use crate::grammar::to_tree;
use crate::model::{forward_indexed, ModelError, ModelParams};
use crate::relation::{Relation, ALL_RELATIONS};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SubsetAccuracy {
    pub pairs: usize,
    pub correct: usize,
}

impl SubsetAccuracy {
    pub fn accuracy(&self) -> f64 {
        if self.pairs == 0 {
            f64::NAN
        } else {
            self.correct as f64 / self.pairs as f64
        }
    }
}

/// Everything a hold-out experiment reports.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    /// The target dataset only (empty in the all-split setting).
    pub target_only: SubsetAccuracy,
    /// Every fully held-out dataset, the target included.
    pub all_held_out: SubsetAccuracy,
    /// The entire test partition.
    pub all_test: SubsetAccuracy,
    pub per_dataset: BTreeMap<String, SubsetAccuracy>,
    /// Rows are gold labels, columns predictions, canonical relation order.
    pub confusion: [[usize; 7]; 7],
    /// Predicted labels over the target dataset.
    pub target_histogram: [usize; 7],
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Vocabulary(#[from] ModelError),
}

/// Classifies every tagged test pair with the model. Argmax ties break
/// toward the canonical relation order.
pub fn evaluate(
    params: &ModelParams,
    test: &[(LabeledPair, SubsetTag)],
) -> Result<EvaluationReport, EvalError> {
    let mut report = EvaluationReport {
        target_only: SubsetAccuracy::default(),
        all_held_out: SubsetAccuracy::default(),
        all_test: SubsetAccuracy::default(),
        per_dataset: BTreeMap::new(),
        confusion: [[0; 7]; 7],
        target_histogram: [0; 7],
    };
    for (pair, tag) in test {
        let left = params.index_tree(&to_tree(&pair.left))?;
        let right = params.index_tree(&to_tree(&pair.right))?;
        let predicted = forward_indexed(&left, &right, params).predicted();
        let correct = predicted == pair.gold;

        report.confusion[pair.gold.index()][predicted.index()] += 1;
        let bump = |acc: &mut SubsetAccuracy| {
            acc.pairs += 1;
            acc.correct += usize::from(correct);
        };
        bump(&mut report.all_test);
        if matches!(tag, SubsetTag::HeldOut | SubsetTag::Target) {
            bump(&mut report.all_held_out);
        }
        if *tag == SubsetTag::Target {
            bump(&mut report.target_only);
            report.target_histogram[predicted.index()] += 1;
        }
        bump(report.per_dataset.entry(pair.dataset_id.clone()).or_default());
    }
    Ok(report)
}

impl EvaluationReport {
    /// The most frequently predicted relation on the target dataset.
    pub fn target_majority_prediction(&self) -> Option<Relation> {
        let total: usize = self.target_histogram.iter().sum();
        if total == 0 {
            return None;
        }
        let best = (0..7).max_by_key(|&i| (self.target_histogram[i], 7 - i)).unwrap();
        Some(ALL_RELATIONS[best])
    }

    /// Human-readable rendering.
    pub fn render_text(&self) -> String {
        let fmt_subset = |name: &str, s: &SubsetAccuracy| {
            if s.pairs == 0 {
                format!("{name:13} (empty)\n")
            } else {
                format!("{name:13} {:5}/{:5}  {:.4}\n", s.correct, s.pairs, s.accuracy())
            }
        };
        let mut out = String::new();
        out.push_str(&fmt_subset("target-only", &self.target_only));
        out.push_str(&fmt_subset("all-held-out", &self.all_held_out));
        out.push_str(&fmt_subset("all-test", &self.all_test));
        out.push('\n');
        out.push_str("confusion matrix (rows gold, columns predicted):\n     ");
        for r in ALL_RELATIONS {
            out.push_str(&format!("{:>6}", r.symbol()));
        }
        out.push('\n');
        for (gi, row) in self.confusion.iter().enumerate() {
            out.push_str(&format!("{:>5}", ALL_RELATIONS[gi].symbol()));
            for v in row {
                out.push_str(&format!("{v:>6}"));
            }
            out.push('\n');
        }
        if self.target_only.pairs > 0 {
            out.push_str("\npredicted labels on the target dataset:\n");
            for r in ALL_RELATIONS {
                let n = self.target_histogram[r.index()];
                if n > 0 {
                    out.push_str(&format!("  {}  {n}\n", r.symbol()));
                }
            }
        }
        out.push_str("\nper-dataset accuracy:\n");
        for (id, s) in &self.per_dataset {
            out.push_str(&format!("  {:44} {:4} pairs  {:.4}\n", id, s.pairs, s.accuracy()));
        }
        out
    }

    /// Machine-readable rendering: one record per line, tab separated, with
    /// a leading section column.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("section\tkey\tpairs\tcorrect\taccuracy\n");
        for (name, s) in [
            ("target-only", &self.target_only),
            ("all-held-out", &self.all_held_out),
            ("all-test", &self.all_test),
        ] {
            out.push_str(&format!(
                "subset\t{name}\t{}\t{}\t{}\n",
                s.pairs,
                s.correct,
                if s.pairs == 0 { "-".to_string() } else { format!("{:.6}", s.accuracy()) }
            ));
        }
        for (id, s) in &self.per_dataset {
            out.push_str(&format!(
                "dataset\t{id}\t{}\t{}\t{:.6}\n",
                s.pairs,
                s.correct,
                s.accuracy()
            ));
        }
        for (gi, row) in self.confusion.iter().enumerate() {
            for (pi, v) in row.iter().enumerate() {
                if *v > 0 {
                    out.push_str(&format!(
                        "confusion\t{}->{}\t{v}\t-\t-\n",
                        ALL_RELATIONS[gi].symbol(),
                        ALL_RELATIONS[pi].symbol()
                    ));
                }
            }
        }
        for r in ALL_RELATIONS {
            let n = self.target_histogram[r.index()];
            if n > 0 {
                out.push_str(&format!("target-histogram\t{}\t{n}\t-\t-\n", r.symbol()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{Predicate, Quantifier, Sentence};
    use crate::lexicon::Lexicon;
    use crate::model::Variant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(q: Quantifier, a: &str, b: &str, gold: Relation, id: &str) -> LabeledPair {
        LabeledPair {
            left: Sentence::new(q, Predicate::plain(a), Predicate::plain(b)),
            right: Sentence::new(Quantifier::Some, Predicate::plain(a), Predicate::plain(b)),
            gold,
            dataset_id: id.to_string(),
        }
    }

    fn test_partition() -> (ModelParams, Vec<(LabeledPair, SubsetTag)>) {
        let lex = Lexicon::default_lexicon().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = ModelParams::new(lex.vocabulary(), 4, 6, Variant::Tied, &mut rng);
        let test = vec![
            (pair(Quantifier::All, "dog", "bark", Relation::ForwardEntailment, "a"), SubsetTag::SplitSlice),
            (pair(Quantifier::No, "dog", "bark", Relation::Negation, "b"), SubsetTag::HeldOut),
            (pair(Quantifier::Most, "dog", "bark", Relation::ReverseEntailment, "c"), SubsetTag::Target),
            (pair(Quantifier::Two, "cat", "bark", Relation::Independence, "c"), SubsetTag::Target),
        ];
        (params, test)
    }

    #[test]
    fn subsets_nest_and_sum() {
        let (params, test) = test_partition();
        let report = evaluate(&params, &test).unwrap();
        assert_eq!(report.all_test.pairs, 4);
        assert_eq!(report.all_held_out.pairs, 3);
        assert_eq!(report.target_only.pairs, 2);
        // Subset counts recombine exactly: split slices plus held-out pairs
        // cover the test set.
        let split_pairs = report.all_test.pairs - report.all_held_out.pairs;
        let split_correct = report.all_test.correct - report.all_held_out.correct;
        assert_eq!(split_pairs, 1);
        assert!(split_correct <= split_pairs);
        let confusion_total: usize = report.confusion.iter().flatten().sum();
        assert_eq!(confusion_total, 4);
        let hist_total: usize = report.target_histogram.iter().sum();
        assert_eq!(hist_total, 2);
        // Weighted recombination of the disjoint subsets equals the overall
        // accuracy identically.
        let (n1, c1) = (split_pairs as f64, split_correct as f64);
        let (n2, c2) = (report.all_held_out.pairs as f64, report.all_held_out.correct as f64);
        let recombined = (c1 + c2) / (n1 + n2);
        assert!((recombined - report.all_test.accuracy()).abs() < 1e-12);
    }

    #[test]
    fn perfect_model_scores_one() {
        // Force perfection by using the model's own predictions as gold.
        let (params, mut test) = test_partition();
        for (p, _) in &mut test {
            let left = params.index_tree(&to_tree(&p.left)).unwrap();
            let right = params.index_tree(&to_tree(&p.right)).unwrap();
            p.gold = forward_indexed(&left, &right, &params).predicted();
        }
        let report = evaluate(&params, &test).unwrap();
        assert_eq!(report.all_test.accuracy(), 1.0);
        assert_eq!(report.target_only.accuracy(), 1.0);
        // Everything sits on the diagonal.
        for (gi, row) in report.confusion.iter().enumerate() {
            for (pi, v) in row.iter().enumerate() {
                if gi != pi {
                    assert_eq!(*v, 0);
                }
            }
        }
    }

    #[test]
    fn renders_are_well_formed() {
        let (params, test) = test_partition();
        let report = evaluate(&params, &test).unwrap();
        let text = report.render_text();
        assert!(text.contains("target-only"));
        assert!(text.contains("confusion matrix"));
        let tsv = report.render_tsv();
        assert!(tsv.starts_with("section\tkey"));
        assert!(tsv.contains("subset\tall-test\t4"));
        assert!(report.target_majority_prediction().is_some());
    }
}
