//! Natural-logic gold-labeling oracle.
//!
//! A pair is decomposed into atomic edits (quantifier substitution, argument
//! substitution, negation toggling). Each edit contributes the sentence-level
//! relation it introduces — a lexical relation projected through the position
//! it occurs in, or a quantifier-pair relation — and the per-edit relations
//! are folded with `join` into a single label.
//!
//! Join loses information on some orderings, so every edit order is tried:
//! any order that yields a relation other than independence is exact, and
//! distinct orders can never yield conflicting non-independent answers. The
//! inner-negation dualities `no x (not y) = all x y` and `all x (not y) =
//! no x y` are applied first, which keeps pairs like `(all x) bark` versus
//! `(no x) (not bark)` exactly labeled.
//!
//! All table constants here are fixed by the set-level semantics; the test
//! suite checks every entry against the model-checking oracle.

use thiserror::Error;

use crate::grammar::{Quantifier, Sentence};
use crate::lexicon::Lexicon;
use crate::relation::{complement_left, complement_right, join, project_negation, Relation};

/// Argument position of a quantifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgPosition {
    First,
    Second,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NatLogError {
    #[error("sentence mentions {0:?}, which is not in the lexicon")]
    UnknownWord(String),
    #[error("no lexical relation between {0:?} and {1:?}")]
    NoLexicalEntry(String, String),
}

use Relation::{
    Alternation as A, Cover as C, Equivalence as E, ForwardEntailment as F, Independence as I,
    Negation as N, ReverseEntailment as R,
};

/// Projectivity signatures: the sentence-level relation produced by replacing
/// one argument of a quantifier with a predicate standing in the given
/// relation, everything else equal. Rows follow the canonical relation order.
const PROJ_FIRST: [[Relation; 7]; 6] = [
    // all: downward monotone in its first argument
    [E, R, F, I, A, A, I],
    // some: upward in both arguments
    [E, F, R, I, C, C, I],
    // no: downward in both arguments
    [E, R, F, I, A, A, I],
    // most: licenses nothing in its first argument
    [E, I, I, I, I, I, I],
    // two: upward, but numeric thresholds blur everything non-containment
    [E, F, R, I, I, I, I],
    // three
    [E, F, R, I, I, I, I],
];

const PROJ_SECOND: [[Relation; 7]; 6] = [
    // all: upward in its second argument
    [E, F, R, A, A, I, I],
    // some
    [E, F, R, I, C, C, I],
    // no
    [E, R, F, I, A, A, I],
    // most: upward in its second argument
    [E, F, R, A, A, I, I],
    // two
    [E, F, R, I, I, I, I],
    // three
    [E, F, R, I, I, I, I],
];

fn quantifier_index(q: Quantifier) -> usize {
    match q {
        Quantifier::All => 0,
        Quantifier::Some => 1,
        Quantifier::No => 2,
        Quantifier::Most => 3,
        Quantifier::Two => 4,
        Quantifier::Three => 5,
    }
}

/// Projects a relation between argument denotations through a quantifier
/// position to the relation between the resulting sentences.
pub fn project_quantifier(q: Quantifier, position: ArgPosition, r: Relation) -> Relation {
    match position {
        ArgPosition::First => PROJ_FIRST[quantifier_index(q)][r.index()],
        ArgPosition::Second => PROJ_SECOND[quantifier_index(q)][r.index()],
    }
}

/// Relation between `(q1 x) y` and `(q2 x) y`: substituting one quantifier
/// for another with both arguments fixed. Rows/columns in quantifier order
/// all, some, no, most, two, three.
const QUANT_SUBST: [[Relation; 6]; 6] = [
    [E, F, A, F, I, I],
    [R, E, N, R, R, R],
    [A, N, E, A, A, A],
    [R, F, A, E, I, I],
    [I, F, A, I, E, R],
    [I, F, A, I, F, E],
];

/// Relation introduced by substituting quantifier `from` with `to`.
pub fn quantifier_substitution(from: Quantifier, to: Quantifier) -> Relation {
    QUANT_SUBST[quantifier_index(from)][quantifier_index(to)]
}

/// Rewrites `all x (not y)` to `no x y` and `no x (not y)` to `all x y`;
/// both are denotation-preserving.
fn canonicalize(s: &Sentence) -> Sentence {
    if s.arg2.negated {
        let dual = match s.quantifier {
            Quantifier::All => Some(Quantifier::No),
            Quantifier::No => Some(Quantifier::All),
            _ => None,
        };
        if let Some(q) = dual {
            return Sentence::new(q, s.arg1.clone(), s.arg2.toggled());
        }
    }
    s.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Quantifier,
    Arg(ArgPosition),
}

/// Relation between the denotations of two (possibly negated) predicates.
fn argument_relation(
    lex: &Lexicon,
    from: &crate::grammar::Predicate,
    to: &crate::grammar::Predicate,
) -> Result<Relation, NatLogError> {
    for p in [from, to] {
        if !lex.contains(&p.name) {
            return Err(NatLogError::UnknownWord(p.name.clone()));
        }
    }
    let base = if from.name == to.name {
        Relation::Equivalence
    } else {
        lex.relation(&from.name, &to.name)
            .ok_or_else(|| NatLogError::NoLexicalEntry(from.name.clone(), to.name.clone()))?
    };
    Ok(match (from.negated, to.negated) {
        (false, false) => base,
        (true, true) => project_negation(base),
        (true, false) => complement_left(base),
        (false, true) => complement_right(base),
    })
}

fn fold_edits(
    left: &Sentence,
    right: &Sentence,
    order: &[Edit],
    lex: &Lexicon,
) -> Result<Relation, NatLogError> {
    let mut current = left.clone();
    let mut acc = Relation::Equivalence;
    for edit in order {
        let step = match edit {
            Edit::Quantifier => {
                let r = quantifier_substitution(current.quantifier, right.quantifier);
                current.quantifier = right.quantifier;
                r
            }
            Edit::Arg(pos) => {
                let (slot, target) = match pos {
                    ArgPosition::First => (&mut current.arg1, &right.arg1),
                    ArgPosition::Second => (&mut current.arg2, &right.arg2),
                };
                let denot = argument_relation(lex, slot, target)?;
                *slot = target.clone();
                project_quantifier(current.quantifier, *pos, denot)
            }
        };
        acc = join(acc, step);
    }
    debug_assert_eq!(&current, right);
    Ok(acc)
}

fn permutations(edits: &[Edit]) -> Vec<Vec<Edit>> {
    if edits.len() <= 1 {
        return vec![edits.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &e) in edits.iter().enumerate() {
        let mut rest = edits.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, e);
            out.push(tail);
        }
    }
    out
}

/// Labels a pair by edit decomposition, projection, and join.
pub fn label_pair_natlog(a: &Sentence, b: &Sentence, lex: &Lexicon) -> Result<Relation, NatLogError> {
    for s in [a, b] {
        for p in [&s.arg1, &s.arg2] {
            if !lex.contains(&p.name) {
                return Err(NatLogError::UnknownWord(p.name.clone()));
            }
        }
    }
    let left = canonicalize(a);
    let right = canonicalize(b);
    if left == right {
        return Ok(Relation::Equivalence);
    }

    let mut edits = Vec::new();
    if left.quantifier != right.quantifier {
        edits.push(Edit::Quantifier);
    }
    if left.arg1 != right.arg1 {
        edits.push(Edit::Arg(ArgPosition::First));
    }
    if left.arg2 != right.arg2 {
        edits.push(Edit::Arg(ArgPosition::Second));
    }

    // Every order is sound, and any order that resolves to something other
    // than independence is exact, so distinct non-independent outcomes are
    // impossible with consistent tables.
    let mut outcome = Relation::Independence;
    for order in permutations(&edits) {
        let r = fold_edits(&left, &right, &order, lex)?;
        if r != Relation::Independence {
            debug_assert!(
                outcome == Relation::Independence || outcome == r,
                "edit orders disagree: {outcome:?} vs {r:?} for {left} / {right}"
            );
            outcome = r;
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse, ALL_QUANTIFIERS};
    use crate::relation::ALL_RELATIONS;
    use crate::semantics::ModelChecker;

    fn lex() -> Lexicon {
        Lexicon::default_lexicon().unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(
            project_quantifier(Quantifier::All, ArgPosition::First, R),
            F,
            "all is downward in its first argument"
        );
        assert_eq!(project_quantifier(Quantifier::Some, ArgPosition::First, R), R);
        assert_eq!(project_quantifier(Quantifier::Most, ArgPosition::First, F), I);
        assert_eq!(project_quantifier(Quantifier::Most, ArgPosition::Second, F), F);
        for q in ALL_QUANTIFIERS {
            for pos in [ArgPosition::First, ArgPosition::Second] {
                assert_eq!(project_quantifier(q, pos, E), E);
            }
        }
    }

    #[test]
    fn quantifier_substitution_examples() {
        assert_eq!(quantifier_substitution(Quantifier::All, Quantifier::Some), F);
        assert_eq!(quantifier_substitution(Quantifier::No, Quantifier::Some), N);
        assert_eq!(quantifier_substitution(Quantifier::Most, Quantifier::No), A);
        assert_eq!(quantifier_substitution(Quantifier::Two, Quantifier::All), I);
        assert_eq!(quantifier_substitution(Quantifier::Three, Quantifier::Two), F);
        for q1 in ALL_QUANTIFIERS {
            for q2 in ALL_QUANTIFIERS {
                assert_eq!(
                    quantifier_substitution(q1, q2),
                    quantifier_substitution(q2, q1).converse()
                );
            }
        }
    }

    /// A throwaway lexicon with two words in a chosen relation plus an
    /// unconstrained filler.
    fn pair_lexicon(r: Relation) -> Lexicon {
        let text = match r {
            Relation::Independence => "pa\t#\tpb\nfiller\t#\tpa\n".to_string(),
            other => format!("pa\t{}\tpb\nfiller\t#\tpa\n", other.symbol()),
        };
        Lexicon::parse(&text).unwrap()
    }

    #[test]
    fn first_argument_signatures_match_model_checking() {
        for q in ALL_QUANTIFIERS {
            for r in ALL_RELATIONS {
                let l = pair_lexicon(r);
                let checker = ModelChecker::new(&l);
                let a = parse(&format!("({q} pa) filler"), &l).unwrap();
                let b = parse(&format!("({q} pb) filler"), &l).unwrap();
                let expected = checker.label(&a, &b).unwrap();
                assert_eq!(
                    project_quantifier(q, ArgPosition::First, r),
                    expected,
                    "first-argument projection of {r:?} under {q:?}"
                );
            }
        }
    }

    #[test]
    fn second_argument_signatures_match_model_checking() {
        for q in ALL_QUANTIFIERS {
            for r in ALL_RELATIONS {
                let l = pair_lexicon(r);
                let checker = ModelChecker::new(&l);
                let a = parse(&format!("({q} filler) pa"), &l).unwrap();
                let b = parse(&format!("({q} filler) pb"), &l).unwrap();
                let expected = checker.label(&a, &b).unwrap();
                assert_eq!(
                    project_quantifier(q, ArgPosition::Second, r),
                    expected,
                    "second-argument projection of {r:?} under {q:?}"
                );
            }
        }
    }

    #[test]
    fn quantifier_substitution_matches_model_checking() {
        let l = pair_lexicon(Relation::Independence);
        let checker = ModelChecker::new(&l);
        for q1 in ALL_QUANTIFIERS {
            for q2 in ALL_QUANTIFIERS {
                let a = parse(&format!("({q1} pa) filler"), &l).unwrap();
                let b = parse(&format!("({q2} pa) filler"), &l).unwrap();
                let expected = checker.label(&a, &b).unwrap();
                assert_eq!(
                    quantifier_substitution(q1, q2),
                    expected,
                    "substituting {q1:?} with {q2:?}"
                );
            }
        }
    }

    fn natlog(l: &Lexicon, a: &str, b: &str) -> Relation {
        let sa = parse(a, l).unwrap();
        let sb = parse(b, l).unwrap();
        label_pair_natlog(&sa, &sb, l).unwrap()
    }

    #[test]
    fn worked_derivation_with_two_edits() {
        let l = lex();
        // Quantifier substitution introduces negation, the argument
        // substitution reverse entailment; their join is alternation.
        assert_eq!(natlog(&l, "(no animal) bark", "(some dog) bark"), A);
    }

    #[test]
    fn identical_sentences_are_equivalent() {
        let l = lex();
        assert_eq!(natlog(&l, "(all cat) bark", "(all cat) bark"), E);
    }

    #[test]
    fn quantifier_and_scope_edits_combine() {
        let l = lex();
        assert_eq!(natlog(&l, "(all puppy) French", "(some puppy) European"), F);
    }

    #[test]
    fn inner_negation_duality_recovers_equivalence() {
        let l = lex();
        assert_eq!(natlog(&l, "(all cat) bark", "(no cat) (not bark)"), E);
        assert_eq!(natlog(&l, "(all cat) (not bark)", "(no cat) bark"), E);
    }

    #[test]
    fn order_sensitivity_is_resolved_by_trying_all_orders() {
        let l = lex();
        // Folding the argument edit before the quantifier edit is exact here;
        // the other order collapses to independence.
        assert_eq!(natlog(&l, "(all dog) bark", "(some puppy) bark"), F);
    }

    #[test]
    fn missing_lexical_entry_is_an_error() {
        let l = lex();
        let a = parse("(all hungry) bark", &l).unwrap();
        let b = parse("(all dog) bark", &l).unwrap();
        assert!(matches!(
            label_pair_natlog(&a, &b, &l),
            Err(NatLogError::NoLexicalEntry(..))
        ));
    }
}
