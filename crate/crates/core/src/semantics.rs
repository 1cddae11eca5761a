//! Model-checking gold-labeling oracle.
//!
//! A sentence pair is labeled by enumerating every admissible assignment of
//! finite extensions to the mentioned predicates over a range of domain
//! sizes, collecting which joint truth values the two sentences attain, and
//! mapping that pattern to a relation with the set-level definitions (the
//! sets being the models where each sentence holds).
//!
//! Admissible assignments give every mentioned predicate a non-empty proper
//! extension (quantified statements carry existential import here: `all x y`
//! entails `some x y`) and satisfy every closed lexicon constraint between
//! mentioned predicates. Only the counts of the Venn regions of the
//! predicates matter to truth, so enumeration runs over region-count
//! compositions rather than raw subsets, and results are memoized per
//! structural profile.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::grammar::{Quantifier, Sentence};
use crate::lexicon::Lexicon;
use crate::relation::{
    relation_of_regions, PatternError, Relation, SetMask, TruthPatternSet,
};

/// Domain sizes the oracle enumerates by default. The upper bound is chosen
/// so that every pattern the generator can produce is attainable: sentences
/// mixing `most` with `three` need seven entities before all four joint
/// truth values appear.
pub const DEFAULT_DOMAIN_SIZES: std::ops::RangeInclusive<usize> = 1..=8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{side} sentence mentions {word:?}, which is not in the lexicon")]
    UnknownWord { side: &'static str, word: String },
    #[error("degenerate pair: {0}")]
    Degenerate(PatternError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no extension given for predicate {0:?}")]
    MissingExtension(String),
}

/// Direct truth evaluation of one sentence against explicit extensions.
/// Negated predicates denote the complement within the universe.
pub fn eval_sentence(
    s: &Sentence,
    extensions: &BTreeMap<String, SetMask>,
    universe: SetMask,
) -> Result<bool, EvalError> {
    let lookup = |name: &str, negated: bool| -> Result<SetMask, EvalError> {
        let ext = extensions
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::MissingExtension(name.to_string()))?;
        Ok(if negated { universe & !ext } else { ext & universe })
    };
    let x = lookup(&s.arg1.name, s.arg1.negated)?;
    let y = lookup(&s.arg2.name, s.arg2.negated)?;
    Ok(quantifier_truth(s.quantifier, (x & y).count_ones(), (x & !y).count_ones()))
}

/// Truth of `q x y` from |x ∩ y| and |x \ y|.
fn quantifier_truth(q: Quantifier, inter: u32, rest: u32) -> bool {
    match q {
        Quantifier::All => rest == 0,
        Quantifier::Some => inter > 0,
        Quantifier::No => inter == 0,
        Quantifier::Most => inter > rest,
        Quantifier::Two => inter >= 2,
        Quantifier::Three => inter >= 3,
    }
}

/// Structural profile of a sentence pair; pairs with equal profiles have
/// equal truth patterns, which makes memoization effective across a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Profile {
    quantifiers: [Quantifier; 2],
    negated: [bool; 4],
    /// Which distinct predicate fills each of the four argument slots,
    /// numbered by first occurrence.
    slots: [u8; 4],
    /// Closed lexicon constraints between distinct mentioned predicates.
    constraints: Vec<(u8, u8, Relation)>,
}

fn build_profile(a: &Sentence, b: &Sentence, lex: &Lexicon) -> Result<Profile, OracleError> {
    let slot_info = [
        ("left", &a.arg1),
        ("left", &a.arg2),
        ("right", &b.arg1),
        ("right", &b.arg2),
    ];
    let mut names: Vec<&str> = Vec::new();
    let mut slots = [0u8; 4];
    let mut negated = [false; 4];
    for (k, (side, pred)) in slot_info.iter().enumerate() {
        if !lex.contains(&pred.name) {
            return Err(OracleError::UnknownWord { side, word: pred.name.clone() });
        }
        let idx = match names.iter().position(|n| *n == pred.name) {
            Some(i) => i,
            None => {
                names.push(&pred.name);
                names.len() - 1
            }
        };
        slots[k] = idx as u8;
        negated[k] = pred.negated;
    }
    let mut constraints = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            if let Some(rel) = lex.relation(names[i], names[j]) {
                constraints.push((i as u8, j as u8, rel));
            }
        }
    }
    Ok(Profile {
        quantifiers: [a.quantifier, b.quantifier],
        negated,
        slots,
        constraints,
    })
}

/// Region index (0 = both, 1 = only first, 2 = only second, 3 = neither) of a
/// cell with respect to two membership masks.
fn region_index(cell: usize, mask_a: usize, mask_b: usize) -> usize {
    match (cell & mask_a != 0, cell & mask_b != 0) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

/// Enumerates the truth patterns of a profile over the given domain sizes.
fn patterns_of_profile(profile: &Profile, sizes: &[usize]) -> TruthPatternSet {
    let pred_count = profile
        .slots
        .iter()
        .map(|s| *s as usize + 1)
        .max()
        .expect("at least one slot");
    let cells = 1usize << pred_count;

    // Per-cell region index for every constraint and both sentences.
    let constraint_regions: Vec<Vec<usize>> = profile
        .constraints
        .iter()
        .map(|&(i, j, _)| {
            (0..cells).map(|c| region_index(c, 1 << i, 1 << j)).collect()
        })
        .collect();
    let sentence_regions: Vec<Vec<usize>> = (0..2)
        .map(|s| {
            let (a1, a2) = (profile.slots[s * 2] as usize, profile.slots[s * 2 + 1] as usize);
            let (n1, n2) = (profile.negated[s * 2], profile.negated[s * 2 + 1]);
            (0..cells)
                .map(|c| {
                    let in1 = (c & (1 << a1) != 0) != n1;
                    let in2 = (c & (1 << a2) != 0) != n2;
                    match (in1, in2) {
                        (true, true) => 0,
                        (true, false) => 1,
                        (false, true) => 2,
                        (false, false) => 3,
                    }
                })
                .collect()
        })
        .collect();

    let mut patterns = TruthPatternSet::default();
    let mut counts = vec![0u32; cells];
    for &n in sizes {
        if patterns.is_full() {
            break;
        }
        distribute(0, n as u32, &mut counts, &mut |counts| {
            // Every predicate extension must be a non-empty proper subset.
            for p in 0..pred_count {
                let tot: u32 =
                    (0..cells).filter(|c| c & (1 << p) != 0).map(|c| counts[c]).sum();
                if tot == 0 || tot == n as u32 {
                    return;
                }
            }
            for (t, &(_, _, rel)) in profile.constraints.iter().enumerate() {
                let mut regs = [0u32; 4];
                for (c, &cnt) in counts.iter().enumerate() {
                    regs[constraint_regions[t][c]] += cnt;
                }
                if relation_of_regions(regs[0], regs[1], regs[2], regs[3]) != rel {
                    return;
                }
            }
            let mut truth = [false; 2];
            for s in 0..2 {
                let mut regs = [0u32; 4];
                for (c, &cnt) in counts.iter().enumerate() {
                    regs[sentence_regions[s][c]] += cnt;
                }
                truth[s] = quantifier_truth(profile.quantifiers[s], regs[0], regs[1]);
            }
            patterns.record(truth[0], truth[1]);
        });
    }
    patterns
}

/// Visits every way of distributing `remaining` entities over cells
/// `cell..`, writing counts in place.
fn distribute(cell: usize, remaining: u32, counts: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if cell == counts.len() - 1 {
        counts[cell] = remaining;
        visit(counts);
        return;
    }
    for take in 0..=remaining {
        counts[cell] = take;
        distribute(cell + 1, remaining - take, counts, visit);
    }
}

/// The reusable oracle: owns the domain-size schedule and a pattern cache.
/// Pure and deterministic; the cache is a transparent memo.
pub struct ModelChecker<'a> {
    lex: &'a Lexicon,
    sizes: Vec<usize>,
    cache: Mutex<HashMap<Profile, TruthPatternSet>>,
}

impl<'a> ModelChecker<'a> {
    pub fn new(lex: &'a Lexicon) -> ModelChecker<'a> {
        ModelChecker::with_sizes(lex, DEFAULT_DOMAIN_SIZES.collect())
    }

    pub fn with_sizes(lex: &'a Lexicon, sizes: Vec<usize>) -> ModelChecker<'a> {
        ModelChecker { lex, sizes, cache: Mutex::new(HashMap::new()) }
    }

    /// Truth patterns of a pair across all admissible models.
    pub fn truth_patterns(&self, a: &Sentence, b: &Sentence) -> Result<TruthPatternSet, OracleError> {
        let profile = build_profile(a, b, self.lex)?;
        if let Some(hit) = self.cache.lock().unwrap().get(&profile) {
            return Ok(*hit);
        }
        let patterns = patterns_of_profile(&profile, &self.sizes);
        self.cache.lock().unwrap().insert(profile, patterns);
        Ok(patterns)
    }

    /// Gold label for a pair, or a degeneracy flag when either sentence is
    /// constant over the admissible models.
    pub fn label(&self, a: &Sentence, b: &Sentence) -> Result<Relation, OracleError> {
        self.truth_patterns(a, b)?.to_relation().map_err(OracleError::Degenerate)
    }
}

/// One-shot convenience wrapper around [`ModelChecker`].
pub fn label_pair_modelcheck(
    a: &Sentence,
    b: &Sentence,
    lex: &Lexicon,
    sizes: &[usize],
) -> Result<Relation, OracleError> {
    ModelChecker::with_sizes(lex, sizes.to_vec()).label(a, b)
}
