//! Procedural corpus generation and train/test split machinery.
//!
//! The corpus is organized as a few hundred small datasets, each one a
//! family of sentence pairs instantiating a single reasoning pattern with a
//! shared gold label. Four classes are produced: basic monotonicity,
//! quantifier substitution, monotonicity combined with quantifier
//! substitution, and negation variants of existing datasets.
//!
//! Every candidate pair is labeled by both gold oracles. Pairs are kept only
//! when the oracles agree with each other and with the dataset's pattern
//! label; everything else is dropped and logged, so the shipped corpus is
//! disagreement-free by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grammar::{parse, serialize, Predicate, Quantifier, Sentence, ALL_QUANTIFIERS};
use crate::lexicon::Lexicon;
use crate::projectivity::{label_pair_natlog, project_quantifier, ArgPosition};
use crate::relation::{Relation, ALL_RELATIONS};
use crate::semantics::ModelChecker;

/// Stable 64-bit mix of a base seed and a string tag (FNV-1a). Used wherever
/// a sub-stream of randomness must survive regeneration byte for byte.
pub fn subseed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in seed.to_le_bytes().iter().chain(tag.as_bytes()) {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetClass {
    Monotonicity,
    QuantifierSubstitution,
    MonotonicityQuantifierSubstitution,
    NegationVariant,
}

impl DatasetClass {
    pub fn name(self) -> &'static str {
        match self {
            DatasetClass::Monotonicity => "mono",
            DatasetClass::QuantifierSubstitution => "quant-subst",
            DatasetClass::MonotonicityQuantifierSubstitution => "mono-quant-subst",
            DatasetClass::NegationVariant => "negation-variant",
        }
    }

    pub fn parse_name(s: &str) -> Option<DatasetClass> {
        Some(match s {
            "mono" => DatasetClass::Monotonicity,
            "quant-subst" => DatasetClass::QuantifierSubstitution,
            "mono-quant-subst" => DatasetClass::MonotonicityQuantifierSubstitution,
            "negation-variant" => DatasetClass::NegationVariant,
            _ => return None,
        })
    }
}

impl fmt::Display for DatasetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub left: Sentence,
    pub right: Sentence,
    pub gold: Relation,
    pub dataset_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub class: DatasetClass,
    /// Datasets with the same subclass instantiate the same reasoning
    /// pattern and differ only in filler words.
    pub subclass: String,
    pub description: String,
    /// Quantifiers on the left and right side (shared by every pair).
    pub quantifiers: (Quantifier, Quantifier),
    pub gold: Relation,
    pub pairs: Vec<LabeledPair>,
}

impl Dataset {
    /// True when the two sides use the given pair of quantifiers in either
    /// order.
    pub fn features_quantifier_pair(&self, a: Quantifier, b: Quantifier) -> bool {
        let (l, r) = self.quantifiers;
        (l == a && r == b) || (l == b && r == a)
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub datasets: Vec<Dataset>,
}

impl Corpus {
    pub fn pair_count(&self) -> usize {
        self.datasets.iter().map(|d| d.pairs.len()).sum()
    }

    pub fn dataset(&self, id: &str) -> Option<&Dataset> {
        self.datasets.iter().find(|d| d.id == id)
    }

    pub fn label_histogram(&self) -> [usize; 7] {
        let mut hist = [0usize; 7];
        for d in &self.datasets {
            hist[d.gold.index()] += d.pairs.len();
        }
        hist
    }
}

/// Knobs for corpus generation. The defaults land in the target scale of
/// roughly two hundred datasets and ten thousand pairs.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    /// Pair cap for the double-alternation monotonicity datasets.
    pub both_args_pair_cap: usize,
    /// Number of sampled monotonicity-with-substitution schemas.
    pub mono_quant_schemas: usize,
    /// Datasets smaller than this after filtering are dropped.
    pub min_dataset_pairs: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { seed: 1, both_args_pair_cap: 198, mono_quant_schemas: 45, min_dataset_pairs: 4 }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("coverage check failed: {0}")]
    Coverage(String),
    #[error("generated corpus contains an oracle disagreement: {0}")]
    Disagreement(String),
}

/// Why a candidate pair or dataset was left out of the corpus.
#[derive(Debug, Clone)]
pub struct SkipRecord {
    pub context: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GenReport {
    pub dataset_count: usize,
    pub pair_count: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub label_histogram: [usize; 7],
    /// Pairs dropped because the two oracles disagreed. Anything recorded
    /// here never reaches the corpus.
    pub disagreements: Vec<SkipRecord>,
    /// Pairs dropped for other reasons: degenerate sentences, missing
    /// lexical entries, or a label differing from the dataset pattern.
    pub skipped: Vec<SkipRecord>,
    pub dropped_datasets: Vec<SkipRecord>,
}

impl GenReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("datasets\t{}\n", self.dataset_count));
        out.push_str(&format!("pairs\t{}\n", self.pair_count));
        for (class, n) in &self.class_counts {
            out.push_str(&format!("class\t{class}\t{n}\n"));
        }
        for r in ALL_RELATIONS {
            out.push_str(&format!("label\t{}\t{}\n", r.symbol(), self.label_histogram[r.index()]));
        }
        out.push_str(&format!("oracle-disagreements\t{}\n", self.disagreements.len()));
        for s in &self.disagreements {
            out.push_str(&format!("disagreement\t{}\t{}\n", s.context, s.reason));
        }
        out.push_str(&format!("skipped-pairs\t{}\n", self.skipped.len()));
        for s in &self.skipped {
            out.push_str(&format!("skip\t{}\t{}\n", s.context, s.reason));
        }
        for s in &self.dropped_datasets {
            out.push_str(&format!("dropped-dataset\t{}\t{}\n", s.context, s.reason));
        }
        out
    }
}

/// The three fixed second-argument fillers for alternating-first-argument
/// and quantifier-substitution datasets.
pub const SECOND_ARG_FILLERS: [&str; 3] = ["bark", "mobile", "European"];
/// The three fixed entailment pairs used in second-argument position.
pub const SECOND_ARG_PAIRS: [(&str, &str); 3] =
    [("bark", "animate"), ("French", "European"), ("Parisian", "French")];

struct Generator<'a> {
    lex: &'a Lexicon,
    checker: ModelChecker<'a>,
    config: GenConfig,
    report: GenReport,
}

impl<'a> Generator<'a> {
    /// Labels a candidate with both oracles; returns the agreed label or
    /// records why the pair was skipped.
    fn label_candidate(
        &mut self,
        context: &str,
        left: &Sentence,
        right: &Sentence,
    ) -> Option<Relation> {
        let natlog = match label_pair_natlog(left, right, self.lex) {
            Ok(r) => r,
            Err(e) => {
                self.report.skipped.push(SkipRecord {
                    context: format!("{context}: {left} / {right}"),
                    reason: format!("symbolic labeler: {e}"),
                });
                return None;
            }
        };
        let modelcheck = match self.checker.label(left, right) {
            Ok(r) => r,
            Err(e) => {
                self.report.skipped.push(SkipRecord {
                    context: format!("{context}: {left} / {right}"),
                    reason: format!("model checker: {e}"),
                });
                return None;
            }
        };
        if natlog != modelcheck {
            self.report.disagreements.push(SkipRecord {
                context: format!("{context}: {left} / {right}"),
                reason: format!("symbolic {natlog} vs model-checked {modelcheck}"),
            });
            return None;
        }
        Some(natlog)
    }

    /// Labels the candidates, keeps the dominant label, and assembles the
    /// dataset when enough pairs survive.
    fn build_dataset(
        &mut self,
        id: String,
        class: DatasetClass,
        subclass: String,
        description: String,
        quantifiers: (Quantifier, Quantifier),
        candidates: Vec<(Sentence, Sentence)>,
    ) -> Option<Dataset> {
        let mut labeled: Vec<(Sentence, Sentence, Relation)> = Vec::new();
        for (left, right) in candidates {
            if let Some(gold) = self.label_candidate(&id, &left, &right) {
                labeled.push((left, right, gold));
            }
        }
        if labeled.is_empty() {
            self.report
                .dropped_datasets
                .push(SkipRecord { context: id, reason: "no pairs survived labeling".into() });
            return None;
        }
        let mut counts = [0usize; 7];
        for (_, _, gold) in &labeled {
            counts[gold.index()] += 1;
        }
        let gold = ALL_RELATIONS[(0..7).max_by_key(|&i| (counts[i], 7 - i)).unwrap()];
        let mut pairs = Vec::new();
        for (left, right, label) in labeled {
            if label == gold {
                pairs.push(LabeledPair { left, right, gold, dataset_id: id.clone() });
            } else {
                self.report.skipped.push(SkipRecord {
                    context: format!("{id}: {left} / {right}"),
                    reason: format!("label {label} differs from dataset pattern {gold}"),
                });
            }
        }
        if pairs.len() < self.config.min_dataset_pairs {
            self.report.dropped_datasets.push(SkipRecord {
                context: id,
                reason: format!("only {} pairs survived", pairs.len()),
            });
            return None;
        }
        Some(Dataset { id, class, subclass, description, quantifiers, gold, pairs })
    }

    /// Orientation of an entailment pair in a given argument slot such that
    /// the projected relation is forward entailment where the quantifier
    /// licenses it: upward positions take narrow on the left, downward
    /// positions broad on the left.
    fn orient<'w>(
        q: Quantifier,
        pos: ArgPosition,
        narrow: &'w str,
        broad: &'w str,
    ) -> (&'w str, &'w str) {
        if project_quantifier(q, pos, Relation::ForwardEntailment) == Relation::ForwardEntailment {
            (narrow, broad)
        } else {
            (broad, narrow)
        }
    }

    fn gen_monotonicity(&mut self) -> Vec<Dataset> {
        let mut datasets = Vec::new();
        let entail = self.lex.entailment_pairs();

        // First-argument alternation: every entailment pair, with the more
        // general term on the left.
        for q in ALL_QUANTIFIERS {
            for filler in SECOND_ARG_FILLERS {
                let id = format!("mono.arg1.{q}.{filler}");
                let subclass = format!("mono.arg1.{q}");
                let candidates: Vec<(Sentence, Sentence)> = entail
                    .iter()
                    .map(|(narrow, broad)| {
                        (
                            Sentence::new(q, Predicate::plain(broad), Predicate::plain(filler)),
                            Sentence::new(q, Predicate::plain(narrow), Predicate::plain(filler)),
                        )
                    })
                    .collect();
                let description = format!("({q} x) {filler} R ({q} y) {filler} [y < x]");
                if let Some(d) = self.build_dataset(
                    id,
                    DatasetClass::Monotonicity,
                    subclass,
                    description,
                    (q, q),
                    candidates,
                ) {
                    datasets.push(d);
                }
            }
        }

        // Second-argument alternation: all predicates in first position.
        for q in ALL_QUANTIFIERS {
            for (lo, hi) in SECOND_ARG_PAIRS {
                let id = format!("mono.arg2.{q}.{lo}-{hi}");
                let subclass = format!("mono.arg2.{q}");
                let candidates: Vec<(Sentence, Sentence)> = self
                    .lex
                    .predicates()
                    .map(|p| {
                        (
                            Sentence::new(q, Predicate::plain(p), Predicate::plain(lo)),
                            Sentence::new(q, Predicate::plain(p), Predicate::plain(hi)),
                        )
                    })
                    .collect();
                let description = format!("({q} x) {lo} R ({q} x) {hi} [{lo} < {hi}]");
                if let Some(d) = self.build_dataset(
                    id,
                    DatasetClass::Monotonicity,
                    subclass,
                    description,
                    (q, q),
                    candidates,
                ) {
                    datasets.push(d);
                }
            }
        }

        // Alternation in both positions, in aligned and opposed directions.
        for q in ALL_QUANTIFIERS {
            for same_direction in [true, false] {
                let kind = if same_direction { "same" } else { "opposite" };
                let id = format!("mono.both.{q}.{kind}");
                let subclass = id.clone();
                let mut candidates = Vec::new();
                for (narrow1, broad1) in &entail {
                    for (lo, hi) in SECOND_ARG_PAIRS {
                        let (l1, r1) = Self::orient(q, ArgPosition::First, narrow1, broad1);
                        let (l2, r2) = if same_direction {
                            Self::orient(q, ArgPosition::Second, lo, hi)
                        } else {
                            let (a, b) = Self::orient(q, ArgPosition::Second, lo, hi);
                            (b, a)
                        };
                        candidates.push((
                            Sentence::new(q, Predicate::plain(l1), Predicate::plain(l2)),
                            Sentence::new(q, Predicate::plain(r1), Predicate::plain(r2)),
                        ));
                    }
                }
                let mut rng = ChaCha8Rng::seed_from_u64(subseed(self.config.seed, &id));
                candidates.shuffle(&mut rng);
                candidates.truncate(self.config.both_args_pair_cap);
                // Canonical order within the dataset regardless of sampling.
                candidates.sort_by_key(|(l, r)| (serialize(l), serialize(r)));
                let description = format!("({q} x1) y1 R ({q} x2) y2 [{kind} direction]");
                if let Some(d) = self.build_dataset(
                    id,
                    DatasetClass::Monotonicity,
                    subclass,
                    description,
                    (q, q),
                    candidates,
                ) {
                    datasets.push(d);
                }
            }
        }
        datasets
    }

    fn gen_quantifier_substitution(&mut self) -> Vec<Dataset> {
        let mut datasets = Vec::new();
        let predicates: Vec<String> = self.lex.predicates().map(str::to_string).collect();
        for q1 in ALL_QUANTIFIERS {
            for q2 in ALL_QUANTIFIERS {
                if q1 == q2 {
                    continue;
                }
                for filler in SECOND_ARG_FILLERS {
                    let id = format!("qsub.{q1}.{q2}.{filler}");
                    let subclass = format!("qsub.{q1}.{q2}");
                    let candidates: Vec<(Sentence, Sentence)> = predicates
                        .iter()
                        .map(|p| {
                            (
                                Sentence::new(q1, Predicate::plain(p), Predicate::plain(filler)),
                                Sentence::new(q2, Predicate::plain(p), Predicate::plain(filler)),
                            )
                        })
                        .collect();
                    let description = format!("({q1} x) {filler} R ({q2} x) {filler}");
                    if let Some(d) = self.build_dataset(
                        id,
                        DatasetClass::QuantifierSubstitution,
                        subclass,
                        description,
                        (q1, q2),
                        candidates,
                    ) {
                        datasets.push(d);
                    }
                }
            }
        }
        datasets
    }

    fn gen_mono_quant_substitution(&mut self) -> Result<Vec<Dataset>, GenError> {
        #[derive(Clone)]
        enum Schema {
            /// Shared first argument, entailment-related second arguments.
            Arg2 { q1: Quantifier, q2: Quantifier, left2: String, right2: String },
            /// Entailment-related first arguments, fixed filler.
            Arg1 { q1: Quantifier, q2: Quantifier, narrow_left: bool, filler: String },
        }

        impl Schema {
            fn quantifiers(&self) -> (Quantifier, Quantifier) {
                match self {
                    Schema::Arg2 { q1, q2, .. } | Schema::Arg1 { q1, q2, .. } => (*q1, *q2),
                }
            }

            fn id(&self) -> String {
                match self {
                    Schema::Arg2 { q1, q2, left2, right2 } => {
                        format!("mqsub.{q1}.{q2}.arg2.{left2}-{right2}")
                    }
                    Schema::Arg1 { q1, q2, narrow_left, filler } => {
                        let dir = if *narrow_left { "up" } else { "down" };
                        format!("mqsub.{q1}.{q2}.arg1.{dir}.{filler}")
                    }
                }
            }

            fn subclass(&self) -> String {
                match self {
                    Schema::Arg2 { q1, q2, left2, right2 } => {
                        format!("mqsub.{q1}.{q2}.arg2.{left2}-{right2}")
                    }
                    Schema::Arg1 { q1, q2, narrow_left, .. } => {
                        let dir = if *narrow_left { "up" } else { "down" };
                        format!("mqsub.{q1}.{q2}.arg1.{dir}")
                    }
                }
            }
        }

        // Deterministic candidate pool, shuffled by the corpus seed.
        let mut pool: Vec<Schema> = Vec::new();
        for q1 in ALL_QUANTIFIERS {
            for q2 in ALL_QUANTIFIERS {
                if q1 == q2 {
                    continue;
                }
                for (lo, hi) in SECOND_ARG_PAIRS {
                    pool.push(Schema::Arg2 {
                        q1,
                        q2,
                        left2: lo.to_string(),
                        right2: hi.to_string(),
                    });
                    pool.push(Schema::Arg2 {
                        q1,
                        q2,
                        left2: hi.to_string(),
                        right2: lo.to_string(),
                    });
                }
                for filler in SECOND_ARG_FILLERS {
                    for narrow_left in [true, false] {
                        pool.push(Schema::Arg1 { q1, q2, narrow_left, filler: filler.to_string() });
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(self.config.seed, "mqsub"));
        pool.shuffle(&mut rng);

        // Always include the canonical shared-restrictor pattern and one
        // pattern whose gold label is cover.
        let forced: Vec<Schema> = vec![
            Schema::Arg2 {
                q1: Quantifier::All,
                q2: Quantifier::Some,
                left2: "French".into(),
                right2: "European".into(),
            },
            Schema::Arg2 {
                q1: Quantifier::No,
                q2: Quantifier::Some,
                left2: "Parisian".into(),
                right2: "French".into(),
            },
        ];

        let pair_key = |q1: Quantifier, q2: Quantifier| {
            let (a, b) = (q1.token(), q2.token());
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        };

        // Balanced sampling: the same number of schemas for every unordered
        // quantifier pair, so no pair dominates the corpus or a pair-out
        // hold-out.
        let per_pair_quota = (self.config.mono_quant_schemas / 15).max(1);
        let mut chosen: Vec<Schema> = Vec::new();
        let mut chosen_ids: BTreeSet<String> = BTreeSet::new();
        let mut per_pair: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for schema in forced.into_iter().chain(pool.into_iter()) {
            if chosen.len() >= self.config.mono_quant_schemas {
                break;
            }
            if chosen_ids.contains(&schema.id()) {
                continue;
            }
            let (q1, q2) = schema.quantifiers();
            let count = per_pair.entry(pair_key(q1, q2)).or_insert(0);
            if *count >= per_pair_quota {
                continue;
            }
            *count += 1;
            chosen_ids.insert(schema.id());
            chosen.push(schema);
        }

        let entail = self.lex.entailment_pairs();
        let mut datasets = Vec::new();
        for schema in chosen {
            let (q1, q2) = schema.quantifiers();
            let (id, subclass) = (schema.id(), schema.subclass());
            let (candidates, description) = match &schema {
                Schema::Arg2 { left2, right2, .. } => {
                    let candidates: Vec<(Sentence, Sentence)> = self
                        .lex
                        .predicates()
                        .map(|p| {
                            (
                                Sentence::new(q1, Predicate::plain(p), Predicate::plain(left2)),
                                Sentence::new(q2, Predicate::plain(p), Predicate::plain(right2)),
                            )
                        })
                        .collect();
                    (candidates, format!("({q1} x) {left2} R ({q2} x) {right2}"))
                }
                Schema::Arg1 { narrow_left, filler, .. } => {
                    let candidates: Vec<(Sentence, Sentence)> = entail
                        .iter()
                        .map(|(narrow, broad)| {
                            let (l, r) =
                                if *narrow_left { (narrow, broad) } else { (broad, narrow) };
                            (
                                Sentence::new(q1, Predicate::plain(l), Predicate::plain(filler)),
                                Sentence::new(q2, Predicate::plain(r), Predicate::plain(filler)),
                            )
                        })
                        .collect();
                    let rel = if *narrow_left { "x < y" } else { "y < x" };
                    (candidates, format!("({q1} x) {filler} R ({q2} y) {filler} [{rel}]"))
                }
            };
            if let Some(d) = self.build_dataset(
                id,
                DatasetClass::MonotonicityQuantifierSubstitution,
                subclass,
                description,
                (q1, q2),
                candidates,
            ) {
                datasets.push(d);
            }
        }

        // Coverage: every unordered quantifier pair must be present.
        let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
        for d in &datasets {
            seen.insert(pair_key(d.quantifiers.0, d.quantifiers.1));
        }
        if seen.len() < 15 {
            return Err(GenError::Coverage(format!(
                "monotonicity-with-substitution covers only {} of 15 quantifier pairs",
                seen.len()
            )));
        }
        // Equivalence cannot occur with differing arguments, and negation
        // would require exact complementarity, which substitution along
        // entailment pairs never produces. The other five relations must all
        // appear as gold labels.
        let mut labels: BTreeSet<Relation> = BTreeSet::new();
        for d in &datasets {
            labels.insert(d.gold);
        }
        for required in [
            Relation::ForwardEntailment,
            Relation::ReverseEntailment,
            Relation::Alternation,
            Relation::Cover,
            Relation::Independence,
        ] {
            if !labels.contains(&required) {
                return Err(GenError::Coverage(format!(
                    "monotonicity-with-substitution expresses no {required} pattern"
                )));
            }
        }
        Ok(datasets)
    }

    fn gen_negation_variants(&mut self, base: &[Dataset]) -> Vec<Dataset> {
        let mut datasets = Vec::new();
        let mono_positions = NegatedPosition::ALL;
        let mut mono_index = 0usize;

        let qsub_cycles = [
            [NegatedPosition::RightArg2, NegatedPosition::RightArg1],
            [NegatedPosition::LeftArg2, NegatedPosition::LeftArg1],
            [NegatedPosition::RightArg2, NegatedPosition::LeftArg1],
            [NegatedPosition::RightArg1, NegatedPosition::LeftArg2],
        ];
        let mut qsub_index = 0usize;

        for dataset in base {
            let positions: Vec<NegatedPosition> = match dataset.class {
                DatasetClass::QuantifierSubstitution => {
                    if !dataset.id.ends_with(".bark") {
                        continue;
                    }
                    let mut positions = qsub_cycles[qsub_index % qsub_cycles.len()].to_vec();
                    qsub_index += 1;
                    // The duality family pairing `all` with `no` under a
                    // negated right scope must always be present.
                    let (q1, q2) = dataset.quantifiers;
                    let duality = (q1 == Quantifier::All && q2 == Quantifier::No)
                        || (q1 == Quantifier::No && q2 == Quantifier::All);
                    if duality && !positions.contains(&NegatedPosition::RightArg2) {
                        positions[1] = NegatedPosition::RightArg2;
                    }
                    positions
                }
                DatasetClass::Monotonicity => {
                    if !dataset.subclass.starts_with("mono.arg1.") || !dataset.id.ends_with(".bark")
                    {
                        continue;
                    }
                    let pos = mono_positions[mono_index % mono_positions.len()];
                    mono_index += 1;
                    vec![pos]
                }
                _ => continue,
            };
            for pos in positions {
                let candidates = negate_position_pairs(dataset, pos);
                let id = format!("neg.{}.{}", dataset.id, pos);
                let subclass = format!("neg.{}.{}", dataset.subclass, pos);
                let description =
                    format!("{} with {} negated", dataset.description, pos.describe());
                if let Some(d) = self.build_dataset(
                    id,
                    DatasetClass::NegationVariant,
                    subclass,
                    description,
                    dataset.quantifiers,
                    candidates,
                ) {
                    datasets.push(d);
                }
            }
        }
        datasets
    }
}

/// One of the four argument positions of a sentence pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegatedPosition {
    LeftArg1,
    LeftArg2,
    RightArg1,
    RightArg2,
}

impl NegatedPosition {
    pub const ALL: [NegatedPosition; 4] = [
        NegatedPosition::LeftArg1,
        NegatedPosition::RightArg1,
        NegatedPosition::LeftArg2,
        NegatedPosition::RightArg2,
    ];

    pub fn parse_name(s: &str) -> Option<NegatedPosition> {
        Some(match s {
            "l1" => NegatedPosition::LeftArg1,
            "l2" => NegatedPosition::LeftArg2,
            "r1" => NegatedPosition::RightArg1,
            "r2" => NegatedPosition::RightArg2,
            _ => return None,
        })
    }

    fn describe(self) -> &'static str {
        match self {
            NegatedPosition::LeftArg1 => "the left first argument",
            NegatedPosition::LeftArg2 => "the left second argument",
            NegatedPosition::RightArg1 => "the right first argument",
            NegatedPosition::RightArg2 => "the right second argument",
        }
    }
}

impl fmt::Display for NegatedPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NegatedPosition::LeftArg1 => "l1",
            NegatedPosition::LeftArg2 => "l2",
            NegatedPosition::RightArg1 => "r1",
            NegatedPosition::RightArg2 => "r2",
        })
    }
}

/// Toggles negation of one argument position across every pair of a dataset.
/// Applying the same position twice restores the original pairs.
pub fn negate_position_pairs(dataset: &Dataset, pos: NegatedPosition) -> Vec<(Sentence, Sentence)> {
    dataset
        .pairs
        .iter()
        .map(|p| {
            let mut left = p.left.clone();
            let mut right = p.right.clone();
            match pos {
                NegatedPosition::LeftArg1 => left.arg1 = left.arg1.toggled(),
                NegatedPosition::LeftArg2 => left.arg2 = left.arg2.toggled(),
                NegatedPosition::RightArg1 => right.arg1 = right.arg1.toggled(),
                NegatedPosition::RightArg2 => right.arg2 = right.arg2.toggled(),
            }
            (left, right)
        })
        .collect()
}

/// Generates the full corpus: monotonicity, quantifier substitution, the
/// sampled combination class, and negation variants, all dual-oracle checked.
pub fn generate(lex: &Lexicon, config: &GenConfig) -> Result<(Corpus, GenReport), GenError> {
    let mut generator = Generator {
        lex,
        checker: ModelChecker::new(lex),
        config: config.clone(),
        report: GenReport::default(),
    };

    let mut datasets = Vec::new();
    datasets.extend(generator.gen_monotonicity());
    datasets.extend(generator.gen_quantifier_substitution());
    datasets.extend(generator.gen_mono_quant_substitution()?);
    let variants = generator.gen_negation_variants(&datasets);
    datasets.extend(variants);

    datasets.sort_by(|a, b| (a.class, &a.id).cmp(&(b.class, &b.id)));

    let corpus = Corpus { seed: config.seed, datasets };
    let mut report = generator.report;
    report.dataset_count = corpus.datasets.len();
    report.pair_count = corpus.pair_count();
    report.label_histogram = corpus.label_histogram();
    for d in &corpus.datasets {
        *report.class_counts.entry(d.class.name().to_string()).or_insert(0) += d.pairs.len();
    }

    // Final safety net: re-check every shipped pair with both oracles.
    for d in &corpus.datasets {
        for p in &d.pairs {
            let natlog = label_pair_natlog(&p.left, &p.right, lex)
                .map_err(|e| GenError::Disagreement(format!("{}: {e}", p.left)))?;
            let mc = generator
                .checker
                .label(&p.left, &p.right)
                .map_err(|e| GenError::Disagreement(format!("{}: {e}", p.left)))?;
            if natlog != p.gold || mc != p.gold {
                return Err(GenError::Disagreement(format!(
                    "{} / {}: shipped {}, symbolic {natlog}, model-checked {mc}",
                    p.left, p.right, p.gold
                )));
            }
        }
    }
    Ok((corpus, report))
}

// ---------------------------------------------------------------------------
// Corpus files
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum CorpusIoError {
    #[error("corpus line {line}: {msg}")]
    BadCorpusLine { line: usize, msg: String },
    #[error("dataset manifest line {line}: {msg}")]
    BadDatasetLine { line: usize, msg: String },
    #[error("corpus references unknown dataset {0:?}")]
    UnknownDataset(String),
}

/// One pair per line: relation, left sentence, right sentence, dataset id.
pub fn corpus_to_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for d in &corpus.datasets {
        for p in &d.pairs {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                p.gold.symbol(),
                serialize(&p.left),
                serialize(&p.right),
                p.dataset_id
            ));
        }
    }
    out
}

/// Dataset metadata table: id, class, subclass, gold, size, quantifiers,
/// pattern description.
pub fn datasets_to_tsv(corpus: &Corpus) -> String {
    let mut out = String::from("id\tclass\tsubclass\tgold\tpairs\tleft_q\tright_q\tdescription\n");
    for d in &corpus.datasets {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            d.id,
            d.class.name(),
            d.subclass,
            d.gold.symbol(),
            d.pairs.len(),
            d.quantifiers.0,
            d.quantifiers.1,
            d.description
        ));
    }
    out
}

/// Reloads a corpus from the two files written by [`corpus_to_tsv`] and
/// [`datasets_to_tsv`].
pub fn corpus_from_tsv(
    corpus_text: &str,
    datasets_text: &str,
    lex: &Lexicon,
    seed: u64,
) -> Result<Corpus, CorpusIoError> {
    let mut datasets: Vec<Dataset> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (lineno, line) in datasets_text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 8 {
            return Err(CorpusIoError::BadDatasetLine {
                line: lineno + 1,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let bad = |msg: String| CorpusIoError::BadDatasetLine { line: lineno + 1, msg };
        let class = DatasetClass::parse_name(fields[1])
            .ok_or_else(|| bad(format!("unknown class {:?}", fields[1])))?;
        let gold = Relation::parse_symbol(fields[3]).map_err(|e| bad(e.to_string()))?;
        let left_q = Quantifier::from_token(fields[5])
            .ok_or_else(|| bad(format!("unknown quantifier {:?}", fields[5])))?;
        let right_q = Quantifier::from_token(fields[6])
            .ok_or_else(|| bad(format!("unknown quantifier {:?}", fields[6])))?;
        index.insert(fields[0].to_string(), datasets.len());
        datasets.push(Dataset {
            id: fields[0].to_string(),
            class,
            subclass: fields[2].to_string(),
            description: fields[7].to_string(),
            quantifiers: (left_q, right_q),
            gold,
            pairs: Vec::new(),
        });
    }

    for (lineno, line) in corpus_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(CorpusIoError::BadCorpusLine {
                line: lineno + 1,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let bad = |msg: String| CorpusIoError::BadCorpusLine { line: lineno + 1, msg };
        let gold = Relation::parse_symbol(fields[0]).map_err(|e| bad(e.to_string()))?;
        let left = parse(fields[1], lex).map_err(|e| bad(e.to_string()))?;
        let right = parse(fields[2], lex).map_err(|e| bad(e.to_string()))?;
        let id = fields[3];
        let &slot = index.get(id).ok_or_else(|| CorpusIoError::UnknownDataset(id.to_string()))?;
        datasets[slot].pairs.push(LabeledPair { left, right, gold, dataset_id: id.to_string() });
    }
    datasets.retain(|d| !d.pairs.is_empty());
    Ok(Corpus { seed, datasets })
}

// ---------------------------------------------------------------------------
// Train/test splits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitSetting {
    AllSplit,
    SetOut,
    SubclassOut,
    PairOut,
}

impl SplitSetting {
    pub fn name(self) -> &'static str {
        match self {
            SplitSetting::AllSplit => "all-split",
            SplitSetting::SetOut => "set-out",
            SplitSetting::SubclassOut => "subclass-out",
            SplitSetting::PairOut => "pair-out",
        }
    }

    pub fn parse_name(s: &str) -> Option<SplitSetting> {
        Some(match s {
            "all-split" => SplitSetting::AllSplit,
            "set-out" => SplitSetting::SetOut,
            "subclass-out" => SplitSetting::SubclassOut,
            "pair-out" => SplitSetting::PairOut,
            _ => return None,
        })
    }
}

impl fmt::Display for SplitSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SplitSpec {
    pub setting: SplitSetting,
    /// Required for every setting except all-split.
    pub target: Option<String>,
    pub seed: u64,
    pub train_fraction: f64,
}

impl SplitSpec {
    pub fn new(setting: SplitSetting, target: Option<&str>, seed: u64) -> SplitSpec {
        SplitSpec { setting, target: target.map(str::to_string), seed, train_fraction: 0.85 }
    }
}

/// Which evaluation subsets a test pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetTag {
    /// The 15% slice of a dataset that was otherwise trained on.
    SplitSlice,
    /// A fully held-out dataset other than the target.
    HeldOut,
    /// The target dataset itself.
    Target,
}

impl SubsetTag {
    fn flag(self) -> char {
        match self {
            SubsetTag::SplitSlice => 's',
            SubsetTag::HeldOut => 'h',
            SubsetTag::Target => 'g',
        }
    }

    fn from_flag(c: char) -> Option<SubsetTag> {
        Some(match c {
            's' => SubsetTag::SplitSlice,
            'h' => SubsetTag::HeldOut,
            'g' => SubsetTag::Target,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub spec: SplitSpec,
    pub train: Vec<LabeledPair>,
    pub test: Vec<(LabeledPair, SubsetTag)>,
}

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("setting {0} requires a target dataset")]
    MissingTarget(SplitSetting),
    #[error("target dataset {0:?} does not exist")]
    UnknownTarget(String),
    #[error("target {0:?} is a {1} dataset; hold-out targets must be quantifier-substitution datasets")]
    TargetNotQuantifierSubstitution(String, DatasetClass),
    #[error("split produced an empty training set")]
    EmptyTrain,
}

/// Realizes one of the four experimental settings as a train/test partition.
///
/// Datasets that are not held out are split per dataset: a deterministic
/// shuffle seeded from (split seed, dataset id) sends `train_fraction` of
/// their pairs to train and the rest to test. Held-out datasets contribute
/// all of their pairs to test.
pub fn make_split(corpus: &Corpus, spec: &SplitSpec) -> Result<Split, SplitError> {
    let target = match spec.setting {
        SplitSetting::AllSplit => None,
        setting => {
            let id = spec.target.as_deref().ok_or(SplitError::MissingTarget(setting))?;
            let dataset =
                corpus.dataset(id).ok_or_else(|| SplitError::UnknownTarget(id.to_string()))?;
            if dataset.class != DatasetClass::QuantifierSubstitution {
                return Err(SplitError::TargetNotQuantifierSubstitution(
                    id.to_string(),
                    dataset.class,
                ));
            }
            Some(dataset)
        }
    };

    let held_out = |d: &Dataset| -> bool {
        let Some(target) = target else { return false };
        match spec.setting {
            SplitSetting::AllSplit => false,
            SplitSetting::SetOut => d.id == target.id,
            SplitSetting::SubclassOut => d.subclass == target.subclass,
            // Any dataset showing the target's two quantifiers on opposite
            // sides, in either order, with or without negation or differing
            // predicates.
            SplitSetting::PairOut => {
                d.quantifiers.0 != d.quantifiers.1
                    && d.features_quantifier_pair(target.quantifiers.0, target.quantifiers.1)
            }
        }
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for d in &corpus.datasets {
        if held_out(d) {
            let tag = if target.map(|t| t.id == d.id).unwrap_or(false) {
                SubsetTag::Target
            } else {
                SubsetTag::HeldOut
            };
            test.extend(d.pairs.iter().cloned().map(|p| (p, tag)));
            continue;
        }
        let mut order: Vec<usize> = (0..d.pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(spec.seed, &d.id));
        order.shuffle(&mut rng);
        let n_train = (d.pairs.len() as f64 * spec.train_fraction).floor() as usize;
        for (k, &i) in order.iter().enumerate() {
            if k < n_train {
                train.push(d.pairs[i].clone());
            } else {
                test.push((d.pairs[i].clone(), SubsetTag::SplitSlice));
            }
        }
    }
    if train.is_empty() {
        return Err(SplitError::EmptyTrain);
    }
    Ok(Split { spec: spec.clone(), train, test })
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest line {line}: {msg}")]
    Bad { line: usize, msg: String },
    #[error("manifest does not match the corpus: {0}")]
    Mismatch(String),
}

/// Writes the per-pair train/test assignment: header comments carry the
/// split parameters, then one line per dataset with a flag per pair in
/// corpus order (r train, s test slice, h held out, g target).
pub fn manifest_to_text(corpus: &Corpus, split: &Split) -> String {
    let mut flags: BTreeMap<&str, Vec<char>> = BTreeMap::new();
    for d in &corpus.datasets {
        flags.insert(&d.id, vec!['?'; d.pairs.len()]);
    }
    let locate = |pair: &LabeledPair| -> (usize, usize) {
        let d = corpus
            .datasets
            .iter()
            .position(|d| d.id == pair.dataset_id)
            .expect("split pair references corpus dataset");
        let i = corpus.datasets[d]
            .pairs
            .iter()
            .position(|p| p == pair)
            .expect("split pair present in corpus dataset");
        (d, i)
    };
    for pair in &split.train {
        let (d, i) = locate(pair);
        flags.get_mut(corpus.datasets[d].id.as_str()).unwrap()[i] = 'r';
    }
    for (pair, tag) in &split.test {
        let (d, i) = locate(pair);
        flags.get_mut(corpus.datasets[d].id.as_str()).unwrap()[i] = tag.flag();
    }
    let mut out = String::new();
    out.push_str(&format!("# setting={}\n", split.spec.setting));
    out.push_str(&format!("# target={}\n", split.spec.target.as_deref().unwrap_or("-")));
    out.push_str(&format!("# seed={}\n", split.spec.seed));
    out.push_str(&format!("# train_fraction={}\n", split.spec.train_fraction));
    for d in &corpus.datasets {
        let f: String = flags[d.id.as_str()].iter().collect();
        out.push_str(&format!("{}\t{}\n", d.id, f));
    }
    out
}

/// Reconstructs a split from a manifest written by [`manifest_to_text`].
pub fn manifest_from_text(corpus: &Corpus, text: &str) -> Result<Split, ManifestError> {
    let mut setting = SplitSetting::AllSplit;
    let mut target: Option<String> = None;
    let mut seed = 0u64;
    let mut train_fraction = 0.85f64;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| ManifestError::Bad { line: lineno + 1, msg };
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((key, value)) = rest.split_once('=') {
                match key {
                    "setting" => {
                        setting = SplitSetting::parse_name(value)
                            .ok_or_else(|| bad(format!("unknown setting {value:?}")))?
                    }
                    "target" => target = (value != "-").then(|| value.to_string()),
                    "seed" => {
                        seed = value.parse().map_err(|_| bad(format!("bad seed {value:?}")))?
                    }
                    "train_fraction" => {
                        train_fraction =
                            value.parse().map_err(|_| bad(format!("bad fraction {value:?}")))?
                    }
                    _ => return Err(bad(format!("unknown header key {key:?}"))),
                }
            }
            continue;
        }
        let (id, f) =
            line.split_once('\t').ok_or_else(|| bad("expected id<TAB>flags".to_string()))?;
        let dataset = corpus
            .dataset(id)
            .ok_or_else(|| ManifestError::Mismatch(format!("unknown dataset {id:?}")))?;
        if dataset.pairs.len() != f.chars().count() {
            return Err(ManifestError::Mismatch(format!(
                "dataset {id:?} has {} pairs, manifest lists {}",
                dataset.pairs.len(),
                f.chars().count()
            )));
        }
        for (pair, flag) in dataset.pairs.iter().zip(f.chars()) {
            if flag == 'r' {
                train.push(pair.clone());
            } else {
                let tag = SubsetTag::from_flag(flag)
                    .ok_or_else(|| bad(format!("unknown flag {flag:?}")))?;
                test.push((pair.clone(), tag));
            }
        }
    }
    Ok(Split { spec: SplitSpec { setting, target, seed, train_fraction }, train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    /// Generation takes a few seconds; share one corpus across tests.
    fn shared() -> &'static (Lexicon, Corpus, GenReport) {
        static CORPUS: OnceLock<(Lexicon, Corpus, GenReport)> = OnceLock::new();
        CORPUS.get_or_init(|| {
            let lex = Lexicon::default_lexicon().unwrap();
            let (corpus, report) = generate(&lex, &GenConfig::default()).unwrap();
            (lex, corpus, report)
        })
    }

    #[test]
    fn generation_is_reproducible() {
        let (lex, corpus, _) = shared();
        let (again, _) = generate(lex, &GenConfig::default()).unwrap();
        assert_eq!(corpus_to_tsv(corpus), corpus_to_tsv(&again));
        assert_eq!(datasets_to_tsv(corpus), datasets_to_tsv(&again));
    }

    #[test]
    fn corpus_scale_and_classes() {
        let (_, corpus, report) = shared();
        // Candidate pairs the oracles disagreed on never reach the corpus;
        // `generate` re-verifies every shipped pair before returning.
        for rec in &report.disagreements {
            assert!(rec.reason.contains("vs"), "malformed disagreement record {rec:?}");
        }
        let n_datasets = corpus.datasets.len();
        let n_pairs = corpus.pair_count();
        assert!((150..=250).contains(&n_datasets), "{n_datasets} datasets");
        assert!((8_000..=16_000).contains(&n_pairs), "{n_pairs} pairs");
        let classes: BTreeSet<DatasetClass> = corpus.datasets.iter().map(|d| d.class).collect();
        assert_eq!(classes.len(), 4);
        let hist = corpus.label_histogram();
        for r in ALL_RELATIONS {
            assert!(hist[r.index()] > 0, "no pairs labeled {r}");
        }
    }

    #[test]
    fn quantifier_substitution_is_complete() {
        let (_, corpus, _) = shared();
        for q1 in ALL_QUANTIFIERS {
            for q2 in ALL_QUANTIFIERS {
                if q1 == q2 {
                    continue;
                }
                for filler in SECOND_ARG_FILLERS {
                    let id = format!("qsub.{q1}.{q2}.{filler}");
                    let d = corpus.dataset(&id).unwrap_or_else(|| panic!("{id} missing"));
                    assert!(d.pairs.len() >= 30, "{id} has only {} pairs", d.pairs.len());
                }
            }
        }
    }

    fn has_pair(corpus: &Corpus, left: &str, right: &str, gold: Relation) -> bool {
        corpus.datasets.iter().flat_map(|d| &d.pairs).any(|p| {
            serialize(&p.left) == left && serialize(&p.right) == right && p.gold == gold
        })
    }

    #[test]
    fn canonical_examples_present_with_printed_labels() {
        let (_, corpus, _) = shared();
        for (left, right, gold) in [
            ("(some dog) mobile", "(some puppy) mobile", Relation::ReverseEntailment),
            ("(some animal) mobile", "(some cat) mobile", Relation::ReverseEntailment),
            ("(some Asian) mobile", "(some Thai) mobile", Relation::ReverseEntailment),
            ("(all puppy) bark", "(some puppy) bark", Relation::ForwardEntailment),
            ("(all cat) bark", "(some cat) bark", Relation::ForwardEntailment),
            ("(all hippo) bark", "(some hippo) bark", Relation::ForwardEntailment),
            ("(all puppy) French", "(some puppy) European", Relation::ForwardEntailment),
            ("(all cat) French", "(some cat) European", Relation::ForwardEntailment),
            ("(all hippo) French", "(some hippo) European", Relation::ForwardEntailment),
            ("(all puppy) bark", "(no puppy) (not bark)", Relation::Equivalence),
            ("(all cat) bark", "(no cat) (not bark)", Relation::Equivalence),
            ("(all hippo) bark", "(no hippo) (not bark)", Relation::Equivalence),
        ] {
            assert!(has_pair(corpus, left, right, gold), "missing {left} {gold} {right}");
        }
    }

    #[test]
    fn datasets_never_mix_labels() {
        let (_, corpus, _) = shared();
        for d in &corpus.datasets {
            for p in &d.pairs {
                assert_eq!(p.gold, d.gold, "{} mixes labels", d.id);
            }
        }
    }

    #[test]
    fn negation_variants_cover_all_positions_and_restore_on_double_toggle() {
        let (_, corpus, _) = shared();
        let mut seen_positions = BTreeSet::new();
        for d in &corpus.datasets {
            if d.class == DatasetClass::NegationVariant {
                seen_positions.insert(d.id.rsplit('.').next().unwrap().to_string());
            }
        }
        assert_eq!(seen_positions.len(), 4, "positions seen: {seen_positions:?}");

        let d = corpus.datasets.iter().find(|d| d.class == DatasetClass::NegationVariant).unwrap();
        let pos = NegatedPosition::parse_name(d.id.rsplit('.').next().unwrap()).unwrap();
        let once = negate_position_pairs(d, pos);
        let relabeled = Dataset {
            pairs: once
                .iter()
                .map(|(l, r)| LabeledPair {
                    left: l.clone(),
                    right: r.clone(),
                    gold: d.gold,
                    dataset_id: d.id.clone(),
                })
                .collect(),
            ..d.clone()
        };
        let twice = negate_position_pairs(&relabeled, pos);
        let original: Vec<(Sentence, Sentence)> =
            d.pairs.iter().map(|p| (p.left.clone(), p.right.clone())).collect();
        assert_eq!(twice, original);
    }

    #[test]
    fn corpus_round_trips_through_files() {
        let (lex, corpus, _) = shared();
        let corpus_tsv = corpus_to_tsv(corpus);
        let datasets_tsv = datasets_to_tsv(corpus);
        let reloaded = corpus_from_tsv(&corpus_tsv, &datasets_tsv, lex, corpus.seed).unwrap();
        assert_eq!(reloaded.datasets.len(), corpus.datasets.len());
        assert_eq!(corpus_to_tsv(&reloaded), corpus_tsv);
        assert_eq!(datasets_to_tsv(&reloaded), datasets_tsv);
    }

    #[test]
    fn all_split_partitions_each_dataset() {
        let (_, corpus, _) = shared();
        let spec = SplitSpec::new(SplitSetting::AllSplit, None, 7);
        let split = make_split(corpus, &spec).unwrap();
        assert_eq!(split.train.len() + split.test.len(), corpus.pair_count());
        assert!(split.test.iter().all(|(_, tag)| *tag == SubsetTag::SplitSlice));
        let again = make_split(corpus, &spec).unwrap();
        assert_eq!(again.train.len(), split.train.len());
        assert!(again.train.iter().zip(&split.train).all(|(a, b)| a == b));
        let d = &corpus.datasets[0];
        let n_train = split.train.iter().filter(|p| p.dataset_id == d.id).count();
        assert_eq!(n_train, (d.pairs.len() as f64 * 0.85).floor() as usize);
    }

    #[test]
    fn set_out_holds_out_exactly_the_target() {
        let (_, corpus, _) = shared();
        let target = "qsub.most.no.bark";
        let spec = SplitSpec::new(SplitSetting::SetOut, Some(target), 7);
        let split = make_split(corpus, &spec).unwrap();
        let target_pairs = corpus.dataset(target).unwrap().pairs.len();
        let held: Vec<_> = split
            .test
            .iter()
            .filter(|(_, tag)| matches!(tag, SubsetTag::Target | SubsetTag::HeldOut))
            .collect();
        assert_eq!(held.len(), target_pairs);
        assert!(held.iter().all(|(p, tag)| p.dataset_id == target && *tag == SubsetTag::Target));
        assert!(split.train.iter().all(|p| p.dataset_id != target));
    }

    #[test]
    fn subclass_out_holds_out_same_pattern_different_fillers() {
        let (_, corpus, _) = shared();
        let target = "qsub.most.no.bark";
        let spec = SplitSpec::new(SplitSetting::SubclassOut, Some(target), 7);
        let split = make_split(corpus, &spec).unwrap();
        for filler in SECOND_ARG_FILLERS {
            let id = format!("qsub.most.no.{filler}");
            assert!(split.train.iter().all(|p| p.dataset_id != id));
        }
        // The mirrored order is a different subclass and stays in training.
        assert!(split.train.iter().any(|p| p.dataset_id == "qsub.no.most.bark"));
    }

    #[test]
    fn pair_out_holds_out_every_dataset_with_the_pair() {
        let (_, corpus, _) = shared();
        let target = "qsub.most.no.bark";
        let spec = SplitSpec::new(SplitSetting::PairOut, Some(target), 7);
        let split = make_split(corpus, &spec).unwrap();
        let held_ids: BTreeSet<&str> = split
            .test
            .iter()
            .filter(|(_, tag)| matches!(tag, SubsetTag::Target | SubsetTag::HeldOut))
            .map(|(p, _)| p.dataset_id.as_str())
            .collect();
        for d in &corpus.datasets {
            let has_pair = d.quantifiers.0 != d.quantifiers.1
                && d.features_quantifier_pair(Quantifier::Most, Quantifier::No);
            assert_eq!(held_ids.contains(d.id.as_str()), has_pair, "{}", d.id);
            if has_pair {
                assert!(split.train.iter().all(|p| p.dataset_id != d.id));
            }
        }
        assert!(split.train.iter().any(|p| p.dataset_id.starts_with("qsub.most.some")));
        assert!(split.train.iter().any(|p| p.dataset_id.starts_with("qsub.no.all")));
    }

    #[test]
    fn split_errors() {
        let (_, corpus, _) = shared();
        assert!(matches!(
            make_split(corpus, &SplitSpec::new(SplitSetting::SetOut, None, 1)),
            Err(SplitError::MissingTarget(_))
        ));
        assert!(matches!(
            make_split(corpus, &SplitSpec::new(SplitSetting::SetOut, Some("nope"), 1)),
            Err(SplitError::UnknownTarget(_))
        ));
        let mono =
            corpus.datasets.iter().find(|d| d.class == DatasetClass::Monotonicity).unwrap();
        assert!(matches!(
            make_split(corpus, &SplitSpec::new(SplitSetting::SetOut, Some(&mono.id), 1)),
            Err(SplitError::TargetNotQuantifierSubstitution(..))
        ));
    }

    #[test]
    fn manifest_round_trips() {
        let (_, corpus, _) = shared();
        let spec = SplitSpec::new(SplitSetting::PairOut, Some("qsub.some.no.bark"), 11);
        let split = make_split(corpus, &spec).unwrap();
        let text = manifest_to_text(corpus, &split);
        let back = manifest_from_text(corpus, &text).unwrap();
        assert_eq!(back.spec.setting, SplitSetting::PairOut);
        assert_eq!(back.spec.target.as_deref(), Some("qsub.some.no.bark"));
        assert_eq!(back.train.len(), split.train.len());
        assert_eq!(back.test.len(), split.test.len());
        let key = |p: &LabeledPair| (serialize(&p.left), serialize(&p.right), p.dataset_id.clone());
        let mut a: Vec<_> = split.train.iter().map(key).collect();
        let mut b: Vec<_> = back.train.iter().map(key).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
