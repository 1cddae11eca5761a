//! The seven entailment relations and their algebra: classification of set
//! pairs, converses, complement transforms, and relation composition (join).
//!
//! Relations are interpreted over non-degenerate denotations: sets that are
//! neither empty nor the whole universe. On that domain the seven definitions
//! are mutually exclusive and jointly exhaustive, with independence acting as
//! the else case.

use std::fmt;

use thiserror::Error;

/// A finite set encoded as a bitmask over universe elements 0..=63.
pub type SetMask = u64;

/// One of the seven entailment relations.
///
/// The declared order is also the fixed tie-breaking and serialization order
/// used everywhere in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `x = y`
    Equivalence,
    /// `x ⊂ y` (strict)
    ForwardEntailment,
    /// `x ⊃ y` (strict)
    ReverseEntailment,
    /// disjoint and non-exhaustive
    Alternation,
    /// disjoint and exhaustive
    Negation,
    /// overlapping and exhaustive
    Cover,
    /// none of the above
    Independence,
}

/// All seven relations in canonical order.
pub const ALL_RELATIONS: [Relation; 7] = [
    Relation::Equivalence,
    Relation::ForwardEntailment,
    Relation::ReverseEntailment,
    Relation::Alternation,
    Relation::Negation,
    Relation::Cover,
    Relation::Independence,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationParseError {
    #[error("unknown relation symbol {0:?} (expected one of = < > | ^ v #)")]
    UnknownSymbol(String),
}

impl Relation {
    /// Index in [`ALL_RELATIONS`].
    pub fn index(self) -> usize {
        match self {
            Relation::Equivalence => 0,
            Relation::ForwardEntailment => 1,
            Relation::ReverseEntailment => 2,
            Relation::Alternation => 3,
            Relation::Negation => 4,
            Relation::Cover => 5,
            Relation::Independence => 6,
        }
    }

    pub fn from_index(i: usize) -> Option<Relation> {
        ALL_RELATIONS.get(i).copied()
    }

    /// The ASCII symbol used in all data files.
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equivalence => "=",
            Relation::ForwardEntailment => "<",
            Relation::ReverseEntailment => ">",
            Relation::Alternation => "|",
            Relation::Negation => "^",
            Relation::Cover => "v",
            Relation::Independence => "#",
        }
    }

    pub fn parse_symbol(s: &str) -> Result<Relation, RelationParseError> {
        Ok(match s {
            "=" => Relation::Equivalence,
            "<" => Relation::ForwardEntailment,
            ">" => Relation::ReverseEntailment,
            "|" => Relation::Alternation,
            "^" => Relation::Negation,
            "v" => Relation::Cover,
            "#" => Relation::Independence,
            other => return Err(RelationParseError::UnknownSymbol(other.to_string())),
        })
    }

    /// Swaps the two strict entailments and fixes everything else. This is the
    /// relation seen from the other side of the pair.
    pub fn converse(self) -> Relation {
        match self {
            Relation::ForwardEntailment => Relation::ReverseEntailment,
            Relation::ReverseEntailment => Relation::ForwardEntailment,
            other => other,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Classifies the relation between two subsets of a finite universe.
///
/// `x` and `y` must be subsets of `universe`, which must be non-empty. The
/// seven definitions are checked in canonical order; on non-degenerate inputs
/// (neither set empty or universal) exactly one matches.
pub fn relation_of_sets(x: SetMask, y: SetMask, universe: SetMask) -> Relation {
    debug_assert!(universe != 0, "universe must be non-empty");
    debug_assert_eq!(x & !universe, 0, "x must be a subset of the universe");
    debug_assert_eq!(y & !universe, 0, "y must be a subset of the universe");
    let both = (x & y).count_ones();
    let only_x = (x & !y).count_ones();
    let only_y = (y & !x).count_ones();
    let neither = (universe & !x & !y).count_ones();
    relation_of_regions(both, only_x, only_y, neither)
}

/// Same classification, from the four Venn-region cardinalities
/// (|x∩y|, |x\y|, |y\x|, |D\(x∪y)|).
pub fn relation_of_regions(both: u32, only_x: u32, only_y: u32, neither: u32) -> Relation {
    if only_x == 0 && only_y == 0 {
        Relation::Equivalence
    } else if only_x == 0 {
        Relation::ForwardEntailment
    } else if only_y == 0 {
        Relation::ReverseEntailment
    } else if both == 0 && neither > 0 {
        Relation::Alternation
    } else if both == 0 {
        Relation::Negation
    } else if neither == 0 {
        Relation::Cover
    } else {
        Relation::Independence
    }
}

/// Relation between `complement(x)` and `y`, given the relation between
/// `x` and `y`. Valid on non-degenerate sets.
pub fn complement_left(r: Relation) -> Relation {
    match r {
        Relation::Equivalence => Relation::Negation,
        Relation::ForwardEntailment => Relation::Cover,
        Relation::ReverseEntailment => Relation::Alternation,
        Relation::Alternation => Relation::ReverseEntailment,
        Relation::Negation => Relation::Equivalence,
        Relation::Cover => Relation::ForwardEntailment,
        Relation::Independence => Relation::Independence,
    }
}

/// Relation between `x` and `complement(y)`, given the relation between
/// `x` and `y`.
pub fn complement_right(r: Relation) -> Relation {
    complement_left(r.converse()).converse()
}

/// Relation between `complement(x)` and `complement(y)`: the projection of a
/// lexical relation through negation of both predicates. Strict entailments
/// swap, alternation and cover swap, the rest are fixed. An involution.
pub fn project_negation(r: Relation) -> Relation {
    match r {
        Relation::ForwardEntailment => Relation::ReverseEntailment,
        Relation::ReverseEntailment => Relation::ForwardEntailment,
        Relation::Alternation => Relation::Cover,
        Relation::Cover => Relation::Alternation,
        other => other,
    }
}

/// Composition of two relations along a chain `x r1 y`, `y r2 z`.
///
/// Returns the unique relation holding between `x` and `z` across every
/// witnessing triple of non-degenerate sets, or independence when more than
/// one relation is attainable. The table is frozen here and checked against
/// exhaustive enumeration over small universes in the test suite.
pub fn join(r1: Relation, r2: Relation) -> Relation {
    use Relation::*;
    const E: Relation = Equivalence;
    const F: Relation = ForwardEntailment;
    const R: Relation = ReverseEntailment;
    const A: Relation = Alternation;
    const N: Relation = Negation;
    const C: Relation = Cover;
    const I: Relation = Independence;
    // Rows: r1; columns: r2; both in canonical order [E, F, R, A, N, C, I].
    const TABLE: [[Relation; 7]; 7] = [
        [E, F, R, A, N, C, I],
        [F, F, I, A, A, I, I],
        [R, I, R, I, C, C, I],
        [A, I, A, I, F, F, I],
        [N, C, A, R, E, F, I],
        [C, C, I, R, R, I, I],
        [I, I, I, I, I, I, I],
    ];
    TABLE[r1.index()][r2.index()]
}

/// Which joint truth values a sentence pair attains across admissible models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TruthPatternSet {
    pub tt: bool,
    pub tf: bool,
    pub ft: bool,
    pub ff: bool,
}

/// Why a truth-pattern set cannot be mapped to a relation.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PatternError {
    #[error("no admissible model satisfies the constraints")]
    Unsatisfiable,
    #[error("left sentence is {} in every admissible model", if *.0 { "true" } else { "false" })]
    DegenerateLeft(bool),
    #[error("right sentence is {} in every admissible model", if *.0 { "true" } else { "false" })]
    DegenerateRight(bool),
}

impl TruthPatternSet {
    pub fn record(&mut self, left: bool, right: bool) {
        match (left, right) {
            (true, true) => self.tt = true,
            (true, false) => self.tf = true,
            (false, true) => self.ft = true,
            (false, false) => self.ff = true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.tt || self.tf || self.ft || self.ff)
    }

    /// True once every pattern consistent with *some* relation has been seen;
    /// lets enumeration stop early.
    pub fn is_full(&self) -> bool {
        self.tt && self.tf && self.ft && self.ff
    }

    /// Maps the attainable patterns to a relation, treating the model sets of
    /// the two sentences as the `x` and `y` of the set-level definitions.
    /// Sentences that are constant over the admissible models are flagged as
    /// degenerate rather than labeled.
    pub fn to_relation(self) -> Result<Relation, PatternError> {
        if self.is_empty() {
            return Err(PatternError::Unsatisfiable);
        }
        if !(self.ft || self.ff) {
            return Err(PatternError::DegenerateLeft(true));
        }
        if !(self.tt || self.tf) {
            return Err(PatternError::DegenerateLeft(false));
        }
        if !(self.tf || self.ff) {
            return Err(PatternError::DegenerateRight(true));
        }
        if !(self.tt || self.ft) {
            return Err(PatternError::DegenerateRight(false));
        }
        // With both sentences non-constant exactly seven patterns remain.
        Ok(match (self.tt, self.tf, self.ft, self.ff) {
            (true, false, false, true) => Relation::Equivalence,
            (true, false, true, true) => Relation::ForwardEntailment,
            (true, true, false, true) => Relation::ReverseEntailment,
            (false, true, true, true) => Relation::Alternation,
            (false, true, true, false) => Relation::Negation,
            (true, true, true, false) => Relation::Cover,
            (true, true, true, true) => Relation::Independence,
            other => unreachable!("non-degenerate pattern set {other:?}"),
        })
    }
}
