//! The lexicon: the closed vocabulary of content predicates and the declared
//! entailment relations among them.
//!
//! The relation table is closed under relation composition at load time (a
//! chain `a < b`, `b < c` forces `a < c`), and a finite witness model is
//! constructed to prove that every entry is simultaneously satisfiable. An
//! inconsistent table — say `dog = cat` alongside `dog | cat`, or a cycle of
//! strict entailments — is rejected with an error.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::Quantifier;
use crate::relation::{join, relation_of_sets, Relation, SetMask};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected `word<TAB>relation<TAB>word`, found {text:?}")]
    BadLine { line: usize, text: String },
    #[error("line {line}: {source}")]
    BadSymbol {
        line: usize,
        source: crate::relation::RelationParseError,
    },
    #[error("line {line}: relation of a word to itself is not allowed ({word})")]
    SelfRelation { line: usize, word: String },
    #[error("line {line}: {word:?} is reserved and cannot be a predicate")]
    ReservedWord { line: usize, word: String },
    #[error("conflicting entries for {a} / {b}: {r1} vs {r2}")]
    ConflictingEntries { a: String, b: String, r1: Relation, r2: Relation },
    #[error("closure contradiction for {a} / {b}: declared {declared}, derived {derived} via {via}")]
    ClosureContradiction { a: String, b: String, declared: Relation, derived: Relation, via: String },
    #[error("no finite model satisfies the table: word {0} cannot have a non-empty extension")]
    UnsatisfiableWord(String),
    #[error("witness model violates entry {a} {rel} {b}: the built extensions realize {found}")]
    WitnessMismatch { a: String, b: String, rel: Relation, found: Relation },
    #[error("lexicon declares no predicates")]
    Empty,
}

/// The loaded lexicon: predicates, the closed relation table, and the fixed
/// function words (six quantifiers plus `not`).
#[derive(Debug, Clone)]
pub struct Lexicon {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Oriented relation for each unordered pair (i < j), after closure.
    /// Absent pairs are unconstrained.
    relations: BTreeMap<(usize, usize), Relation>,
}

impl Lexicon {
    /// Parses the line-oriented table format. Comment lines start with `#`.
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut words: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut declared: BTreeMap<(usize, usize), Relation> = BTreeMap::new();

        let intern = |w: &str, words: &mut Vec<String>, index: &mut BTreeMap<String, usize>| {
            if let Some(&i) = index.get(w) {
                return i;
            }
            let i = words.len();
            words.push(w.to_string());
            index.insert(w.to_string(), i);
            i
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(LexiconError::BadLine { line, text: raw.to_string() });
            }
            let (a, sym, b) = (fields[0], fields[1], fields[2]);
            for w in [a, b] {
                if w.is_empty() || w.contains('(') || w.contains(')') {
                    return Err(LexiconError::BadLine { line, text: raw.to_string() });
                }
                if Quantifier::from_token(w).is_some() || w == "not" {
                    return Err(LexiconError::ReservedWord { line, word: w.to_string() });
                }
            }
            let rel = Relation::parse_symbol(sym)
                .map_err(|source| LexiconError::BadSymbol { line, source })?;
            if a == b {
                return Err(LexiconError::SelfRelation { line, word: a.to_string() });
            }
            let ia = intern(a, &mut words, &mut index);
            let ib = intern(b, &mut words, &mut index);
            // Declared independence introduces the words but adds no constraint.
            if rel == Relation::Independence {
                continue;
            }
            let (key, oriented) = if ia < ib { ((ia, ib), rel) } else { ((ib, ia), rel.converse()) };
            if let Some(&prev) = declared.get(&key) {
                if prev != oriented {
                    return Err(LexiconError::ConflictingEntries {
                        a: words[key.0].clone(),
                        b: words[key.1].clone(),
                        r1: prev,
                        r2: oriented,
                    });
                }
            } else {
                declared.insert(key, oriented);
            }
        }

        if words.is_empty() {
            return Err(LexiconError::Empty);
        }

        let mut lex = Lexicon { words, index, relations: declared };
        lex.close()?;
        lex.verify_witness()?;
        Ok(lex)
    }

    /// The lexicon shipped with the crate.
    pub fn default_lexicon() -> Result<Lexicon, LexiconError> {
        Lexicon::parse(DEFAULT_LEXICON)
    }

    /// The default table as text, for writing alongside generated corpora.
    pub fn default_source() -> &'static str {
        DEFAULT_LEXICON
    }

    fn get(&self, i: usize, j: usize) -> Option<Relation> {
        if i == j {
            return Some(Relation::Equivalence);
        }
        if i < j {
            self.relations.get(&(i, j)).copied()
        } else {
            self.relations.get(&(j, i)).map(|r| r.converse())
        }
    }

    fn set(&mut self, i: usize, j: usize, r: Relation) {
        if i < j {
            self.relations.insert((i, j), r);
        } else {
            self.relations.insert((j, i), r.converse());
        }
    }

    /// Closes the table under composition: whenever relations for (a,b) and
    /// (b,c) force a unique relation for (a,c), it is added; a forced relation
    /// that contradicts a present one is an inconsistency.
    fn close(&mut self) -> Result<(), LexiconError> {
        let n = self.words.len();
        loop {
            let mut changed = false;
            for b in 0..n {
                for a in 0..n {
                    if a == b {
                        continue;
                    }
                    let Some(rab) = self.get(a, b) else { continue };
                    for c in 0..n {
                        if c == a || c == b {
                            continue;
                        }
                        let Some(rbc) = self.get(b, c) else { continue };
                        let derived = join(rab, rbc);
                        if derived == Relation::Independence {
                            continue;
                        }
                        match self.get(a, c) {
                            Some(existing) if existing == derived => {}
                            Some(existing) => {
                                return Err(LexiconError::ClosureContradiction {
                                    a: self.words[a].clone(),
                                    b: self.words[c].clone(),
                                    declared: existing,
                                    derived,
                                    via: self.words[b].clone(),
                                });
                            }
                            None => {
                                self.set(a, c, derived);
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Builds one finite model satisfying every closed entry, then verifies
    /// each entry against it. One entity is created per word, one per cover
    /// pair (their overlap witness), plus a background entity; each entity's
    /// attribute vector is solved from the binary clauses the relations
    /// induce, preferring small extensions.
    fn verify_witness(&self) -> Result<(), LexiconError> {
        let n = self.words.len();
        let mut seed_sets: Vec<Vec<usize>> = (0..n).map(|w| vec![w]).collect();
        for (&(i, j), &rel) in &self.relations {
            if rel == Relation::Cover {
                seed_sets.push(vec![i, j]);
            }
        }
        seed_sets.push(Vec::new());
        if seed_sets.len() > 63 {
            // SetMask is a u64 bitmask; cap the witness universe.
            seed_sets.truncate(63);
        }

        let mut extensions: Vec<SetMask> = vec![0; n];
        for (entity, seeds) in seed_sets.iter().enumerate() {
            let assignment = self.solve_entity(seeds).ok_or_else(|| {
                LexiconError::UnsatisfiableWord(
                    seeds.first().map(|&w| self.words[w].clone()).unwrap_or_default(),
                )
            })?;
            for (w, ext) in extensions.iter_mut().enumerate() {
                if assignment[w] {
                    *ext |= 1 << entity;
                }
            }
        }
        let universe: SetMask = (1 << seed_sets.len()) - 1;
        for (&(i, j), &rel) in &self.relations {
            let found = relation_of_sets(extensions[i], extensions[j], universe);
            if found != rel {
                return Err(LexiconError::WitnessMismatch {
                    a: self.words[i].clone(),
                    b: self.words[j].clone(),
                    rel,
                    found,
                });
            }
        }
        Ok(())
    }

    /// Backtracking assignment of the word attributes of a single entity,
    /// preferring `false`, with the seed words forced true. All induced
    /// clauses are binary, so unit propagation does the heavy lifting.
    fn solve_entity(&self, seeds: &[usize]) -> Option<Vec<bool>> {
        let n = self.words.len();
        let mut value: Vec<Option<bool>> = vec![None; n];
        for &s in seeds {
            match value[s] {
                Some(true) => continue,
                Some(false) => return None,
                None => {
                    value[s] = Some(true);
                    if !self.propagate(&mut value, s) {
                        return None;
                    }
                }
            }
        }
        self.solve_rec(&mut value, 0).then(|| value.iter().map(|v| v.unwrap_or(false)).collect())
    }

    fn solve_rec(&self, value: &mut Vec<Option<bool>>, from: usize) -> bool {
        let n = self.words.len();
        let Some(var) = (from..n).find(|&w| value[w].is_none()) else {
            return true;
        };
        for choice in [false, true] {
            let snapshot = value.clone();
            value[var] = Some(choice);
            if self.propagate(value, var) && self.solve_rec(value, var + 1) {
                return true;
            }
            *value = snapshot;
        }
        false
    }

    /// Propagates consequences of assigning `var`; returns false on conflict.
    fn propagate(&self, value: &mut Vec<Option<bool>>, var: usize) -> bool {
        let n = self.words.len();
        let mut queue = vec![var];
        while let Some(w) = queue.pop() {
            let vw = value[w].expect("queued variable must be assigned");
            for other in 0..n {
                if other == w {
                    continue;
                }
                let Some(rel) = self.get(w, other) else { continue };
                // Consequence of the pair constraint for `other`, if any.
                let forced = match (rel, vw) {
                    (Relation::Equivalence, v) => Some(v),
                    (Relation::ForwardEntailment, true) => Some(true),
                    (Relation::ReverseEntailment, false) => Some(false),
                    (Relation::Alternation, true) => Some(false),
                    (Relation::Negation, v) => Some(!v),
                    (Relation::Cover, false) => Some(true),
                    _ => None,
                };
                if let Some(f) = forced {
                    match value[other] {
                        Some(v) if v == f => {}
                        Some(_) => return false,
                        None => {
                            value[other] = Some(f);
                            queue.push(other);
                        }
                    }
                }
            }
        }
        true
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Content predicates in deterministic (sorted) order.
    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn predicate_count(&self) -> usize {
        self.words.len()
    }

    /// The closed relation between two predicates, if the table constrains it.
    /// Identical words are equivalent; unrelated pairs return `None`.
    pub fn relation(&self, a: &str, b: &str) -> Option<Relation> {
        let ia = *self.index.get(a)?;
        let ib = *self.index.get(b)?;
        self.get(ia, ib)
    }

    /// All strict entailment pairs `(narrow, broad)` of the closed table, in
    /// deterministic order. These drive the monotonicity data.
    pub fn entailment_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::new();
        for (&(i, j), &rel) in &self.relations {
            match rel {
                Relation::ForwardEntailment => {
                    pairs.push((self.words[i].clone(), self.words[j].clone()))
                }
                Relation::ReverseEntailment => {
                    pairs.push((self.words[j].clone(), self.words[i].clone()))
                }
                _ => {}
            }
        }
        pairs.sort();
        pairs
    }

    /// Model vocabulary: all predicates, the six quantifiers, and `not`,
    /// in deterministic order.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut vocab: Vec<String> = self.predicates().map(str::to_string).collect();
        for q in crate::grammar::ALL_QUANTIFIERS {
            vocab.push(q.token().to_string());
        }
        vocab.push("not".to_string());
        vocab
    }

    /// Renders the closed table in the entry file format (diagnostics).
    pub fn render_closed_table(&self) -> String {
        let mut out = String::new();
        for (&(i, j), &rel) in &self.relations {
            let _ = writeln!(out, "{}\t{}\t{}", self.words[i], rel.symbol(), self.words[j]);
        }
        out
    }
}
