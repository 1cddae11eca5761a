//! The restricted sentence language: a quantifier followed by two predicates,
//! either of which may be negated. Provides the parenthesized surface form
//! used in all data files and the binary composition tree the network
//! consumes.

use std::fmt;

use thiserror::Error;

use crate::lexicon::Lexicon;

/// The six quantifiers of the fragment. The numeric ones read "at least n".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    All,
    Some,
    No,
    Most,
    Two,
    Three,
}

pub const ALL_QUANTIFIERS: [Quantifier; 6] = [
    Quantifier::All,
    Quantifier::Some,
    Quantifier::No,
    Quantifier::Most,
    Quantifier::Two,
    Quantifier::Three,
];

impl Quantifier {
    pub fn token(self) -> &'static str {
        match self {
            Quantifier::All => "all",
            Quantifier::Some => "some",
            Quantifier::No => "no",
            Quantifier::Most => "most",
            Quantifier::Two => "two",
            Quantifier::Three => "three",
        }
    }

    pub fn from_token(tok: &str) -> Option<Quantifier> {
        ALL_QUANTIFIERS.iter().copied().find(|q| q.token() == tok)
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A content predicate, possibly under `not`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    pub name: String,
    pub negated: bool,
}

impl Predicate {
    pub fn plain(name: &str) -> Predicate {
        Predicate { name: name.to_string(), negated: false }
    }

    pub fn negated(name: &str) -> Predicate {
        Predicate { name: name.to_string(), negated: true }
    }

    pub fn toggled(&self) -> Predicate {
        Predicate { name: self.name.clone(), negated: !self.negated }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// A full sentence: `(quantifier arg1) arg2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub quantifier: Quantifier,
    pub arg1: Predicate,
    pub arg2: Predicate,
}

impl Sentence {
    pub fn new(quantifier: Quantifier, arg1: Predicate, arg2: Predicate) -> Sentence {
        Sentence { quantifier, arg1, arg2 }
    }

    /// All distinct content-predicate names mentioned, in slot order.
    pub fn predicate_names(&self) -> Vec<&str> {
        let mut names = vec![self.arg1.name.as_str()];
        if self.arg2.name != self.arg1.name {
            names.push(self.arg2.name.as_str());
        }
        names
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}) {}", self.quantifier, self.arg1, self.arg2)
    }
}

/// Canonical surface form: single spaces, parentheses around the quantifier
/// phrase and around each negated predicate.
pub fn serialize(s: &Sentence) -> String {
    s.to_string()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed sentence: {0}")]
    Malformed(String),
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("negation may only apply to a single predicate, found {0:?}")]
    BadNegation(String),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
            }
            c => word.push(c),
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

struct Tokens {
    items: Vec<String>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&str> {
        self.items.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Option<&str> {
        let t = self.items.get(self.pos).map(String::as_str);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(ParseError::Malformed(format!("expected {tok:?}, found {t:?}"))),
            None => Err(ParseError::Malformed(format!("expected {tok:?}, found end of input"))),
        }
    }
}

fn parse_predicate(tokens: &mut Tokens, lex: &Lexicon) -> Result<Predicate, ParseError> {
    match tokens.peek() {
        Some("(") => {
            tokens.next();
            let head = tokens
                .next()
                .ok_or_else(|| ParseError::Malformed("unclosed parenthesis".into()))?;
            if head != "not" {
                return Err(ParseError::BadNegation(head.to_string()));
            }
            let word = tokens
                .next()
                .ok_or_else(|| ParseError::Malformed("missing predicate after not".into()))?
                .to_string();
            if word == "(" || word == ")" {
                return Err(ParseError::BadNegation(word));
            }
            if !lex.contains(&word) {
                return Err(ParseError::UnknownToken(word));
            }
            tokens.expect(")")?;
            Ok(Predicate::negated(&word))
        }
        Some(")") | None => Err(ParseError::Malformed("expected a predicate".into())),
        Some(word) => {
            let word = word.to_string();
            tokens.next();
            if Quantifier::from_token(&word).is_some() || word == "not" {
                return Err(ParseError::Malformed(format!(
                    "{word:?} cannot appear in predicate position"
                )));
            }
            if !lex.contains(&word) {
                return Err(ParseError::UnknownToken(word));
            }
            Ok(Predicate::plain(&word))
        }
    }
}

/// Parses the parenthesized surface form, e.g. `(no cat) (not bark)`.
/// Whitespace-insensitive; round-trips with [`serialize`].
pub fn parse(text: &str, lex: &Lexicon) -> Result<Sentence, ParseError> {
    let mut tokens = Tokens { items: tokenize(text), pos: 0 };
    tokens.expect("(")?;
    let q_tok = tokens
        .next()
        .ok_or_else(|| ParseError::Malformed("missing quantifier".into()))?
        .to_string();
    let quantifier = Quantifier::from_token(&q_tok).ok_or_else(|| {
        if q_tok == "(" || q_tok == ")" {
            ParseError::Malformed("expected a quantifier".into())
        } else {
            ParseError::UnknownToken(q_tok.clone())
        }
    })?;
    let arg1 = parse_predicate(&mut tokens, lex)?;
    tokens.expect(")")?;
    let arg2 = parse_predicate(&mut tokens, lex)?;
    if tokens.peek().is_some() {
        return Err(ParseError::Malformed(format!(
            "trailing tokens after sentence: {:?}",
            tokens.items[tokens.pos..].join(" ")
        )));
    }
    Ok(Sentence { quantifier, arg1, arg2 })
}

/// Composition sites of the binary tree the network evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositionContext {
    /// `not` merged with a predicate.
    Negation,
    /// A quantifier merged with its first argument.
    QuantifierFirstArg,
    /// A quantifier phrase merged with the second argument.
    QuantifierSecondArg,
}

/// A binary tree over vocabulary tokens. Internal nodes carry the context of
/// the composition they perform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompositionTree {
    Leaf(String),
    Node {
        context: CompositionContext,
        left: Box<CompositionTree>,
        right: Box<CompositionTree>,
    },
}

impl CompositionTree {
    pub fn leaf(token: &str) -> CompositionTree {
        CompositionTree::Leaf(token.to_string())
    }

    pub fn node(
        context: CompositionContext,
        left: CompositionTree,
        right: CompositionTree,
    ) -> CompositionTree {
        CompositionTree::Node { context, left: Box::new(left), right: Box::new(right) }
    }

    /// Leaf tokens in surface order.
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            CompositionTree::Leaf(tok) => vec![tok.as_str()],
            CompositionTree::Node { left, right, .. } => {
                let mut l = left.leaves();
                l.extend(right.leaves());
                l
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CompositionTree::Leaf(_) => 1,
            CompositionTree::Node { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

fn predicate_tree(p: &Predicate) -> CompositionTree {
    if p.negated {
        CompositionTree::node(
            CompositionContext::Negation,
            CompositionTree::leaf("not"),
            CompositionTree::leaf(&p.name),
        )
    } else {
        CompositionTree::leaf(&p.name)
    }
}

/// Builds the composition tree mirroring the sentence: any `not` composes
/// first, then the quantifier with its first argument, then the quantifier
/// phrase with the second argument at the root.
pub fn to_tree(s: &Sentence) -> CompositionTree {
    let qp = CompositionTree::node(
        CompositionContext::QuantifierFirstArg,
        CompositionTree::leaf(s.quantifier.token()),
        predicate_tree(&s.arg1),
    );
    CompositionTree::node(CompositionContext::QuantifierSecondArg, qp, predicate_tree(&s.arg2))
}
