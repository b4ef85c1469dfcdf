//! Process terms: names, action prefix, weighted binary choice and recursion.
//!
//! Concrete syntax (whitespace-insensitive):
//!
//! ```text
//! term     ::= "rec" NAME "." term | choice
//! choice   ::= prefix { "+[" rational "]" prefix }     (right-associative)
//! prefix   ::= LABEL "." prefix | atom
//! atom     ::= NAME | "(" term ")"
//! rational ::= INT "/" POSINT | INT | DECIMAL
//! ```
//!
//! Labels start with a lowercase letter, names with an uppercase one. Names of
//! the form `B` followed by digits are reserved for canonical binders and may
//! only occur bound in user input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, ParseError, Result};
use crate::rational::{format_rational, is_unit_interval, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if !is_identifier(&text, |c| c.is_ascii_lowercase()) {
            return Err(Error::Identifier {
                text,
                reason: "labels are [a-z][A-Za-z0-9_]*",
            });
        }
        if text == "rec" {
            return Err(Error::Identifier {
                text,
                reason: "`rec` is a keyword",
            });
        }
        Ok(Label(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(String);

impl Name {
    /// A user-facing name; rejects the reserved canonical-binder names.
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if !is_identifier(&text, |c| c.is_ascii_uppercase()) {
            return Err(Error::Identifier {
                text,
                reason: "names are [A-Z][A-Za-z0-9_]*",
            });
        }
        if is_reserved(&text) {
            return Err(Error::Identifier {
                text,
                reason: "B followed by digits is reserved for canonical binders",
            });
        }
        Ok(Name(text))
    }

    /// The `index`-th canonical binder, `B<index>`.
    pub fn canonical(index: usize) -> Self {
        Name(format!("B{index}"))
    }

    pub fn is_reserved(&self) -> bool {
        is_reserved(&self.0)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn unchecked(text: String) -> Self {
        Name(text)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_identifier(text: &str, first: impl Fn(char) -> bool) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if first(c) => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn is_reserved(text: &str) -> bool {
    text.len() > 1 && text.starts_with('B') && text[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Abstract syntax of the calculus. The choice `l +[e] r` behaves as `l` with
/// probability `e` and as `r` with probability `1 - e`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Name(Name),
    Prefix(Label, Box<Term>),
    Choice(Box<Term>, Rational, Box<Term>),
    Rec(Name, Box<Term>),
}

impl Term {
    pub fn name(x: &Name) -> Term {
        Term::Name(x.clone())
    }

    pub fn prefix(a: &Label, body: Term) -> Term {
        Term::Prefix(a.clone(), Box::new(body))
    }

    pub fn choice(left: Term, weight: Rational, right: Term) -> Result<Term> {
        if !is_unit_interval(&weight) {
            return Err(Error::WeightOutOfRange(format_rational(&weight)));
        }
        Ok(Term::Choice(Box::new(left), weight, Box::new(right)))
    }

    pub fn rec(x: &Name, body: Term) -> Term {
        Term::Rec(x.clone(), Box::new(body))
    }

    /// `rec W. W`, the terminating process.
    pub fn nil() -> Term {
        let w = Name::unchecked("W".into());
        Term::Rec(w.clone(), Box::new(Term::Name(w)))
    }

    pub fn parse(text: &str) -> Result<Term> {
        parse_term(text)
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_names().is_empty()
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            Term::Name(y) => y == x,
            Term::Prefix(_, b) => b.has_free(x),
            Term::Choice(l, _, r) => l.has_free(x) || r.has_free(x),
            Term::Rec(y, b) => y != x && b.has_free(x),
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Name(_) => 1,
            Term::Prefix(_, b) | Term::Rec(_, b) => 1 + b.size(),
            Term::Choice(l, _, r) => 1 + l.size() + r.size(),
        }
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Name(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Prefix(_, b) => collect_free(b, bound, out),
        Term::Choice(l, _, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Term::Rec(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
    }
}

/// Set of free names of `t`.
pub fn free_names(t: &Term) -> BTreeSet<Name> {
    t.free_names()
}

/// Renames every binder to `B0, B1, …` in pre-order, leaving free names alone.
pub fn alpha_normalize(t: &Term) -> Term {
    fn go(t: &Term, env: &mut Vec<(Name, Name)>, next: &mut usize) -> Term {
        match t {
            Term::Name(x) => match env.iter().rev().find(|(orig, _)| orig == x) {
                Some((_, canon)) => Term::Name(canon.clone()),
                None => Term::Name(x.clone()),
            },
            Term::Prefix(a, b) => Term::Prefix(a.clone(), Box::new(go(b, env, next))),
            Term::Choice(l, e, r) => {
                let l = go(l, env, next);
                let r = go(r, env, next);
                Term::Choice(Box::new(l), e.clone(), Box::new(r))
            }
            Term::Rec(x, b) => {
                let canon = Name::canonical(*next);
                *next += 1;
                env.push((x.clone(), canon.clone()));
                let b = go(b, env, next);
                env.pop();
                Term::Rec(canon, Box::new(b))
            }
        }
    }
    go(t, &mut Vec::new(), &mut 0)
}

pub fn alpha_eq(t: &Term, s: &Term) -> bool {
    t == s || alpha_normalize(t) == alpha_normalize(s)
}

/// Simultaneous capture-avoiding substitution `t[bindings]`.
pub fn substitute(t: &Term, bindings: &BTreeMap<Name, Term>) -> Term {
    if bindings.is_empty() {
        return t.clone();
    }
    let subst: Vec<(Name, Term, BTreeSet<Name>)> = bindings
        .iter()
        .map(|(x, s)| (x.clone(), s.clone(), s.free_names()))
        .collect();
    apply(t, &subst)
}

/// `t[s / x]`.
pub fn substitute_one(t: &Term, x: &Name, s: &Term) -> Term {
    apply(t, &[(x.clone(), s.clone(), s.free_names())])
}

fn apply(t: &Term, subst: &[(Name, Term, BTreeSet<Name>)]) -> Term {
    match t {
        Term::Name(x) => match subst.iter().find(|(y, _, _)| y == x) {
            Some((_, s, _)) => s.clone(),
            None => t.clone(),
        },
        Term::Prefix(a, b) => Term::Prefix(a.clone(), Box::new(apply(b, subst))),
        Term::Choice(l, e, r) => Term::Choice(Box::new(apply(l, subst)), e.clone(), Box::new(apply(r, subst))),
        Term::Rec(x, body) => {
            let inner: Vec<_> = subst
                .iter()
                .filter(|(y, _, _)| y != x && body.has_free(y))
                .cloned()
                .collect();
            if inner.is_empty() {
                return t.clone();
            }
            if inner.iter().any(|(_, _, fv)| fv.contains(x)) {
                let mut avoid = body.free_names();
                for (y, _, fv) in &inner {
                    avoid.insert(y.clone());
                    avoid.extend(fv.iter().cloned());
                }
                let fresh = fresh_name(x, &avoid);
                let mut renamed = inner;
                renamed.push((x.clone(), Term::Name(fresh.clone()), BTreeSet::from([fresh.clone()])));
                Term::Rec(fresh, Box::new(apply(body, &renamed)))
            } else {
                Term::Rec(x.clone(), Box::new(apply(body, &inner)))
            }
        }
    }
}

/// A name derived from `base` that is not in `avoid` and not reserved.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let stem = match base.as_str().rsplit_once('_') {
        Some((s, suffix)) if !s.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) => s,
        _ => base.as_str(),
    };
    (1..)
        .map(|i| Name::unchecked(format!("{stem}_{i}")))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many candidates")
}

/// Every free occurrence of `x` sits under a prefix, on the right of `+[1]`,
/// or on the left of `+[0]`.
pub fn is_guarded(x: &Name, t: &Term) -> bool {
    match t {
        Term::Name(y) => y != x,
        Term::Prefix(_, _) => true,
        Term::Choice(l, e, r) => (e.is_zero() || is_guarded(x, l)) && (e.is_one() || is_guarded(x, r)),
        Term::Rec(y, b) => y == x || is_guarded(x, b),
    }
}

/// The right-nested convex combination `Σ eᵢ·tᵢ`: `t₁` when `e₁ = 1`,
/// otherwise `t₁ +[e₁] Σ_{i≥2} (eᵢ/(1-e₁))·tᵢ`.
pub fn formal_sum(entries: &[(Rational, Term)]) -> Result<Term> {
    if entries.is_empty() {
        return Err(Error::FormalSum("empty list of summands".into()));
    }
    if let Some((w, _)) = entries.iter().find(|(w, _)| *w <= Rational::zero()) {
        return Err(Error::FormalSum(format!(
            "weight {} is not positive",
            format_rational(w)
        )));
    }
    let total = entries.iter().fold(Rational::zero(), |acc, (w, _)| acc + w);
    if !total.is_one() {
        return Err(Error::FormalSum(format!(
            "weights sum to {}, not 1",
            format_rational(&total)
        )));
    }
    Ok(build_sum(entries))
}

fn build_sum(entries: &[(Rational, Term)]) -> Term {
    let (e1, t1) = &entries[0];
    if e1.is_one() || entries.len() == 1 {
        return t1.clone();
    }
    let rest_scale = Rational::one() - e1;
    let rest: Vec<(Rational, Term)> = entries[1..].iter().map(|(w, t)| (w / &rest_scale, t.clone())).collect();
    Term::Choice(Box::new(t1.clone()), e1.clone(), Box::new(build_sum(&rest)))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f)
    }
}

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Rec(x, b) => {
            write!(f, "rec {x}. ")?;
            write_term(b, f)
        }
        _ => write_choice(t, f),
    }
}

fn write_choice(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Choice(l, e, r) => {
            write_prefix(l, f)?;
            write!(f, " +[{}] ", format_rational(e))?;
            write_choice(r, f)
        }
        Term::Rec(..) => {
            f.write_str("(")?;
            write_term(t, f)?;
            f.write_str(")")
        }
        _ => write_prefix(t, f),
    }
}

fn write_prefix(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Name(x) => write!(f, "{x}"),
        Term::Prefix(a, b) => {
            write!(f, "{a}.")?;
            write_prefix(b, f)
        }
        _ => {
            f.write_str("(")?;
            write_term(t, f)?;
            f.write_str(")")
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Rec,
    Label(String),
    Name(String),
    Dot,
    LParen,
    RParen,
    Plus(Rational),
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (at, tok) = lx.next()?;
            let done = tok == Tok::Eof;
            out.push((at, tok));
            if done {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> std::result::Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::Eof));
        };
        let tok = match c {
            b'.' => {
                self.pos += 1;
                Tok::Dot
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'+' => {
                if bytes.get(self.pos + 1) != Some(&b'[') {
                    return Err(ParseError::new(start, "expected `+[` weight `]`"));
                }
                let body_start = self.pos + 2;
                let Some(len) = self.src[body_start..].find(']') else {
                    return Err(ParseError::new(start, "unterminated weight, missing `]`"));
                };
                let text = &self.src[body_start..body_start + len];
                let w = parse_rational(text)
                    .map_err(|e| ParseError::new(body_start + e.position, format!("bad weight: {}", e.message)))?;
                self.pos = body_start + len + 1;
                Tok::Plus(w)
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                let word = self.src[self.pos..end].to_string();
                self.pos = end;
                if word == "rec" {
                    Tok::Rec
                } else if c.is_ascii_lowercase() {
                    Tok::Label(word)
                } else {
                    Tok::Name(word)
                }
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character {ch:?}")));
            }
        };
        Ok((start, tok))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> std::result::Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.pos(),
                format!("expected {what}, found {}", describe(self.peek())),
            ))
        }
    }

    fn term(&mut self) -> std::result::Result<Term, ParseError> {
        if *self.peek() == Tok::Rec {
            self.bump();
            let at = self.pos();
            let Tok::Name(x) = self.bump() else {
                return Err(ParseError::new(at, "expected a name after `rec`"));
            };
            self.expect(Tok::Dot, "`.`")?;
            self.bound.push(x.clone());
            let body = self.term()?;
            self.bound.pop();
            return Ok(Term::Rec(Name::unchecked(x), Box::new(body)));
        }
        self.choice()
    }

    fn choice(&mut self) -> std::result::Result<Term, ParseError> {
        let left = self.prefix()?;
        if let Tok::Plus(w) = self.peek().clone() {
            let at = self.pos();
            if !is_unit_interval(&w) {
                return Err(ParseError::new(
                    at,
                    format!("weight {} outside [0,1]", format_rational(&w)),
                ));
            }
            self.bump();
            let right = self.choice()?;
            return Ok(Term::Choice(Box::new(left), w, Box::new(right)));
        }
        Ok(left)
    }

    fn prefix(&mut self) -> std::result::Result<Term, ParseError> {
        if let Tok::Label(a) = self.peek().clone() {
            self.bump();
            self.expect(Tok::Dot, "`.` after label")?;
            let body = self.prefix()?;
            return Ok(Term::Prefix(Label(a), Box::new(body)));
        }
        self.atom()
    }

    fn atom(&mut self) -> std::result::Result<Term, ParseError> {
        let at = self.pos();
        match self.bump() {
            Tok::Name(x) => {
                if is_reserved(&x) && !self.bound.contains(&x) {
                    return Err(ParseError::new(at, format!("reserved name {x} may only occur bound")));
                }
                Ok(Term::Name(Name::unchecked(x)))
            }
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Rec => Err(ParseError::new(
                at,
                "`rec` must be parenthesized when used as an operand",
            )),
            other => Err(ParseError::new(
                at,
                format!("expected a name or `(`, found {}", describe(&other)),
            )),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Rec => "`rec`".into(),
        Tok::Label(a) => format!("label `{a}`"),
        Tok::Name(x) => format!("name `{x}`"),
        Tok::Dot => "`.`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Plus(_) => "`+[..]`".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_term(text: &str) -> Result<Term> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        bound: Vec::new(),
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(ParseError::new(p.pos(), format!("unexpected {} after term", describe(p.peek()))).into());
    }
    Ok(t)
}
