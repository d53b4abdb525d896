//! Attribute implications, Horn closure, and validity in incomplete contexts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::attrs::AttrSet;
use crate::context::{resolve_attribute_names, IncompleteContext};
use crate::error::{Error, Result};

/// `premise ⇒ conclusion` over an attribute list owned elsewhere.
///
/// The conclusion is kept as given; [`Implication::canonical`] strips the
/// premise from it and is what equality inside a [`Theory`] uses.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implication {
    pub premise: AttrSet,
    pub conclusion: AttrSet,
}

impl Implication {
    pub fn new(premise: AttrSet, conclusion: AttrSet) -> Self {
        Implication { premise, conclusion }
    }

    /// `conclusion \ premise`.
    pub fn residual(&self) -> AttrSet {
        self.conclusion - self.premise
    }

    pub fn canonical(&self) -> Implication {
        Implication::new(self.premise, self.residual())
    }

    /// True when the conclusion adds nothing to the premise.
    pub fn is_trivial(&self) -> bool {
        self.residual().is_empty()
    }

    pub fn fits(&self, n: usize) -> bool {
        self.premise.fits(n) && self.conclusion.fits(n)
    }

    /// `candidate` is a model of this implication.
    pub fn respected_by(&self, candidate: AttrSet) -> bool {
        !self.premise.is_subset(candidate) || self.conclusion.is_subset(candidate)
    }

    /// Every row whose premise cells are all non-blank has crosses on the
    /// whole residual conclusion.
    pub fn certainly_valid_in(&self, ctx: &IncompleteContext) -> bool {
        let rest = self.residual();
        (0..ctx.object_count()).all(|g| {
            !self.premise.is_subset(ctx.row_possible(g)) || rest.is_subset(ctx.row_certain(g))
        })
    }

    /// Every row whose premise cells are all crosses has no blank in the
    /// conclusion.
    pub fn satisfiable_in(&self, ctx: &IncompleteContext) -> bool {
        (0..ctx.object_count()).all(|g| {
            !self.premise.is_subset(ctx.row_certain(g))
                || self.conclusion.is_subset(ctx.row_possible(g))
        })
    }

    /// Objects of `ctx` that refute this implication: premise certain and
    /// some conclusion attribute blank.
    pub fn refuting_rows(&self, ctx: &IncompleteContext) -> Vec<usize> {
        (0..ctx.object_count())
            .filter(|&g| contradicts(ctx, g, self))
            .collect()
    }

    pub fn to_text(&self, attributes: &[String]) -> String {
        let side = |s: AttrSet| {
            s.iter()
                .map(|m| quote_name(&attributes[m]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let (p, c) = (side(self.premise), side(self.conclusion));
        match (p.is_empty(), c.is_empty()) {
            (true, true) => "->".to_owned(),
            (true, false) => format!("-> {c}"),
            (false, true) => format!("{p} ->"),
            (false, false) => format!("{p} -> {c}"),
        }
    }

    pub fn to_json(&self, attributes: &[String]) -> ImplicationJson {
        ImplicationJson {
            premise: self.premise.iter().map(|m| attributes[m].clone()).collect(),
            conclusion: self.conclusion.iter().map(|m| attributes[m].clone()).collect(),
        }
    }
}

impl fmt::Debug for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} => {:?}", self.premise, self.conclusion)
    }
}

/// Row `g` certainly has the premise and certainly lacks some conclusion
/// attribute.
pub fn contradicts(ctx: &IncompleteContext, g: usize, imp: &Implication) -> bool {
    imp.premise.is_subset(ctx.row_certain(g)) && !imp.conclusion.is_subset(ctx.row_possible(g))
}

fn check_fits(ctx: &IncompleteContext, imp: &Implication) -> Result<()> {
    ctx.check_capacity()?;
    if !imp.fits(ctx.attribute_count()) {
        return Err(Error::IncompatibleUniverse);
    }
    Ok(())
}

pub fn certainly_valid(ctx: &IncompleteContext, imp: &Implication) -> Result<bool> {
    check_fits(ctx, imp)?;
    Ok(imp.certainly_valid_in(ctx))
}

pub fn satisfiable(ctx: &IncompleteContext, imp: &Implication) -> Result<bool> {
    check_fits(ctx, imp)?;
    Ok(imp.satisfiable_in(ctx))
}

/// `A^□◊`, the largest conclusion `B` with `A ⇒ B` satisfiable.
pub fn max_satisfiable_conclusion(ctx: &IncompleteContext, premise: AttrSet) -> Result<AttrSet> {
    check_fits(ctx, &Implication::new(premise, AttrSet::EMPTY))?;
    Ok(ctx.box_diamond(premise))
}

/// An ordered, duplicate-free list of implications over one attribute list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    attributes: Vec<String>,
    implications: Vec<Implication>,
}

impl Theory {
    pub fn new(attributes: Vec<String>) -> Self {
        Theory {
            attributes,
            implications: Vec::new(),
        }
    }

    pub fn from_implications(
        attributes: Vec<String>,
        imps: impl IntoIterator<Item = Implication>,
    ) -> Result<Self> {
        let mut t = Theory::new(attributes);
        for imp in imps {
            t.push(imp)?;
        }
        Ok(t)
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn implications(&self) -> &[Implication] {
        &self.implications
    }

    pub fn len(&self) -> usize {
        self.implications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.implications.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Implication> {
        self.implications.iter()
    }

    pub fn check(&self, imp: &Implication) -> Result<()> {
        if !imp.fits(self.attributes.len()) {
            return Err(Error::IncompatibleUniverse);
        }
        Ok(())
    }

    /// Appends unless an implication with the same canonical form is
    /// already present. Returns whether it was added.
    pub fn push(&mut self, imp: Implication) -> Result<bool> {
        self.check(&imp)?;
        let c = imp.canonical();
        if self.implications.iter().any(|i| i.canonical() == c) {
            return Ok(false);
        }
        self.implications.push(imp);
        Ok(true)
    }

    pub fn contains(&self, imp: &Implication) -> bool {
        let c = imp.canonical();
        self.implications.iter().any(|i| i.canonical() == c)
    }

    /// `⟨seed⟩`: the smallest superset of `seed` respecting every
    /// implication, by forward chaining to a fixed point.
    pub fn closure(&self, seed: AttrSet) -> AttrSet {
        let mut closed = seed;
        loop {
            let before = closed;
            for imp in &self.implications {
                if imp.premise.is_subset(closed) {
                    closed = closed | imp.conclusion;
                }
            }
            if closed == before {
                return closed;
            }
        }
    }

    /// Closure with one extra implication taken into account.
    pub fn closure_with(&self, seed: AttrSet, extra: &Implication) -> AttrSet {
        let mut closed = seed;
        loop {
            let before = closed;
            closed = self.closure(closed);
            if extra.premise.is_subset(closed) {
                closed = closed | extra.conclusion;
            }
            if closed == before {
                return closed;
            }
        }
    }

    pub fn is_closed(&self, set: AttrSet) -> bool {
        self.implications.iter().all(|i| i.respected_by(set))
    }

    /// Derivability by the Armstrong rules.
    pub fn entails(&self, imp: &Implication) -> bool {
        imp.conclusion.is_subset(self.closure(imp.premise))
    }

    /// Every implication of `other` follows from `self`.
    pub fn entails_all(&self, other: &Theory) -> bool {
        other.implications.iter().all(|i| self.entails(i))
    }

    pub fn cons_equivalent(&self, other: &Theory) -> bool {
        self.entails_all(other) && other.entails_all(self)
    }

    pub fn union(&self, other: &Theory) -> Result<Theory> {
        if self.attributes != other.attributes {
            return Err(Error::IncompatibleUniverse);
        }
        let mut t = self.clone();
        for imp in &other.implications {
            t.push(*imp)?;
        }
        Ok(t)
    }

    pub fn implication_from_names<S: AsRef<str>>(&self, premise: &[S], conclusion: &[S]) -> Result<Implication> {
        Ok(Implication::new(
            resolve_attribute_names(&self.attributes, premise)?,
            resolve_attribute_names(&self.attributes, conclusion)?,
        ))
    }

    pub fn names(&self, set: AttrSet) -> Vec<String> {
        set.iter().map(|m| self.attributes[m].clone()).collect()
    }

    /// One implication per line in the text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for imp in &self.implications {
            out.push_str(&imp.to_text(&self.attributes));
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Blank lines and lines starting with `#` are
    /// skipped.
    pub fn parse_text(attributes: Vec<String>, text: &str) -> Result<Theory> {
        let mut t = Theory::new(attributes);
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (p, c) = parse_line(line, i + 1)?;
            let imp = t
                .implication_from_names(&p, &c)
                .map_err(|e| Error::parse(i + 1, 1, e.to_string()))?;
            t.push(imp)?;
        }
        Ok(t)
    }

    pub fn to_json(&self) -> Vec<ImplicationJson> {
        self.implications
            .iter()
            .map(|i| i.to_json(&self.attributes))
            .collect()
    }

    pub fn from_json(attributes: Vec<String>, imps: &[ImplicationJson]) -> Result<Theory> {
        let mut t = Theory::new(attributes);
        for j in imps {
            let imp = j.resolve(&t.attributes)?;
            t.push(imp)?;
        }
        Ok(t)
    }
}

impl<'a> IntoIterator for &'a Theory {
    type Item = &'a Implication;
    type IntoIter = std::slice::Iter<'a, Implication>;
    fn into_iter(self) -> Self::IntoIter {
        self.implications.iter()
    }
}

pub fn respects(theory: &Theory, candidate: AttrSet, imp: &Implication) -> Result<bool> {
    theory.check(imp)?;
    if !candidate.fits(theory.attributes.len()) {
        return Err(Error::IncompatibleUniverse);
    }
    Ok(imp.respected_by(candidate))
}

pub fn closure(theory: &Theory, seed: AttrSet) -> Result<AttrSet> {
    if !seed.fits(theory.attributes.len()) {
        return Err(Error::IncompatibleUniverse);
    }
    Ok(theory.closure(seed))
}

pub fn cons_member(theory: &Theory, imp: &Implication) -> Result<bool> {
    theory.check(imp)?;
    Ok(theory.entails(imp))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImplicationJson {
    pub premise: Vec<String>,
    pub conclusion: Vec<String>,
}

impl ImplicationJson {
    pub fn resolve(&self, attributes: &[String]) -> Result<Implication> {
        Ok(Implication::new(
            resolve_attribute_names(attributes, &self.premise)?,
            resolve_attribute_names(attributes, &self.conclusion)?,
        ))
    }
}

fn needs_quotes(name: &str) -> bool {
    name.is_empty()
        || name == "->"
        || name.starts_with('#')
        || name.chars().any(|c| c.is_whitespace() || c == '"' || c == '\\')
}

fn quote_name(name: &str) -> String {
    if !needs_quotes(name) {
        return name.to_owned();
    }
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

enum Token {
    Name(String),
    Arrow,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '"' {
            chars.next();
            let mut name = String::new();
            let mut closed = false;
            while let Some((_, c)) = chars.next() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, e)) => name.push(e),
                        None => break,
                    },
                    _ => name.push(c),
                }
            }
            if !closed {
                return Err(Error::parse(lineno, col(line, pos), "unterminated quoted name"));
            }
            tokens.push(Token::Name(name));
            continue;
        }
        let mut word = String::new();
        while let Some(&(_, c)) = chars.peek() {
            if c.is_whitespace() || c == '"' {
                break;
            }
            word.push(c);
            chars.next();
        }
        if word == "->" {
            tokens.push(Token::Arrow);
        } else {
            tokens.push(Token::Name(word));
        }
    }
    Ok(tokens)
}

fn col(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

pub fn parse_line(line: &str, lineno: usize) -> Result<(Vec<String>, Vec<String>)> {
    let tokens = tokenize(line, lineno)?;
    let arrows = tokens.iter().filter(|t| matches!(t, Token::Arrow)).count();
    if arrows != 1 {
        let at = line.find("->").map_or(1, |b| col(line, b));
        return Err(Error::parse(
            lineno,
            at,
            format!("expected exactly one `->`, found {arrows}"),
        ));
    }
    let mut premise = Vec::new();
    let mut conclusion = Vec::new();
    let mut seen_arrow = false;
    for t in tokens {
        match t {
            Token::Arrow => seen_arrow = true,
            Token::Name(n) if seen_arrow => conclusion.push(n),
            Token::Name(n) => premise.push(n),
        }
    }
    Ok((premise, conclusion))
}
