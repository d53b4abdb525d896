//! Expert knowledge, its validation and combination, and the standard
//! interaction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attrs::AttrSet;
use crate::context::{FormalContext, IncompleteContext};
use crate::cxt::{self, ContextJson};
use crate::error::{Error, Result};
use crate::implication::{contradicts, Implication, ImplicationJson, Theory};
use crate::oracle::{imp_enumerate, DEFAULT_IMP_BOUND};

/// Example rows plus implications the expert knows to hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpertKnowledge {
    pub name: String,
    pub examples: IncompleteContext,
    pub known: Theory,
}

impl ExpertKnowledge {
    pub fn new(name: impl Into<String>, examples: IncompleteContext, known: Theory) -> Result<Self> {
        if examples.attributes() != known.attributes() {
            return Err(Error::IncompatibleContexts);
        }
        examples.check_capacity()?;
        Ok(ExpertKnowledge {
            name: name.into(),
            examples,
            known,
        })
    }

    /// Knows nothing about anything.
    pub fn empty(name: impl Into<String>, attributes: Vec<String>) -> Result<Self> {
        Self::new(
            name,
            IncompleteContext::empty(attributes.clone())?,
            Theory::new(attributes),
        )
    }

    /// Knows every row of `universe` and every implication valid in it.
    /// Needs at most [`DEFAULT_IMP_BOUND`] attributes.
    pub fn omniscient(name: impl Into<String>, universe: &IncompleteContext) -> Result<Self> {
        let known = imp_enumerate(universe, DEFAULT_IMP_BOUND)?;
        Self::new(name, universe.clone(), known)
    }

    pub fn attributes(&self) -> &[String] {
        self.examples.attributes()
    }

    /// Same knowledge with columns permuted into `order`.
    pub fn reorder_attributes<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let examples = self.examples.reorder_attributes(order)?;
        let mut known = Theory::new(examples.attributes().to_vec());
        for imp in &self.known {
            let j = imp.to_json(self.attributes());
            known.push(j.resolve(examples.attributes())?)?;
        }
        Self::new(self.name.clone(), examples, known)
    }

    /// Parses an expert document. `base` resolves `{"file": …}` context
    /// references.
    pub fn from_json_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let doc: ExpertFile = serde_json::from_str(text)
            .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
        let examples = match &doc.context {
            ContextSource::Inline(s) => cxt::parse(s)?,
            ContextSource::File { file } => {
                let path = match base {
                    Some(b) => b.join(file),
                    None => file.into(),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                cxt::parse(&text)?
            }
            ContextSource::Json(j) => j.to_context()?,
        };
        let known = Theory::from_json(examples.attributes().to_vec(), &doc.implications)?;
        Self::new(doc.name, examples, known)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, path.parent())
    }

    /// Expert document with the context inlined as CXT text.
    pub fn to_json_string(&self) -> String {
        let doc = ExpertFile {
            name: self.name.clone(),
            context: ContextSource::Inline(cxt::write(&self.examples)),
            implications: self.known.to_json(),
        };
        serde_json::to_string_pretty(&doc).expect("expert document serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ContextSource {
    Inline(String),
    File { file: String },
    Json(ContextJson),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ExpertFile {
    name: String,
    context: ContextSource,
    #[serde(default)]
    implications: Vec<ImplicationJson>,
}

/// What an expert or strategy says about a question `A ⇒ B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Accept,
    /// Rows that refute the question.
    Reject(IncompleteContext),
    /// The attributes of `B` whose consequence from `A` is not known.
    Unknown(AttrSet),
}

impl Answer {
    pub fn kind(&self) -> AnswerKind {
        match self {
            Answer::Accept => AnswerKind::Accept,
            Answer::Reject(_) => AnswerKind::Reject,
            Answer::Unknown(_) => AnswerKind::Unknown,
        }
    }

    pub fn to_json(&self, attributes: &[String]) -> AnswerJson {
        match self {
            Answer::Accept => AnswerJson {
                kind: AnswerKind::Accept,
                counterexamples: None,
                residual: None,
            },
            Answer::Reject(ctx) => AnswerJson {
                kind: AnswerKind::Reject,
                counterexamples: Some(ContextJson::from(ctx)),
                residual: None,
            },
            Answer::Unknown(z) => AnswerJson {
                kind: AnswerKind::Unknown,
                counterexamples: None,
                residual: Some(z.iter().map(|m| attributes[m].clone()).collect()),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Accept,
    Reject,
    Unknown,
}

/// Wire form of [`Answer`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerJson {
    pub kind: AnswerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexamples: Option<ContextJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<String>>,
}

impl AnswerJson {
    /// Resolves names against `attributes`. A counterexample document
    /// without an attribute list is read in that order.
    pub fn to_answer(&self, attributes: &[String]) -> Result<Answer> {
        match self.kind {
            AnswerKind::Accept => Ok(Answer::Accept),
            AnswerKind::Reject => {
                let mut doc = self
                    .counterexamples
                    .clone()
                    .ok_or_else(|| Error::Protocol("reject without counterexamples".into()))?;
                if doc.attributes.is_empty() {
                    doc.attributes = attributes.to_vec();
                }
                let ctx = doc.to_context()?;
                if ctx.attributes() != attributes {
                    return Err(Error::IncompatibleContexts);
                }
                Ok(Answer::Reject(ctx))
            }
            AnswerKind::Unknown => {
                let names = self
                    .residual
                    .as_ref()
                    .ok_or_else(|| Error::Protocol("unknown without residual".into()))?;
                Ok(Answer::Unknown(crate::context::resolve_attribute_names(
                    attributes, names,
                )?))
            }
        }
    }
}

/// Checks what can be checked about an answer to `question` without
/// knowing the domain: counterexample rows refute it and the residual lies
/// inside the conclusion.
pub fn check_answer(question: &Implication, answer: &Answer, attributes: &[String]) -> Result<()> {
    match answer {
        Answer::Accept => Ok(()),
        Answer::Reject(ctx) => {
            if ctx.attributes() != attributes {
                return Err(Error::IncompatibleContexts);
            }
            if ctx.object_count() == 0 {
                return Err(Error::Protocol("reject with no counterexample rows".into()));
            }
            for g in 0..ctx.object_count() {
                if !question.premise.is_subset(ctx.row_certain(g)) {
                    return Err(Error::InvalidCounterexample {
                        object: ctx.objects()[g].clone(),
                        reason: "premise attributes are not all crosses".into(),
                    });
                }
                if !contradicts(ctx, g, question) {
                    return Err(Error::InvalidCounterexample {
                        object: ctx.objects()[g].clone(),
                        reason: "no conclusion attribute is blank".into(),
                    });
                }
            }
            Ok(())
        }
        Answer::Unknown(z) => {
            if !z.is_subset(question.residual()) {
                return Err(Error::Protocol(
                    "unknown residual is not contained in the conclusion".into(),
                ));
            }
            Ok(())
        }
    }
}

/// How an expert is asked a question.
pub trait Interaction: Send + Sync {
    fn ask(&self, question: &Implication, expert: &ExpertKnowledge) -> Answer;
}

/// Answers as fully as the expert's knowledge allows.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardInteraction;

impl Interaction for StandardInteraction {
    fn ask(&self, question: &Implication, expert: &ExpertKnowledge) -> Answer {
        ei_standard(question, expert)
    }
}

pub fn ei_standard(question: &Implication, e: &ExpertKnowledge) -> Answer {
    if e.known.entails(question) {
        return Answer::Accept;
    }
    let rows = question.refuting_rows(&e.examples);
    if !rows.is_empty() {
        return Answer::Reject(e.examples.restrict_indices(&rows));
    }
    Answer::Unknown(question.conclusion - e.known.closure(question.premise))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A known implication fails to be satisfiable in the expert's own rows.
    Unsatisfiable { object: String, implication: String },
    /// An example row is absent from the universe.
    UnknownObject { object: String },
    /// An example cell disagrees with the universe.
    WrongCell { object: String, attribute: String },
    /// A known implication does not hold in the universe.
    InvalidImplication { implication: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub expert: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every broken expert invariant; the universe checks run only when
/// a universe is given.
pub fn validate_expert(e: &ExpertKnowledge, universe: Option<&FormalContext>) -> Result<ValidationReport> {
    let attrs = e.attributes();
    let mut report = ValidationReport {
        expert: e.name.clone(),
        violations: Vec::new(),
    };
    // Every consequence of L is satisfiable in K_E exactly when each row's
    // certain intent closes inside its possible intent.
    for g in 0..e.examples.object_count() {
        let closed = e.known.closure(e.examples.row_certain(g));
        if !closed.is_subset(e.examples.row_possible(g)) {
            let premise = e.examples.row_certain(g);
            report.violations.push(Violation::Unsatisfiable {
                object: e.examples.objects()[g].clone(),
                implication: Implication::new(premise, closed - e.examples.row_possible(g))
                    .to_text(attrs),
            });
        }
    }
    if let Some(u) = universe {
        if u.attributes() != attrs {
            return Err(Error::IncompatibleContexts);
        }
        for (g, name) in e.examples.objects().iter().enumerate() {
            let Some(h) = u.object_index(name) else {
                report.violations.push(Violation::UnknownObject {
                    object: name.clone(),
                });
                continue;
            };
            for (m, attr) in attrs.iter().enumerate() {
                if !e.examples.cell(g, m).info_leq(u.cell(h, m)) {
                    report.violations.push(Violation::WrongCell {
                        object: name.clone(),
                        attribute: attr.clone(),
                    });
                }
            }
        }
        for imp in &e.known {
            if !imp.certainly_valid_in(u) {
                report.violations.push(Violation::InvalidImplication {
                    implication: imp.to_text(attrs),
                });
            }
        }
    }
    Ok(report)
}

fn same_universe(a: &ExpertKnowledge, b: &ExpertKnowledge) -> Result<()> {
    if a.attributes() != b.attributes() {
        return Err(Error::IncompatibleContexts);
    }
    Ok(())
}

/// `a` knows at most what `b` knows.
pub fn knowledge_leq(a: &ExpertKnowledge, b: &ExpertKnowledge) -> Result<bool> {
    same_universe(a, b)?;
    Ok(a.examples.info_leq(&b.examples)? && b.known.entails_all(&a.known))
}

pub fn expert_join(a: &ExpertKnowledge, b: &ExpertKnowledge) -> Result<ExpertKnowledge> {
    same_universe(a, b)?;
    ExpertKnowledge::new(
        format!("{} ∨ {}", a.name, b.name),
        a.examples.join(&b.examples)?,
        a.known.union(&b.known)?,
    )
}

/// Shared knowledge. The theory keeps the members of `L_a ∪ L_b` that both
/// sides entail.
pub fn expert_meet(a: &ExpertKnowledge, b: &ExpertKnowledge) -> Result<ExpertKnowledge> {
    same_universe(a, b)?;
    let shared = a
        .known
        .iter()
        .chain(b.known.iter())
        .filter(|i| a.known.entails(i) && b.known.entails(i))
        .copied();
    ExpertKnowledge::new(
        format!("{} ∧ {}", a.name, b.name),
        a.examples.meet(&b.examples)?,
        Theory::from_implications(a.attributes().to_vec(), shared)?,
    )
}

/// Combined knowledge of the whole group, joined in list order.
pub fn group_join(group: &[ExpertKnowledge]) -> Result<ExpertKnowledge> {
    let (first, rest) = group
        .split_first()
        .ok_or_else(|| Error::Strategy("expert group is empty".into()))?;
    let mut acc = first.clone();
    for e in rest {
        acc = expert_join(&acc, e)?;
    }
    if group.len() > 1 {
        acc.name = "E_max".into();
    }
    Ok(acc)
}
