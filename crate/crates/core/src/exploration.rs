//! Attribute exploration with incomplete knowledge.
//!
//! The engine walks the `⟨·⟩_P`-closed attribute sets in lectic order. For
//! the current set `A` it asks `A ⇒ A^□◊ \ A` unless that conclusion is empty
//! or already follows from the accepted implications `P`. A rejection adds
//! counterexample rows and the same `A` is examined again; an acceptance
//! extends `P` and moves on; an `unknown` answer extends `P` by what is known
//! and records a fictitious object for every attribute left open.

use serde::{Deserialize, Serialize};

use crate::attrs::{AttrSet, MAX_ATTRIBUTES};
use crate::cell::Cell;
use crate::context::IncompleteContext;
use crate::cxt::ContextJson;
use crate::error::{Error, Result};
use crate::expert::{check_answer, Answer, AnswerJson, ExpertKnowledge, Interaction};
use crate::implication::{Implication, ImplicationJson, Theory};
use crate::par::Exec;
use crate::strategy::{Collaboration, Exchange, InteractionLedger, Question};

/// Prefix reserved for fictitious object names.
pub const FICTITIOUS_PREFIX: &str = "?:";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Answered by the collaboration strategy.
    Strategy,
    /// Followed from the accepted implications without asking anyone.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub id: u64,
    /// `A ⇒ B \ A` as posed.
    pub question: Implication,
    pub answer: Answer,
    pub source: Source,
}

/// A row standing for "`premise ⇒ attribute` is not known".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FictitiousEntry {
    pub object: String,
    pub premise: AttrSet,
    pub attribute: usize,
}

/// Name of the fictitious object for `premise ↛ attribute`.
pub fn fictitious_name(attributes: &[String], premise: AttrSet, attribute: usize) -> String {
    let names: Vec<&str> = premise.iter().map(|m| attributes[m].as_str()).collect();
    format!(
        "{FICTITIOUS_PREFIX}{{{}}}!{}",
        names.join(", "),
        attributes[attribute]
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationState {
    attributes: Vec<String>,
    accepted: Theory,
    examples: IncompleteContext,
    fictitious: Vec<FictitiousEntry>,
    /// Attribute indices, most significant first.
    order: Vec<usize>,
    cursor: Option<AttrSet>,
    pending: Option<Question>,
    history: Vec<HistoryEntry>,
    next_id: u64,
    started: bool,
    finished: bool,
}

impl ExplorationState {
    pub fn new(
        attributes: Vec<String>,
        seed_examples: Option<IncompleteContext>,
        seed_theory: Option<Theory>,
    ) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::State("exploration needs at least one attribute".into()));
        }
        if attributes.len() > MAX_ATTRIBUTES {
            return Err(Error::Capacity {
                what: "attribute count",
                actual: attributes.len(),
                limit: MAX_ATTRIBUTES,
            });
        }
        let examples = match seed_examples {
            Some(k) => {
                if k.attributes() != attributes.as_slice() {
                    return Err(Error::IncompatibleContexts);
                }
                k
            }
            None => IncompleteContext::empty(attributes.clone())?,
        };
        let accepted = match seed_theory {
            Some(t) => {
                if t.attributes() != attributes.as_slice() {
                    return Err(Error::IncompatibleUniverse);
                }
                t
            }
            None => Theory::new(attributes.clone()),
        };
        let cursor = Some(accepted.closure(AttrSet::EMPTY));
        Ok(ExplorationState {
            order: (0..attributes.len()).collect(),
            attributes,
            accepted,
            examples,
            fictitious: Vec::new(),
            cursor,
            pending: None,
            history: Vec::new(),
            next_id: 1,
            started: false,
            finished: false,
        })
    }

    /// Sets the lectic order, most significant attribute first. Only allowed
    /// before the first question.
    pub fn set_lectic_order<S: AsRef<str>>(&mut self, order: &[S]) -> Result<()> {
        if self.started {
            return Err(Error::State("lectic order is fixed once exploration started".into()));
        }
        let mut idx = Vec::with_capacity(order.len());
        for name in order {
            let m = self
                .attributes
                .iter()
                .position(|a| a == name.as_ref())
                .ok_or_else(|| Error::UnknownAttribute(name.as_ref().to_owned()))?;
            if idx.contains(&m) {
                return Err(Error::Duplicate {
                    kind: "attribute",
                    name: name.as_ref().to_owned(),
                });
            }
            idx.push(m);
        }
        if idx.len() != self.attributes.len() {
            return Err(Error::State("lectic order must list every attribute".into()));
        }
        self.order = idx;
        Ok(())
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn accepted(&self) -> &Theory {
        &self.accepted
    }

    /// Current example context, fictitious rows included.
    pub fn examples(&self) -> &IncompleteContext {
        &self.examples
    }

    pub fn fictitious(&self) -> &[FictitiousEntry] {
        &self.fictitious
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn pending(&self) -> Option<&Question> {
        self.pending.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn lectic_order(&self) -> Vec<String> {
        self.order.iter().map(|&m| self.attributes[m].clone()).collect()
    }

    fn next_closure(&self, current: AttrSet) -> Option<AttrSet> {
        let mut a = current;
        for i in (0..self.order.len()).rev() {
            let m = self.order[i];
            if a.contains(m) {
                a.remove(m);
                continue;
            }
            let c = self.accepted.closure(a.with(m));
            let prefix: AttrSet = self.order[..i].iter().copied().collect();
            if ((c - a) & prefix).is_empty() {
                return Some(c);
            }
        }
        None
    }

    fn advance(&mut self) {
        self.cursor = self.cursor.and_then(|a| self.next_closure(a));
    }

    /// The pending question, computing it if needed. `None` means the
    /// exploration has just ended; calling again afterwards is an error.
    pub fn next_question(&mut self) -> Result<Option<Question>> {
        if self.finished {
            return Err(Error::State("exploration is finished".into()));
        }
        self.started = true;
        if let Some(q) = self.pending {
            return Ok(Some(q));
        }
        while let Some(a) = self.cursor {
            let b = self.examples.box_diamond(a);
            if b == a {
                self.advance();
                continue;
            }
            let question = Implication::new(a, b - a);
            let id = self.next_id;
            self.next_id += 1;
            if self.accepted.entails(&question) {
                self.history.push(HistoryEntry {
                    id,
                    question,
                    answer: Answer::Accept,
                    source: Source::Derived,
                });
                self.advance();
                continue;
            }
            let q = Question {
                id,
                implication: question,
            };
            self.pending = Some(q);
            return Ok(Some(q));
        }
        self.finished = true;
        Ok(None)
    }

    /// Applies the answer to the pending question. On error the state is
    /// unchanged.
    pub fn apply_answer(&mut self, question_id: u64, answer: Answer) -> Result<()> {
        let q = match self.pending {
            Some(q) if q.id == question_id => q,
            Some(q) => {
                return Err(Error::Stale {
                    question_id,
                    reason: format!("pending question is {}", q.id),
                })
            }
            None => {
                return Err(Error::Stale {
                    question_id,
                    reason: "no question is pending".into(),
                })
            }
        };
        check_answer(&q.implication, &answer, &self.attributes)?;
        let imp = q.implication;
        match &answer {
            Answer::Accept => {
                self.accepted.push(imp)?;
                self.advance();
            }
            Answer::Reject(ctx) => {
                if let Some(name) = ctx.objects().iter().find(|o| o.starts_with(FICTITIOUS_PREFIX)) {
                    return Err(Error::InvalidCounterexample {
                        object: name.clone(),
                        reason: format!("names starting with `{FICTITIOUS_PREFIX}` are reserved"),
                    });
                }
                self.examples = self.examples.join(ctx)?;
            }
            Answer::Unknown(z) => {
                let known = Implication::new(imp.premise, imp.residual() - *z);
                let mut examples = self.examples.clone();
                let mut fictitious = Vec::new();
                for b in z.iter() {
                    let follows = self
                        .accepted
                        .closure_with(imp.premise, &known)
                        .contains(b);
                    if follows {
                        continue;
                    }
                    let name = fictitious_name(&self.attributes, imp.premise, b);
                    let row: Vec<Cell> = (0..self.attributes.len())
                        .map(|m| {
                            if imp.premise.contains(m) {
                                Cell::Cross
                            } else if m == b {
                                Cell::Blank
                            } else {
                                Cell::Unknown
                            }
                        })
                        .collect();
                    examples.push_row(name.clone(), row)?;
                    fictitious.push(FictitiousEntry {
                        object: name,
                        premise: imp.premise,
                        attribute: b,
                    });
                }
                self.examples = examples;
                self.fictitious.extend(fictitious);
                if !known.is_trivial() {
                    self.accepted.push(known)?;
                }
            }
        }
        self.history.push(HistoryEntry {
            id: q.id,
            question: imp,
            answer,
            source: Source::Strategy,
        });
        self.pending = None;
        Ok(())
    }

    pub fn is_fictitious(&self, object: &str) -> bool {
        self.fictitious.iter().any(|f| f.object == object)
    }

    pub fn result(&self) -> ExplorationResult {
        let (mut real, mut fict) = (Vec::new(), Vec::new());
        for (g, o) in self.examples.objects().iter().enumerate() {
            if self.is_fictitious(o) {
                fict.push(g);
            } else {
                real.push(g);
            }
        }
        let mut possibly_valid = self.accepted.clone();
        for f in &self.fictitious {
            possibly_valid
                .push(Implication::new(f.premise, AttrSet::singleton(f.attribute)))
                .expect("same attribute list");
        }
        ExplorationResult {
            accepted: self.accepted.clone(),
            examples: self.examples.clone(),
            real_counterexamples: self.examples.restrict_indices(&real),
            fictitious_counterexamples: self.examples.restrict_indices(&fict),
            fictitious: self.fictitious.clone(),
            possibly_valid,
            history: self.history.clone(),
        }
    }
}

/// What an exploration established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplorationResult {
    pub accepted: Theory,
    /// All rows in the order they were added.
    pub examples: IncompleteContext,
    pub real_counterexamples: IncompleteContext,
    pub fictitious_counterexamples: IncompleteContext,
    pub fictitious: Vec<FictitiousEntry>,
    /// Accepted implications plus one `A ⇒ b` per fictitious object.
    pub possibly_valid: Theory,
    pub history: Vec<HistoryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryJson {
    pub id: u64,
    pub premise: Vec<String>,
    pub conclusion: Vec<String>,
    pub answer: AnswerJson,
    pub source: Source,
}

impl HistoryEntry {
    pub fn to_json(&self, attributes: &[String]) -> HistoryJson {
        let j = self.question.to_json(attributes);
        HistoryJson {
            id: self.id,
            premise: j.premise,
            conclusion: j.conclusion,
            answer: self.answer.to_json(attributes),
            source: self.source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FictitiousJson {
    pub object: String,
    pub premise: Vec<String>,
    pub attribute: String,
}

impl FictitiousEntry {
    pub fn to_json(&self, attributes: &[String]) -> FictitiousJson {
        FictitiousJson {
            object: self.object.clone(),
            premise: self.premise.iter().map(|m| attributes[m].clone()).collect(),
            attribute: attributes[self.attribute].clone(),
        }
    }
}

/// JSON view of an [`ExplorationResult`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultJson {
    pub accepted: Vec<ImplicationJson>,
    pub real: ContextJson,
    pub fictitious: Vec<FictitiousJson>,
    pub fictitious_rows: ContextJson,
    pub possibly_valid: Vec<ImplicationJson>,
}

impl ExplorationResult {
    pub fn attributes(&self) -> &[String] {
        self.accepted.attributes()
    }

    pub fn to_json(&self) -> ResultJson {
        let attrs = self.attributes();
        ResultJson {
            accepted: self.accepted.to_json(),
            real: ContextJson::from(&self.real_counterexamples),
            fictitious: self.fictitious.iter().map(|f| f.to_json(attrs)).collect(),
            fictitious_rows: ContextJson::from(&self.fictitious_counterexamples),
            possibly_valid: self.possibly_valid.to_json(),
        }
    }

    pub fn history_json(&self) -> Vec<HistoryJson> {
        self.history.iter().map(|h| h.to_json(self.attributes())).collect()
    }
}

/// The expert exchanges behind one strategy-answered question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub question: Question,
    pub exchanges: Vec<Exchange>,
    pub answer: Answer,
}

#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub result: ExplorationResult,
    pub ledger: InteractionLedger,
    pub transcript: Vec<TranscriptEntry>,
}

/// Drives `state` to the end with simulated experts.
pub fn run(
    mut state: ExplorationState,
    collab: &mut Collaboration,
    experts: &[ExpertKnowledge],
    interaction: &dyn Interaction,
    exec: Exec,
) -> Result<SimulationRun> {
    let mut transcript = Vec::new();
    while let Some(q) = state.next_question()? {
        let (answer, exchanges) = collab.resolve_with(q, experts, interaction, exec)?;
        state.apply_answer(q.id, answer.clone())?;
        transcript.push(TranscriptEntry {
            question: q,
            exchanges,
            answer,
        });
    }
    Ok(SimulationRun {
        result: state.result(),
        ledger: collab.ledger().clone(),
        transcript,
    })
}
