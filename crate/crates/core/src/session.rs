//! Event-sourced exploration sessions.
//!
//! A session wraps an [`ExplorationState`] and a [`Collaboration`] and
//! records everything that happens as a sequence of [`Event`]s. Replaying
//! the log through a fresh session reproduces the same state exactly.
//!
//! In live mode answers come from outside through [`Session::submit`]. In
//! simulated mode the experts' knowledge is part of the session and every
//! ask is answered on the spot with the standard interaction.

use serde::{Deserialize, Serialize};

use crate::context::IncompleteContext;
use crate::cxt::ContextJson;
use crate::error::{Error, Result};
use crate::exploration::{ExplorationState, FictitiousJson, HistoryJson, Source};
use crate::expert::{check_answer, ei_standard, Answer, AnswerJson, ExpertKnowledge};
use crate::implication::ImplicationJson;
use crate::strategy::{Collaboration, InteractionLedger, Question, Round, Step, StrategyConfig, StrategyKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    #[default]
    Live,
    Simulated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
}

/// Everything needed to start a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub attributes: Vec<String>,
    #[serde(default)]
    pub roster: Vec<RosterEntry>,
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub mode: SessionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lectic_order: Option<Vec<String>>,
    /// Expert documents, simulated mode only. The roster defaults to their
    /// names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experts: Option<Vec<serde_json::Value>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventBody {
    SessionCreated {
        id: String,
        spec: SessionSpec,
        /// Join tokens in roster order. Stripped from public streams.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        tokens: Vec<String>,
    },
    QuestionPosed {
        question_id: u64,
        premise: Vec<String>,
        conclusion: Vec<String>,
    },
    AutoAccepted {
        question_id: u64,
        premise: Vec<String>,
        conclusion: Vec<String>,
    },
    ExpertAsked {
        question_id: u64,
        experts: Vec<String>,
    },
    ExpertAnswered {
        question_id: u64,
        expert: String,
        answer: AnswerJson,
    },
    AnswerMerged {
        question_id: u64,
        answer: AnswerJson,
    },
    Finished {
        accepted: usize,
        examples: usize,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self.body {
            EventBody::SessionCreated { .. } => "session_created",
            EventBody::QuestionPosed { .. } => "question_posed",
            EventBody::AutoAccepted { .. } => "auto_accepted",
            EventBody::ExpertAsked { .. } => "expert_asked",
            EventBody::ExpertAnswered { .. } => "expert_answered",
            EventBody::AnswerMerged { .. } => "answer_merged",
            EventBody::Finished { .. } => "finished",
        }
    }

    /// The event with join tokens removed.
    pub fn public(&self) -> Event {
        let mut e = self.clone();
        if let EventBody::SessionCreated { tokens, .. } = &mut e.body {
            tokens.clear();
        }
        e
    }

    /// One JSON line, without the newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}

/// A question waiting for answers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingJson {
    pub question_id: u64,
    pub premise: Vec<String>,
    pub conclusion: Vec<String>,
    pub awaiting: Vec<String>,
}

/// Progress view of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub mode: SessionMode,
    pub attributes: Vec<String>,
    pub roster: Vec<RosterEntry>,
    pub strategy: StrategyConfig,
    pub finished: bool,
    pub accepted: Vec<ImplicationJson>,
    pub real: ContextJson,
    pub fictitious_rows: ContextJson,
    pub fictitious: Vec<FictitiousJson>,
    pub possibly_valid: Vec<ImplicationJson>,
    pub ledger: InteractionLedger,
    pub pending: Option<PendingJson>,
    pub history: Vec<HistoryJson>,
    pub events: u64,
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    spec: SessionSpec,
    tokens: Vec<String>,
    state: ExplorationState,
    collab: Collaboration,
    experts: Option<Vec<ExpertKnowledge>>,
    round: Option<Round>,
    /// Experts that already answered the current round.
    answered: Vec<usize>,
    log: Vec<Event>,
}

impl Session {
    /// Starts a session and runs it up to the first ask. `tokens` are the
    /// join tokens in roster order, picked by the caller; an empty list
    /// turns token checks off.
    pub fn create(id: impl Into<String>, mut spec: SessionSpec, tokens: Vec<String>) -> Result<Session> {
        let experts = match (&spec.mode, &spec.experts) {
            (SessionMode::Simulated, Some(docs)) => {
                let mut v = Vec::with_capacity(docs.len());
                for d in docs {
                    let e = ExpertKnowledge::from_json_str(&d.to_string(), None)?;
                    if e.attributes() != spec.attributes.as_slice() {
                        return Err(Error::IncompatibleContexts);
                    }
                    v.push(e);
                }
                if spec.roster.is_empty() {
                    spec.roster = v
                        .iter()
                        .map(|e| RosterEntry {
                            id: e.name.clone(),
                            name: String::new(),
                        })
                        .collect();
                }
                Some(v)
            }
            (SessionMode::Simulated, None) => {
                return Err(Error::Protocol("simulated sessions need expert documents".into()))
            }
            (SessionMode::Live, Some(_)) => {
                return Err(Error::Protocol("live sessions take answers, not expert documents".into()))
            }
            (SessionMode::Live, None) => None,
        };
        if spec.mode == SessionMode::Live && spec.strategy.kind == StrategyKind::MaxKnowledge {
            return Err(Error::Strategy(
                "max_knowledge needs the experts' knowledge and cannot run live".into(),
            ));
        }
        let roster: Vec<String> = spec.roster.iter().map(|r| r.id.clone()).collect();
        if let Some(ex) = &experts {
            if ex.iter().map(|e| &e.name).ne(roster.iter()) {
                return Err(Error::Protocol("roster must list the experts in document order".into()));
            }
        }
        if !tokens.is_empty() && tokens.len() != roster.len() {
            return Err(Error::Protocol(format!(
                "{} tokens for {} roster entries",
                tokens.len(),
                roster.len()
            )));
        }
        let mut collab = Collaboration::new(spec.strategy.clone(), roster)?;
        if let Some(ex) = &experts {
            collab = collab.with_knowledge(ex);
        }
        let mut state = ExplorationState::new(spec.attributes.clone(), None, None)?;
        if let Some(o) = &spec.lectic_order {
            state.set_lectic_order(o)?;
        }
        let id = id.into();
        let mut s = Session {
            id: id.clone(),
            spec: spec.clone(),
            tokens: tokens.clone(),
            state,
            collab,
            experts,
            round: None,
            answered: Vec::new(),
            log: Vec::new(),
        };
        s.emit(EventBody::SessionCreated { id, spec, tokens });
        s.advance()?;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &SessionSpec {
        &self.spec
    }

    pub fn mode(&self) -> SessionMode {
        self.spec.mode
    }

    pub fn state(&self) -> &ExplorationState {
        &self.state
    }

    pub fn ledger(&self) -> &InteractionLedger {
        self.collab.ledger()
    }

    pub fn events(&self) -> &[Event] {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.state.is_finished()
    }

    fn emit(&mut self, body: EventBody) {
        let seq = self.log.len() as u64 + 1;
        self.log.push(Event { seq, body });
    }

    fn expert_index(&self, expert: &str) -> Result<usize> {
        self.spec
            .roster
            .iter()
            .position(|r| r.id == expert)
            .ok_or_else(|| Error::Protocol(format!("unknown expert `{expert}`")))
    }

    /// Checks a join token. Sessions created without tokens accept any.
    pub fn authorize(&self, expert: &str, token: &str) -> Result<()> {
        let i = self.expert_index(expert)?;
        if self.tokens.is_empty() || self.tokens[i] == token {
            Ok(())
        } else {
            Err(Error::Protocol(format!("bad join token for `{expert}`")))
        }
    }

    fn names(&self, set: crate::attrs::AttrSet) -> Vec<String> {
        set.iter().map(|m| self.spec.attributes[m].clone()).collect()
    }

    /// Runs the engine and strategy until someone has to answer or the
    /// exploration ends.
    fn advance(&mut self) -> Result<()> {
        loop {
            if self.round.is_some() {
                return Ok(());
            }
            if self.state.is_finished() {
                return Ok(());
            }
            let before = self.state.history().len();
            let next = self.state.next_question()?;
            let derived: Vec<(u64, crate::implication::Implication)> = self.state.history()[before..]
                .iter()
                .filter(|h| h.source == Source::Derived)
                .map(|h| (h.id, h.question))
                .collect();
            for (id, q) in derived {
                let body = EventBody::AutoAccepted {
                    question_id: id,
                    premise: self.names(q.premise),
                    conclusion: self.names(q.conclusion),
                };
                self.emit(body);
            }
            let Some(q) = next else {
                let body = EventBody::Finished {
                    accepted: self.state.accepted().len(),
                    examples: self.state.examples().object_count(),
                };
                self.emit(body);
                return Ok(());
            };
            self.emit(EventBody::QuestionPosed {
                question_id: q.id,
                premise: self.names(q.implication.premise),
                conclusion: self.names(q.implication.conclusion),
            });
            let (round, step) = self.collab.begin(q)?;
            self.round = Some(round);
            self.answered.clear();
            self.follow(q, step)?;
        }
    }

    /// Acts on a strategy step for question `q`.
    fn follow(&mut self, q: Question, step: Step) -> Result<()> {
        match step {
            Step::Resolved(answer) => {
                let aj = answer.to_json(&self.spec.attributes);
                self.state.apply_answer(q.id, answer)?;
                self.round = None;
                self.emit(EventBody::AnswerMerged {
                    question_id: q.id,
                    answer: aj,
                });
                Ok(())
            }
            Step::Ask(experts) if experts.is_empty() => Ok(()),
            Step::Ask(experts) => {
                let names = experts.iter().map(|&e| self.spec.roster[e].id.clone()).collect();
                self.emit(EventBody::ExpertAsked {
                    question_id: q.id,
                    experts: names,
                });
                if let Some(group) = self.experts.clone() {
                    for e in experts {
                        let a = ei_standard(&q.implication, &group[e]);
                        self.answer(e, q.id, a)?;
                        if self.round.is_none() {
                            break;
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn answer(&mut self, expert: usize, question_id: u64, answer: Answer) -> Result<()> {
        let round = self.round.as_mut().ok_or_else(|| Error::Stale {
            question_id,
            reason: "no question is pending".into(),
        })?;
        let q = *round.question();
        if q.id != question_id {
            return Err(Error::Stale {
                question_id,
                reason: format!("pending question is {}", q.id),
            });
        }
        if self.answered.contains(&expert) {
            return Err(Error::Stale {
                question_id,
                reason: format!("`{}` already answered", self.spec.roster[expert].id),
            });
        }
        if !round.awaiting().contains(&expert) {
            return Err(Error::Stale {
                question_id,
                reason: format!("`{}` was not asked", self.spec.roster[expert].id),
            });
        }
        check_answer(&q.implication, &answer, &self.spec.attributes)?;
        if let Answer::Reject(rows) = &answer {
            if let Some(name) = rows
                .objects()
                .iter()
                .find(|o| o.starts_with(crate::exploration::FICTITIOUS_PREFIX))
            {
                return Err(Error::InvalidCounterexample {
                    object: name.clone(),
                    reason: "names starting with `?:` are reserved".into(),
                });
            }
            let clash = self.state.examples().conflicts(rows)?;
            if !clash.is_empty() {
                return Err(Error::Conflict(clash));
            }
        }
        let aj = answer.to_json(&self.spec.attributes);
        let step = self.collab.submit(round, expert, answer)?;
        self.answered.push(expert);
        self.emit(EventBody::ExpertAnswered {
            question_id,
            expert: self.spec.roster[expert].id.clone(),
            answer: aj,
        });
        self.follow(q, step)
    }

    /// Takes one expert's answer. On error nothing changes.
    pub fn submit(&mut self, expert: &str, question_id: u64, answer: &AnswerJson) -> Result<&[Event]> {
        if self.mode() == SessionMode::Simulated {
            return Err(Error::Protocol("simulated sessions answer themselves".into()));
        }
        let e = self.expert_index(expert)?;
        let a = answer.to_answer(&self.spec.attributes)?;
        let before = self.log.len();
        let backup = self.clone();
        let r = self.answer(e, question_id, a).and_then(|_| self.advance());
        match r {
            Ok(()) => Ok(&self.log[before..]),
            Err(err) => {
                *self = backup;
                Err(err)
            }
        }
    }

    fn pending_json(&self, only: Option<usize>) -> Option<PendingJson> {
        let round = self.round.as_ref()?;
        if let Some(e) = only {
            if !round.awaiting().contains(&e) {
                return None;
            }
        }
        let q = round.question();
        Some(PendingJson {
            question_id: q.id,
            premise: self.names(q.implication.premise),
            conclusion: self.names(q.implication.conclusion),
            awaiting: round
                .awaiting()
                .iter()
                .map(|&e| self.spec.roster[e].id.clone())
                .collect(),
        })
    }

    /// The question `expert` should answer now, if any.
    pub fn pending_for(&self, expert: &str) -> Result<Option<PendingJson>> {
        let e = self.expert_index(expert)?;
        Ok(self.pending_json(Some(e)))
    }

    pub fn snapshot(&self) -> Snapshot {
        let r = self.state.result();
        let j = r.to_json();
        Snapshot {
            id: self.id.clone(),
            mode: self.spec.mode,
            attributes: self.spec.attributes.clone(),
            roster: self.spec.roster.clone(),
            strategy: self.spec.strategy.clone(),
            finished: self.state.is_finished(),
            accepted: j.accepted,
            real: j.real,
            fictitious_rows: j.fictitious_rows,
            fictitious: j.fictitious,
            possibly_valid: j.possibly_valid,
            ledger: self.collab.ledger().clone(),
            pending: self.pending_json(None),
            history: r.history_json(),
            events: self.log.len() as u64,
        }
    }

    pub fn examples(&self) -> &IncompleteContext {
        self.state.examples()
    }

    /// Rebuilds a session from its JSON-lines log.
    ///
    /// A last line without a trailing newline that does not parse is taken
    /// to be a torn write and ignored. The rebuilt session must reproduce
    /// the log; it may run ahead of it when the log was cut short, and the
    /// extra events are returned by [`Session::events`] past the log length.
    pub fn replay(text: &str) -> Result<Session> {
        let mut events = Vec::new();
        let lines: Vec<&str> = text.split('\n').collect();
        let last = lines.len() - 1;
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Event>(line) {
                Ok(e) => events.push((i + 1, e)),
                Err(_) if i == last => break,
                Err(e) => {
                    return Err(Error::Replay {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        let mut it = events.iter();
        let Some((line, first)) = it.next() else {
            return Err(Error::Replay {
                line: 1,
                message: "log is empty".into(),
            });
        };
        let EventBody::SessionCreated { id, spec, tokens } = &first.body else {
            return Err(Error::Replay {
                line: *line,
                message: "log does not start with session_created".into(),
            });
        };
        let fail = |line: usize, e: Error| Error::Replay {
            line,
            message: e.to_string(),
        };
        let mut s = Session::create(id.clone(), spec.clone(), tokens.clone()).map_err(|e| fail(*line, e))?;
        for (n, (line, ev)) in events.iter().enumerate() {
            if s.spec.mode == SessionMode::Live {
                if let EventBody::ExpertAnswered {
                    question_id,
                    expert,
                    answer,
                } = &ev.body
                {
                    if s.log.len() <= n {
                        s.submit(expert, *question_id, answer).map_err(|e| fail(*line, e))?;
                    }
                }
            }
            match s.log.get(n) {
                Some(mine) if mine == ev => {}
                Some(mine) => {
                    return Err(Error::Replay {
                        line: *line,
                        message: format!("log has `{}`, replay produced `{}`", ev.name(), mine.name()),
                    })
                }
                None => {
                    return Err(Error::Replay {
                        line: *line,
                        message: format!("log has `{}` but replay is waiting for an answer", ev.name()),
                    })
                }
            }
        }
        Ok(s)
    }

    /// The whole log as JSON lines, each newline-terminated.
    pub fn log_text(&self) -> String {
        let mut out = String::new();
        for e in &self.log {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}
