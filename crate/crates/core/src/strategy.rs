//! Collaboration strategies: how a question is routed through a group of
//! experts and how their answers are merged into one.
//!
//! A strategy runs as a small step machine so that the same code serves
//! simulated experts (answered immediately) and live ones (answered over the
//! network). [`Collaboration::begin`] opens a round for a question and names
//! the experts to ask; each [`Collaboration::submit`] feeds one answer back
//! and either names more experts or resolves the round.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attrs::AttrSet;
use crate::error::{Error, Result};
use crate::expert::{ei_standard, group_join, Answer, AnswerKind, ExpertKnowledge, Interaction};
use crate::implication::Implication;
use crate::par::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Single,
    Ignorant,
    MaxKnowledge,
    Broadcast,
    Iterative,
    RandomSelection,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Single,
        StrategyKind::Ignorant,
        StrategyKind::MaxKnowledge,
        StrategyKind::Broadcast,
        StrategyKind::Iterative,
        StrategyKind::RandomSelection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Single => "single",
            StrategyKind::Ignorant => "ignorant",
            StrategyKind::MaxKnowledge => "max_knowledge",
            StrategyKind::Broadcast => "broadcast",
            StrategyKind::Iterative => "iterative",
            StrategyKind::RandomSelection => "random_selection",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Strategy(format!("unknown strategy `{s}`")))
    }
}

/// Expert order for the iterative strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    /// `"fixed"` (group order) or `"shuffled"` (fresh seeded shuffle per
    /// question).
    Named(String),
    /// Explicit permutation of expert names.
    Explicit(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind) -> Self {
        StrategyConfig {
            kind,
            order: None,
            seed: None,
            weights: None,
        }
    }

    pub fn with_order(mut self, order: OrderSpec) -> Self {
        self.order = Some(order);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Order {
    Fixed(Vec<usize>),
    Shuffled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertAsks {
    pub expert: String,
    pub asks: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionAsks {
    pub question: u64,
    pub asks: u64,
    /// Number of sequential waves of asking.
    pub depth: u64,
}

/// Counts of expert interactions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionLedger {
    pub per_expert: Vec<ExpertAsks>,
    pub per_question: Vec<QuestionAsks>,
    pub total: u64,
}

impl InteractionLedger {
    pub fn new(roster: &[String]) -> Self {
        InteractionLedger {
            per_expert: roster
                .iter()
                .map(|e| ExpertAsks {
                    expert: e.clone(),
                    asks: 0,
                })
                .collect(),
            per_question: Vec::new(),
            total: 0,
        }
    }

    /// One wave of asks for `question`.
    pub fn record(&mut self, question: u64, experts: &[usize]) {
        if experts.is_empty() {
            return;
        }
        for &e in experts {
            self.per_expert[e].asks += 1;
        }
        let n = experts.len() as u64;
        self.total += n;
        match self.per_question.iter_mut().find(|q| q.question == question) {
            Some(q) => {
                q.asks += n;
                q.depth += 1;
            }
            None => self.per_question.push(QuestionAsks {
                question,
                asks: n,
                depth: 1,
            }),
        }
    }

    pub fn asks_for(&self, question: u64) -> u64 {
        self.per_question
            .iter()
            .find(|q| q.question == question)
            .map_or(0, |q| q.asks)
    }

    /// Totals agree: per expert, per question, overall.
    pub fn is_conserved(&self) -> bool {
        let e: u64 = self.per_expert.iter().map(|e| e.asks).sum();
        let q: u64 = self.per_question.iter().map(|q| q.asks).sum();
        e == self.total && q == self.total
    }

    /// Largest per-question depth.
    pub fn max_depth(&self) -> u64 {
        self.per_question.iter().map(|q| q.depth).max().unwrap_or(0)
    }
}

/// A question as handed to a strategy: `premise ⇒ residual conclusion`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Question {
    pub id: u64,
    pub implication: Implication,
}

/// What happens next in a round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Ask these experts (roster indices) and submit their answers. Empty
    /// while earlier asks of the same wave are outstanding.
    Ask(Vec<usize>),
    Resolved(Answer),
}

#[derive(Clone, Debug)]
enum Plan {
    Relay,
    Broadcast { answers: Vec<Option<Answer>> },
    Iterative { order: Vec<usize>, pos: usize, known: AttrSet },
    Done,
}

/// State of one question inside a strategy.
#[derive(Clone, Debug)]
pub struct Round {
    question: Question,
    plan: Plan,
    awaiting: Vec<usize>,
}

impl Round {
    pub fn question(&self) -> &Question {
        &self.question
    }

    /// Experts asked in this round whose answer is still outstanding.
    pub fn awaiting(&self) -> &[usize] {
        &self.awaiting
    }
}

/// One expert answer observed while resolving a question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exchange {
    pub expert: usize,
    pub answer: Answer,
}

/// A configured strategy bound to a roster, with its random state and
/// ledger.
#[derive(Clone, Debug)]
pub struct Collaboration {
    config: StrategyConfig,
    roster: Vec<String>,
    order: Order,
    weights: Option<WeightedIndex<f64>>,
    rng: ChaCha8Rng,
    ledger: InteractionLedger,
    knowledge: Option<Vec<ExpertKnowledge>>,
    emax: Option<ExpertKnowledge>,
}

impl Collaboration {
    pub fn new(config: StrategyConfig, roster: Vec<String>) -> Result<Self> {
        let m = roster.len();
        {
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = roster.iter().find(|n| !seen.insert(n.as_str())) {
                return Err(Error::Duplicate {
                    kind: "expert",
                    name: dup.clone(),
                });
            }
        }
        match config.kind {
            StrategyKind::Single if m != 1 => {
                return Err(Error::Strategy(format!(
                    "single needs exactly one expert, got {m}"
                )))
            }
            StrategyKind::Ignorant => {}
            _ if m == 0 => {
                return Err(Error::Strategy(format!(
                    "{} needs at least one expert",
                    config.kind.as_str()
                )))
            }
            _ => {}
        }
        let order = match &config.order {
            None => Order::Fixed((0..m).collect()),
            Some(OrderSpec::Named(s)) => match s.as_str() {
                "fixed" => Order::Fixed((0..m).collect()),
                "shuffled" | "per_question_shuffled" => Order::Shuffled,
                other => return Err(Error::Strategy(format!("unknown order `{other}`"))),
            },
            Some(OrderSpec::Explicit(names)) => {
                let mut idx = Vec::with_capacity(names.len());
                for n in names {
                    let i = roster
                        .iter()
                        .position(|r| r == n)
                        .ok_or_else(|| Error::Strategy(format!("order names unknown expert `{n}`")))?;
                    if idx.contains(&i) {
                        return Err(Error::Strategy(format!("order repeats expert `{n}`")));
                    }
                    idx.push(i);
                }
                if idx.len() != m {
                    return Err(Error::Strategy("order is not a permutation of the group".into()));
                }
                Order::Fixed(idx)
            }
        };
        let weights = match &config.weights {
            None => None,
            Some(w) => {
                if w.len() != m {
                    return Err(Error::Strategy(format!(
                        "{} weights for {m} experts",
                        w.len()
                    )));
                }
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::Strategy("weights must be non-negative".into()));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::Strategy(format!("weights sum to {sum}, not 1")));
                }
                Some(WeightedIndex::new(w).map_err(|e| Error::Strategy(e.to_string()))?)
            }
        };
        let rng = ChaCha8Rng::seed_from_u64(config.seed.unwrap_or(0));
        Ok(Collaboration {
            ledger: InteractionLedger::new(&roster),
            config,
            roster,
            order,
            weights,
            rng,
            knowledge: None,
            emax: None,
        })
    }

    /// Gives the strategy access to the experts' knowledge, which only the
    /// maximal-knowledge strategy reads.
    pub fn with_knowledge(mut self, experts: &[ExpertKnowledge]) -> Self {
        self.knowledge = Some(experts.to_vec());
        self
    }

    pub fn config(&self) -> &StrategyConfig {
        &self.config
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn ledger(&self) -> &InteractionLedger {
        &self.ledger
    }

    /// True when rounds need the experts' knowledge rather than their
    /// answers.
    pub fn needs_knowledge(&self) -> bool {
        self.config.kind == StrategyKind::MaxKnowledge
    }

    fn ask(&mut self, round: &mut Round, experts: Vec<usize>) -> Step {
        self.ledger.record(round.question.id, &experts);
        round.awaiting = experts.clone();
        Step::Ask(experts)
    }

    fn resolve(round: &mut Round, answer: Answer) -> Step {
        round.plan = Plan::Done;
        round.awaiting.clear();
        Step::Resolved(answer)
    }

    /// Opens a round for `question`.
    pub fn begin(&mut self, question: Question) -> Result<(Round, Step)> {
        let mut round = Round {
            question,
            plan: Plan::Done,
            awaiting: Vec::new(),
        };
        let residual = question.implication.residual();
        let step = match self.config.kind {
            StrategyKind::Ignorant => Self::resolve(&mut round, Answer::Unknown(residual)),
            StrategyKind::Single => {
                round.plan = Plan::Relay;
                self.ask(&mut round, vec![0])
            }
            StrategyKind::RandomSelection => {
                let e = match &self.weights {
                    Some(w) => w.sample(&mut self.rng),
                    None => self.rng.random_range(0..self.roster.len()),
                };
                round.plan = Plan::Relay;
                self.ask(&mut round, vec![e])
            }
            StrategyKind::Broadcast => {
                round.plan = Plan::Broadcast {
                    answers: vec![None; self.roster.len()],
                };
                self.ask(&mut round, (0..self.roster.len()).collect())
            }
            StrategyKind::Iterative => {
                let order = match &self.order {
                    Order::Fixed(o) => o.clone(),
                    Order::Shuffled => {
                        let mut o: Vec<usize> = (0..self.roster.len()).collect();
                        o.shuffle(&mut self.rng);
                        o
                    }
                };
                let first = order[0];
                round.plan = Plan::Iterative {
                    order,
                    pos: 0,
                    known: AttrSet::EMPTY,
                };
                self.ask(&mut round, vec![first])
            }
            StrategyKind::MaxKnowledge => {
                if self.emax.is_none() {
                    let group = self.knowledge.as_ref().ok_or_else(|| {
                        Error::Strategy("max_knowledge needs the experts' knowledge".into())
                    })?;
                    self.emax = Some(group_join(group)?);
                    // Collecting everyone's knowledge costs one interaction
                    // per expert.
                    let all: Vec<usize> = (0..self.roster.len()).collect();
                    self.ledger.record(question.id, &all);
                }
                let emax = self.emax.as_ref().expect("materialized above");
                let answer = ei_standard(&question.implication, emax);
                Self::resolve(&mut round, answer)
            }
        };
        Ok((round, step))
    }

    /// Feeds one expert's answer into `round`.
    pub fn submit(&mut self, round: &mut Round, expert: usize, answer: Answer) -> Result<Step> {
        let Some(slot) = round.awaiting.iter().position(|&e| e == expert) else {
            return Err(Error::Stale {
                question_id: round.question.id,
                reason: format!(
                    "no answer expected from `{}`",
                    self.roster.get(expert).map_or("?", |s| s.as_str())
                ),
            });
        };
        round.awaiting.remove(slot);
        let residual = round.question.implication.residual();
        match &mut round.plan {
            Plan::Done => Err(Error::State("round already resolved".into())),
            Plan::Relay => Ok(Self::resolve(round, answer)),
            Plan::Broadcast { answers } => {
                answers[expert] = Some(answer);
                if !round.awaiting.is_empty() {
                    return Ok(Step::Ask(Vec::new()));
                }
                let answers: Vec<Answer> = answers.iter_mut().map(|a| a.take().expect("all answered")).collect();
                let merged = merge_broadcast(residual, answers)?;
                Ok(Self::resolve(round, merged))
            }
            Plan::Iterative { order, pos, known } => match answer {
                Answer::Accept | Answer::Reject(_) => Ok(Self::resolve(round, answer)),
                Answer::Unknown(z) => {
                    *known = *known | (residual - z);
                    *pos += 1;
                    if *pos < order.len() {
                        let next = order[*pos];
                        Ok(self.ask(round, vec![next]))
                    } else if *known == residual {
                        Ok(Self::resolve(round, Answer::Accept))
                    } else {
                        let rest = residual - *known;
                        Ok(Self::resolve(round, Answer::Unknown(rest)))
                    }
                }
            },
        }
    }

    /// Resolves `question` with simulated experts. Broadcast waves are
    /// evaluated with `exec`; answers are merged in roster order either way.
    pub fn resolve_with(
        &mut self,
        question: Question,
        experts: &[ExpertKnowledge],
        interaction: &dyn Interaction,
        exec: Exec,
    ) -> Result<(Answer, Vec<Exchange>)> {
        if experts.len() != self.roster.len() {
            return Err(Error::Strategy(format!(
                "{} experts for a roster of {}",
                experts.len(),
                self.roster.len()
            )));
        }
        let mut exchanges = Vec::new();
        let (mut round, mut step) = self.begin(question)?;
        loop {
            match step {
                Step::Resolved(answer) => return Ok((answer, exchanges)),
                Step::Ask(asked) => {
                    let answers = exec.map(&asked, |&e| interaction.ask(&question.implication, &experts[e]));
                    step = Step::Ask(Vec::new());
                    for (e, a) in asked.into_iter().zip(answers) {
                        exchanges.push(Exchange {
                            expert: e,
                            answer: a.clone(),
                        });
                        step = self.submit(&mut round, e, a)?;
                    }
                }
            }
        }
    }
}

/// Broadcast merge. Any rejection wins and the rejecting experts' rows are
/// joined in roster order; otherwise the known-to-follow parts are united.
pub fn merge_broadcast(residual: AttrSet, answers: Vec<Answer>) -> Result<Answer> {
    let mut rejected: Option<crate::context::IncompleteContext> = None;
    let mut known = AttrSet::EMPTY;
    for a in answers {
        match a {
            Answer::Reject(ctx) => {
                rejected = Some(match rejected {
                    None => ctx,
                    Some(acc) => acc.join(&ctx)?,
                });
            }
            Answer::Accept => known = known | residual,
            Answer::Unknown(z) => known = known | (residual - z),
        }
    }
    if let Some(ctx) = rejected {
        return Ok(Answer::Reject(ctx));
    }
    if residual.is_subset(known) {
        Ok(Answer::Accept)
    } else {
        Ok(Answer::Unknown(residual - known))
    }
}

/// Outcome of repeatedly re-posing one implication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refinement {
    pub outcome: AnswerKind,
    pub rounds: u64,
    pub ledger: InteractionLedger,
}

/// Asks `target`, then keeps asking `(A ∪ Y) ⇒ Z` where `Y` is what the
/// group has so far confirmed and `Z` what is still open, until the group
/// accepts, rejects, or stops making progress.
pub fn refine(
    target: Implication,
    config: StrategyConfig,
    experts: &[ExpertKnowledge],
    interaction: &dyn Interaction,
    exec: Exec,
) -> Result<Refinement> {
    let roster: Vec<String> = experts.iter().map(|e| e.name.clone()).collect();
    let mut collab = Collaboration::new(config, roster)?.with_knowledge(experts);
    let mut confirmed = AttrSet::EMPTY;
    let mut open = target.residual();
    let mut rounds = 0;
    let outcome = loop {
        rounds += 1;
        let q = Question {
            id: rounds,
            implication: Implication::new(target.premise | confirmed, open),
        };
        let (answer, _) = collab.resolve_with(q, experts, interaction, exec)?;
        match answer {
            Answer::Accept => break AnswerKind::Accept,
            Answer::Reject(_) => break AnswerKind::Reject,
            Answer::Unknown(z) => {
                if z == open {
                    break AnswerKind::Unknown;
                }
                confirmed = confirmed | (open - z);
                open = z;
            }
        }
    };
    Ok(Refinement {
        outcome,
        rounds,
        ledger: collab.ledger.clone(),
    })
}

/// The experts a fresh collaboration would ask first in each of its next
/// `questions` rounds (the whole order for iterative).
pub fn preview_orders(config: &StrategyConfig, roster: &[String], questions: usize) -> Result<Vec<Vec<usize>>> {
    let mut c = Collaboration::new(config.clone(), roster.to_vec())?;
    let mut out = Vec::with_capacity(questions);
    for id in 0..questions as u64 {
        let q = Question {
            id,
            implication: Implication::new(AttrSet::EMPTY, AttrSet::singleton(0)),
        };
        let (round, step) = c.begin(q)?;
        match (&round.plan, step) {
            (Plan::Iterative { order, .. }, _) => out.push(order.clone()),
            (_, Step::Ask(e)) => out.push(e),
            _ => out.push(Vec::new()),
        }
    }
    Ok(out)
}
