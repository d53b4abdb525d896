//! Collaborative attribute exploration over incomplete formal contexts.
//!
//! Contexts carry three cell values (cross, blank, unknown). The exploration
//! engine asks implication questions, and a collaboration strategy routes
//! each question to a group of experts and merges what they answer.

pub mod attrs;
pub mod cell;
pub mod context;
pub mod cxt;
pub mod error;
pub mod exploration;
pub mod expert;
pub mod implication;
pub mod oracle;
pub mod session;
pub mod par;
pub mod strategy;
pub mod sweeps;
pub mod synth;

pub use attrs::{AttrSet, MAX_ATTRIBUTES};
pub use cell::Cell;
pub use context::{FormalContext, IncompleteContext, Mode, Side};
pub use exploration::{ExplorationResult, ExplorationState, Source};
pub use expert::{Answer, AnswerKind, ExpertKnowledge, Interaction, StandardInteraction};
pub use error::{ConflictCell, Error, Result};
pub use implication::{Implication, ImplicationJson, Theory};
pub use par::Exec;
pub use strategy::{Collaboration, InteractionLedger, Question, StrategyConfig, StrategyKind};
