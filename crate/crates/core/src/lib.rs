//! Empathetic planning over a restricted fragment of multi-agent epistemic
//! logic.
//!
//! An observer plans on behalf of an actor using a model of the actor's
//! beliefs and capabilities. The crate provides the logic core, a Kripke
//! oracle for checking it, knowledge bases with update and revision,
//! epistemic actions with sensing, perspective projection, an optimal
//! planner, the empathetic and sympathetic planners, goal recognition, and
//! a small s-expression domain language.

pub mod action;
pub mod empathy;
pub mod kb;
pub mod kripke;
pub mod logic;
pub mod oracle_check;
pub mod problem;
pub mod projection;
pub mod planner;
pub mod recognition;
pub mod symbol;
pub mod syntax;

pub use action::{Action, ActionLibrary, SensingResult, Step};
pub use kb::KnowledgeBase;
pub use logic::{Agent, Atom, CanonicalRml, Formula, Literal, Vocabulary};
pub use planner::{MepProblem, Plan, SearchConfig};
pub use problem::Problem;
