//! Pure Nash equilibria in finite concurrent games: the suspect-game
//! transformation, per-objective decision procedures, a brute-force
//! oracle and reduction-based instance generators.

pub mod error;
pub mod game;
pub mod graph;
pub mod nash;
pub mod objectives;
pub mod oracle;
pub mod reductions;
pub mod solvers;
pub mod suspect;
pub mod testgen;

pub use error::{Error, Result};
pub use game::{AgentSet, ConcurrentGame, GameBuilder, Lasso, MoveProfile, StateId, StateSet};
pub use objectives::{BoolCircuit, DetAutomaton, Objective, PayoffVector, Preference, Preorder, Value};
