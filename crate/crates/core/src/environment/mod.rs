//! Context generation, scoring, and the game loop tying a learner to a
//! delayed loss stream.
//!
//! Losses reach the learner only through the feedback buffer, so a hidden
//! context is never visible before its delivery round.

mod game;
mod scoring;
mod stream;

pub use game::{run_game, Coefficient, GameConfig, GameSeeds, LearnerSpec, LossModel};
pub use scoring::ScoringFn;
pub use stream::{ContextBodies, ContextPair, ContextStream, StreamSpec};
