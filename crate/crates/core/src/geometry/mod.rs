//! Feasible sets and mirror maps.
//!
//! The squared-distance deviation `½‖x − y‖²` used throughout the regret
//! analysis is [`MirrorMap::Euclidean`]'s Bregman divergence.

mod body;
mod mirror;

pub use body::{ConvexBody, Shape};
pub use mirror::{MirrorMap, MirrorStep, ENTROPY_FLOOR};
