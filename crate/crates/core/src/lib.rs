//! Finite normal-form games: multilinear payoff evaluation, the structure of
//! payoff level sets (exact for jointly affine games, local for generic
//! ones) and equilibrium search.

pub mod cli;
pub mod document;
pub mod equilibrium;
pub mod error;
pub mod fiber;
pub mod game;
pub mod generate;
pub mod linalg;
pub mod linear;
pub mod payoff;
pub mod profile;
pub mod sampling;

pub use error::{Error, Result};
pub use game::{GameSpec, PayoffTable};
pub use profile::{PayoffVector, ReducedPoint, StrategyProfile};
