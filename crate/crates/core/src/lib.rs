//! Zero-determinant alliances in sequential multi-player repeated games, and
//! where to put ZD players on a network.
//!
//! The crate is layered bottom-up:
//!
//! * [`game`]: the public-goods stage game, states and payoff vectors.
//! * [`markov`]: leader/follower memory-one strategies, the transition
//!   matrix, stationary distributions and the determinant form of `v·f`.
//! * [`zd`]: synthesizing an alliance strategy that pins a linear payoff
//!   relation, and checking that it holds.
//! * [`network`]: topologies, contact traces and centrality.
//! * [`field`]: the cooperation probability each regular node settles at
//!   for a given set of ZD nodes.
//! * [`deploy`]: picking the ZD set, by genetic search or enumeration.
//!
//! ```
//! use zdlab::{game::{payoff_vectors, GameShape}, zd::{synthesize, ZdParams}};
//!
//! let shape = GameShape::new(3, 2, 2, 9.0)?;
//! let result = synthesize(&ZdParams::new(shape, 0.0, 3.0), &payoff_vectors(&shape))?;
//! assert!((result.phi_interval.upper - 1.0 / 6.0).abs() < 1e-12);
//! assert!((result.phi - 1.0 / 12.0).abs() < 1e-12);
//! # Ok::<(), zdlab::Error>(())
//! ```

pub mod deploy;
pub mod error;
pub mod field;
pub mod game;
pub mod markov;
pub mod network;
pub mod zd;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/stage-game.md")]
    mod stage_game {}
    #[doc = include_str!("../../../book/src/markov-chains.md")]
    mod markov_chains {}
    #[doc = include_str!("../../../book/src/zd-alliances.md")]
    mod zd_alliances {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/incentive-field.md")]
    mod incentive_field {}
    #[doc = include_str!("../../../book/src/placement.md")]
    mod placement {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
