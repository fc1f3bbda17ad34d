//! Simulator of a UAV relay defending a cellular uplink against jamming.
//!
//! The UAV chooses its relay power each slot with a convolutional deep
//! Q-network over its recent experience (or a tabular benchmark), while a
//! jammer picks its power with Q-learning. The [`game`] loop binds channels,
//! PHY and agents into reproducible episodes and [`analysis`] compares the
//! outcome with the stage game's equilibria.

pub mod agents;
pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod game;
pub mod nn;
pub mod numerics;
pub mod phy;
pub mod presets;
pub mod selftest;
pub mod tabular;
mod util;

pub use error::{Error, Result};
