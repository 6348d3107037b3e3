//! Idle-vehicle rebalancing for electric carsharing fleets.
//!
//! Zones are expanded into a node-charge graph, the placement of idle
//! vehicles is posed as a p-median program with an embedded min-cost flow
//! and optional queueing capacity rows, and the program is solved exactly by
//! branch-and-bound or heuristically.

pub mod error;
pub mod generator;
pub mod graph;
pub mod instance;
pub mod model;
pub mod queueing;
pub mod render;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
