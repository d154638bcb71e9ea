//! Simulation, compilation and bounded refinement checking for asynchronous
//! lattice models: surface reaction networks, tile assembly, cellular automata
//! and amoebot particle systems.

pub mod amoebot;
pub mod assembly;
pub mod ca;
pub mod cli;
pub mod compile;
pub mod config;
pub mod format;
pub mod cross;
pub mod lattice;
pub mod model;
pub mod orient;
pub mod pipeline;
pub mod por;
pub mod render;
pub mod scrn;
pub mod trace;
pub mod verify;

pub use config::Configuration;
pub use lattice::{Coord, LatticeKind, Region};
pub use model::{explore, Limits, Model, StateGraph};
