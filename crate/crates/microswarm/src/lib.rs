//! Simulation and learned control of microscopic active particles.
//!
//! The crate couples a Brownian-dynamics engine for self-propelled colloids
//! with per-species control models: classical rule-based agents or
//! actor-critic policies trained by policy-gradient methods. The same
//! control loop drives a local engine or, over a line-delimited JSON TCP
//! protocol, a remote environment.

pub mod control;
pub mod engine;
pub mod objectives;
pub mod sensing;
pub mod geometry;
pub mod learn;
pub mod rng;
pub mod types;

pub use engine::{ActionSource, Engine, EngineError, Environment, PassiveSource, WcaConfig};
pub use geometry::Vec3;
pub use rng::{RngStream, StreamPurpose};
pub use types::{Action, Boundary, Colloid, SimParams};
