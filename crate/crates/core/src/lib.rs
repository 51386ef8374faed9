//! Constrained wireless link scheduling with state-augmented graph neural
//! network policies.
//!
//! Links of a wireless network conflict when they share an agent. A policy
//! decides which links transmit at each step, maximizing successful
//! transmissions while every link meets a minimum long-run transmission rate.
//! The policy is a graph-convolutional network fed with the current dual
//! variables of the rate constraints; at run time the duals are updated
//! online so the schedule adapts to each link's deficit.
//!
//! - [`graph`]: lattice communication graphs and their conflict graphs.
//! - [`schedule`]: success vectors, objective, Lagrangian, violation levels.
//! - [`policy`]: the network, its exact gradients, Adam, checkpoints.
//! - [`trainer`]: training over sampled dual variables.
//! - [`executor`]: online execution with dual-variable updates.
//! - [`baselines`]: p-persistent and random-MIS schedulers.
//! - [`harness`]: datasets, configs, metric export and reports.

pub mod baselines;
pub mod error;
pub mod executor;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod schedule;
pub mod trainer;

pub use error::{Error, Result};
