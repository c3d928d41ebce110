//! Energy-per-bit modeling for body-worn sensor nodes.
//!
//! A node senses at some data rate and ships every bit over a link. Its
//! power is `rate * (eta_sensing(rate) + eta_comm) / system_efficiency`,
//! where the sensing cost comes from a log-log fit over surveyed front ends
//! with a plateau floor, and the link cost is a per-bit constant. From this
//! the crate answers battery-lifetime and perpetual-operation questions and
//! checks them against a discrete-time battery simulator.
//!
//! Modules:
//! - [`model`]: domain types and the closed-form equations
//! - [`benchfit`]: survey ingestion and the log-log fit
//! - [`feasibility`]: sweeps, knees, perpetual-rate thresholds, comparisons
//! - [`sim`]: battery state-of-charge simulator
//! - [`config`]: JSON node configurations and presets

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchfit;
pub mod config;
pub mod error;
pub mod feasibility;
pub mod model;
pub mod numfmt;
pub mod sim;
pub mod units;

pub use error::{ConfigError, IngestError, ModelError};
pub use model::{
    battery_energy, lifetime, node_power, sensing_efficiency, total_energy, Battery, CommProtocol,
    EfficiencyModel, HarvestBand, Lifetime, NodeConfig, SensingModel,
};
