// SPDX-License-Identifier: Apache-2.0

//! Linearized double-cavity optomechanics.
//!
//! A mechanical membrane sits between two optical cavities. The left cavity is
//! driven on the red mechanical sideband, the right cavity on the blue one, and
//! a weak probe enters from the left. This crate computes
//!
//! * the mean-field steady state of the three modes ([`steadystate`]),
//! * the closed-form linear probe response and the output fields ([`response`]),
//! * an independent time-domain integration of the linearized equations that
//!   checks the closed forms ([`timedomain`]),
//! * parameter sweeps and the figure presets built on top of them ([`sweep`]).
//!
//! Grid evaluation runs on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise.

pub mod config;
pub mod error;
pub mod exec;
pub mod params;
pub mod response;
pub mod steadystate;
pub mod sweep;
pub mod timedomain;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use params::{PhysicalParams, ReducedParams};
pub use response::ResponseAmplitudes;
pub use steadystate::SteadyState;
