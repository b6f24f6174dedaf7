//! Simulation and routing for virtual private mobile networks (VPMNs): sets
//! of UEs that talk device-to-device and reach the cellular network only
//! through a few gateway devices.
//!
//! The crate covers the whole pipeline: device drops ([`scenario`]),
//! correlated shadowing channels ([`channel`], [`linalg`]), threshold
//! connectivity ([`connectivity`]), max-flow and LP routing ([`flow`],
//! [`simplex`], [`routing`]), localization metrics ([`privacy`]) and the
//! Monte Carlo studies built on top of them ([`experiments`]).

pub mod channel;
pub mod cli;
pub mod connectivity;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod linalg;
pub mod privacy;
pub mod routing;
pub mod scenario;
pub mod simplex;

pub use error::{Error, Result};
