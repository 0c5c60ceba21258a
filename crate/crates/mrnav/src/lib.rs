//! Closed-loop simulator for MRI-gradient propulsion of a ferromagnetic
//! microsphere along a vessel centerline.
//!
//! The pipeline: a waypoint CSV becomes a monotone cubic path spline
//! ([`path`]), a clearance corridor is fitted around it ([`vfix`]), blood
//! flow and drag act on the sphere ([`hemo`]), a PID-plus-feedforward
//! regulator converts tracking error into 3-axis gradient commands
//! ([`control`]), the two-clock loop integrates the dynamics ([`sim`]),
//! the emitted waveform is audited against scanner limits ([`safety`]),
//! and the results land on disk ([`export`]). [`config`] holds the TOML
//! schema that wires it all together.

pub mod config;
pub mod control;
pub mod error;
pub mod export;
pub mod hemo;
pub mod path;
pub mod safety;
pub mod sim;
pub mod vfix;

pub use error::{Error, Result};
