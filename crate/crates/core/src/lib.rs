//! Fabrication planning and verification for preformed vine robots with
//! discrete bends.
//!
//! A desired fully-everted shape is described as a DH chain
//! ([`geometry::DHChain`]). [`fabrication`] compiles it into fold distances,
//! cylinder lengths and circumferential offsets on the uninflated tube,
//! [`growth`] predicts the tip pose and body clearance while the robot
//! everts, [`measurement`] recovers realized DH parameters from optical
//! marker logs, and [`stats`] provides the hypothesis tests used to compare
//! fabrication methods.

pub mod cli;
pub mod fabrication;
pub mod geometry;
pub mod growth;
pub mod measurement;
pub mod stats;
