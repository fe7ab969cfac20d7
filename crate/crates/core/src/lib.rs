//! Spectrum-coordination beacon over raw channel power.
//!
//! A transmitter announces spectrum reservations by on-off keying m-sequence
//! symbols onto the channel; any receiver that can sample RSSI at the chip
//! rate can decode the announcement without demodulating a foreign PHY.
//!
//! The crate is organized bottom-up:
//!
//! * [`pn`] - the 63-chip m-sequence alphabet and correlation primitives
//! * [`protocol`] - symbol table, packet encoding and decoding
//! * [`modem`] - OOK modulation of a symbol sequence into a power trace
//! * [`trace`] - timestamped power traces shared by modem, channel and detector
//! * [`detector`] - streaming correlation detector and packet assembler
//! * [`channel`] - trace synthesis under noise, interference and deafness,
//!   plus a Monte-Carlo detection harness
//! * [`coordinator`] - what a device should do about a decoded reservation

pub mod channel;
pub mod coordinator;
pub mod detector;
mod error;
pub mod modem;
pub mod pn;
pub mod protocol;
pub mod trace;

pub use error::{Error, Result};
