//! On-off keying of a symbol sequence into a chip-rate power trace.
//!
//! One trace sample per chip: a +1 chip radiates `on_power_db`, a -1 chip
//! radiates `off_power_db` (default negative infinity, i.e. no energy; the
//! channel is what adds a noise floor). There is no gap between symbols, so a
//! packet is exactly 8 x 63 = 504 chips long.

use crate::pn::{Alphabet, SEQUENCE_LEN};
use crate::protocol::{SymbolSequence, PACKET_SYMBOLS};
use crate::trace::PowerTrace;
use crate::{Error, Result};

/// Chips per packet.
pub const PACKET_CHIPS: usize = PACKET_SYMBOLS * SEQUENCE_LEN;

#[derive(Clone, Copy, Debug)]
pub struct TxConfig {
    pub chip_duration_us: u64,
    pub on_power_db: f64,
    pub off_power_db: f64,
}

impl Default for TxConfig {
    fn default() -> Self {
        TxConfig {
            chip_duration_us: 5_000,
            on_power_db: 0.0,
            off_power_db: f64::NEG_INFINITY,
        }
    }
}

impl TxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chip_duration_us == 0 {
            return Err(Error::ZeroChipDuration);
        }
        if !(self.on_power_db > self.off_power_db) {
            return Err(Error::PowerOrdering);
        }
        Ok(())
    }
}

/// Time on air for one packet under `cfg`.
pub fn packet_airtime_us(cfg: &TxConfig) -> Result<u64> {
    cfg.validate()?;
    Ok(PACKET_CHIPS as u64 * cfg.chip_duration_us)
}

/// The 504-chip on/off pattern of a packet (true = energy on the channel).
pub fn on_off_chips(seq: &SymbolSequence) -> Vec<bool> {
    let alphabet = Alphabet::canonical();
    let mut chips = Vec::with_capacity(PACKET_CHIPS);
    for id in seq.iter() {
        chips.extend(alphabet.sequence(id).chips().iter().map(|&c| c == 1));
    }
    chips
}

/// Modulates `seq` into a power trace, one sample per chip starting at t=0.
pub fn modulate(seq: &SymbolSequence, cfg: &TxConfig) -> Result<PowerTrace> {
    cfg.validate()?;
    let mut trace = PowerTrace::with_capacity(PACKET_CHIPS);
    for (i, on) in on_off_chips(seq).into_iter().enumerate() {
        let db = if on { cfg.on_power_db } else { cfg.off_power_db };
        trace.push(i as u64 * cfg.chip_duration_us, db)?;
    }
    Ok(trace)
}
