//! Timestamped channel-power traces.
//!
//! The same shape serves both directions: a transmit-side power envelope and
//! a receive-side RSSI recording. Timestamps are microseconds and strictly
//! increasing; values are dB (dBm in practice, but nothing here depends on
//! the reference).

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct TraceSample {
    pub t_us: u64,
    pub rssi_db: f64,
}

/// A power-over-time recording with strictly increasing timestamps.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct PowerTrace {
    samples: Vec<TraceSample>,
}

/// Receive-side alias: the same data seen as an RSSI recording.
pub type RssiTrace = PowerTrace;

impl PowerTrace {
    pub fn new() -> Self {
        PowerTrace::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        PowerTrace {
            samples: Vec::with_capacity(n),
        }
    }

    pub fn from_samples(samples: Vec<TraceSample>) -> Result<Self> {
        for i in 1..samples.len() {
            if samples[i].t_us <= samples[i - 1].t_us {
                return Err(Error::NonMonotonicTrace { index: i });
            }
        }
        Ok(PowerTrace { samples })
    }

    pub fn push(&mut self, t_us: u64, rssi_db: f64) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if t_us <= last.t_us {
                return Err(Error::NonMonotonicTrace {
                    index: self.samples.len(),
                });
            }
        }
        self.samples.push(TraceSample { t_us, rssi_db });
        Ok(())
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Power values in time order, without timestamps.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.rssi_db)
    }
}
