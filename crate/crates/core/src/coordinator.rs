//! Reaction policy for decoded beacons.
//!
//! A device that hears a beacon knows the announced band and how long it
//! stays claimed. The policy here is deliberately small: leave the band if
//! the device has somewhere to go, otherwise sleep out the claim if the
//! duty-cycle budget allows it, otherwise keep operating and say so.
//!
//! Decisions are per packet and stateless. A sleeping device that decodes a
//! further overlapping claim gets a fresh Sleep measured from that moment,
//! so its wake deadline extends to the later claim automatically.

use serde::Serialize;

use crate::protocol::PacketFields;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DeviceProfile {
    pub current_center_mhz: u32,
    pub channel_bw_mhz: u32,
    /// Candidate centers to retune to, in preference order.
    pub alternate_channels_mhz: Vec<u32>,
    pub can_sleep: bool,
    /// Free-form label for logs and reports.
    pub device_kind: String,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<()> {
        if self.channel_bw_mhz == 0 {
            return Err(Error::Scenario("device bandwidth must be positive".into()));
        }
        if self
            .alternate_channels_mhz
            .contains(&self.current_center_mhz)
        {
            return Err(Error::AlternateIsCurrent);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum SpectrumAction {
    SwitchChannel { target_mhz: u32 },
    Sleep { duration_min: u32 },
    /// `warning` marks the cornered case: the claimed band overlaps ours and
    /// no alternate or sleep budget exists.
    NoAction { warning: bool },
}

/// Half-open band occupancy test on integer half-MHz edges, so a 10 MHz
/// channel at 5890 spans [5885.0, 5895.0) without any float comparison.
pub fn overlaps(center_a_mhz: u32, bw_a_mhz: u32, center_b_mhz: u32, bw_b_mhz: u32) -> bool {
    let edges = |c: u32, bw: u32| {
        let c2 = 2 * c as i64;
        (c2 - bw as i64, c2 + bw as i64)
    };
    let (a_lo, a_hi) = edges(center_a_mhz, bw_a_mhz);
    let (b_lo, b_hi) = edges(center_b_mhz, bw_b_mhz);
    a_lo < b_hi && b_lo < a_hi
}

/// Picks the device's response to a decoded claim.
pub fn decide_action(claim: &PacketFields, profile: &DeviceProfile) -> SpectrumAction {
    if !overlaps(
        claim.center_freq_mhz(),
        claim.bandwidth_mhz(),
        profile.current_center_mhz,
        profile.channel_bw_mhz,
    ) {
        return SpectrumAction::NoAction { warning: false };
    }
    let clear = profile.alternate_channels_mhz.iter().copied().find(|&alt| {
        !overlaps(
            claim.center_freq_mhz(),
            claim.bandwidth_mhz(),
            alt,
            profile.channel_bw_mhz,
        )
    });
    if let Some(target_mhz) = clear {
        return SpectrumAction::SwitchChannel { target_mhz };
    }
    if profile.can_sleep {
        return SpectrumAction::Sleep {
            duration_min: claim.duration_min(),
        };
    }
    log::warn!(
        "{} is cornered: claim {} overlaps its channel and it has no way out",
        profile.device_kind,
        claim
    );
    SpectrumAction::NoAction { warning: true }
}
