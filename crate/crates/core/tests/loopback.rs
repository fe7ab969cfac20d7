//! Full-stack loopback without the channel simulator: a request is encoded,
//! modulated into an ideal one-sample-per-chip trace, detected, decoded and
//! turned into a device action.

use dpass_core::coordinator::{decide_action, DeviceProfile, SpectrumAction};
use dpass_core::detector::{Detector, DetectorConfig};
use dpass_core::modem::{modulate, packet_airtime_us, TxConfig};
use dpass_core::protocol::{encode_packet, quantize_request, SpectrumRequest};

#[test]
fn request_to_action_over_an_ideal_link() {
    let request = SpectrumRequest {
        duration_min: 50,
        center_freq_mhz: 5890,
        bandwidth_mhz: 10,
    };
    let fields = quantize_request(&request).unwrap();
    let seq = encode_packet(&request).unwrap();

    // finite off power so the receiver sees a real (if noiseless) trace
    let tx = TxConfig {
        chip_duration_us: 5_000,
        on_power_db: -70.0,
        off_power_db: -90.0,
    };
    let trace = modulate(&seq, &tx).unwrap();
    assert_eq!(
        trace.samples().last().unwrap().t_us + tx.chip_duration_us,
        packet_airtime_us(&tx).unwrap()
    );

    let mut det = Detector::new(DetectorConfig::default()).unwrap();
    let mut decoded = Vec::new();
    let mut events = 0;
    for v in trace.values() {
        let d = det.push_sample(v);
        events += d.event.is_some() as usize;
        decoded.extend(d.packet);
    }
    let d = det.flush();
    events += d.event.is_some() as usize;
    decoded.extend(d.packet);

    assert_eq!(events, 8, "one event per symbol");
    assert_eq!(decoded, vec![fields]);
    assert_eq!(decoded[0].duration_min(), 60, "duration rounds up");
    assert_eq!(format!("{}", decoded[0]), "DPASS{dur=60min,center=5890MHz,bw=10MHz}");

    let profile = DeviceProfile {
        current_center_mhz: 5885,
        channel_bw_mhz: 20,
        alternate_channels_mhz: vec![5180],
        can_sleep: false,
        device_kind: "wifi-ap".into(),
    };
    assert_eq!(
        decide_action(&decoded[0], &profile),
        SpectrumAction::SwitchChannel { target_mhz: 5180 }
    );
}
