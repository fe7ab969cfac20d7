//! End-to-end acceptance gate. One test per criterion; each prints a single
//! PASS line with its measured numbers (visible with `--nocapture`).

use std::time::Instant;

use dpass_core::channel::{
    run_monte_carlo, synthesize_trace, ChannelScenario, InterfererModel, MonteCarloSpec,
    ScheduledPacket, EXPONENTIAL_SPREAD_DB,
};
use dpass_core::coordinator::{decide_action, overlaps, DeviceProfile, SpectrumAction};
use dpass_core::detector::{Detector, DetectorConfig};
use dpass_core::pn::{
    circular_cross_correlation, generate_m_sequence, lfsr_period, Alphabet, CANONICAL_SEED,
    PRIMITIVE_TAPS, SEQUENCE_LEN,
};
use dpass_core::protocol::{
    decode_symbols, encode_fields, encode_packet, PacketFields, SpectrumRequest, BANDWIDTHS_MHZ,
    DURATIONS_MIN, MAX_CENTER_MHZ,
};
use dpass_core::trace::PowerTrace;

fn beacon() -> PacketFields {
    PacketFields::new(60, 5890, 10).unwrap()
}

fn quiet_spec() -> MonteCarloSpec {
    // signal 20 dB above the mean noise floor, exponential energy noise,
    // 1 dB reporting quantization
    MonteCarloSpec::new(
        ChannelScenario {
            noise_floor_db: -90.0,
            noise_spread_db: EXPONENTIAL_SPREAD_DB,
            quantization_step_db: 1.0,
            ..ChannelScenario::default()
        },
        beacon(),
        -70.0,
    )
}

#[test]
fn criterion_1_alphabet_properties() {
    let t0 = Instant::now();

    let found: Vec<u8> = (1u8..0x40)
        .filter(|&taps| lfsr_period(taps, CANONICAL_SEED) == Some(SEQUENCE_LEN as u32))
        .collect();
    assert_eq!(found, PRIMITIVE_TAPS.to_vec(), "primitive polynomial set");

    let alphabet = Alphabet::canonical();
    let mut checked = 0;
    for (id, seq) in alphabet.entries() {
        let auto = circular_cross_correlation(seq, seq);
        assert_eq!(auto[0], SEQUENCE_LEN as i32, "{id} autocorrelation peak");
        for (lag, &v) in auto.iter().enumerate().skip(1) {
            assert_eq!(v, -1, "{id} autocorrelation at lag {lag}");
        }
        assert_eq!(seq.balance().abs(), 1, "{id} balance");
        checked += 1;
    }
    assert_eq!(checked, 12);
    for &taps in &PRIMITIVE_TAPS {
        generate_m_sequence(taps, CANONICAL_SEED).unwrap();
    }

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    println!(
        "criterion 1: PASS: 6 primitive polynomials, 12 sequences two-valued, balance ±1 ({dt:?})"
    );
}

#[test]
fn criterion_2_protocol_round_trip() {
    let t0 = Instant::now();

    let mut cases = 0;
    for &dur in &DURATIONS_MIN {
        for &bw in &BANDWIDTHS_MHZ {
            for k in 0..200u32 {
                let center = k * MAX_CENTER_MHZ / 199;
                let fields = PacketFields::new(dur, center, bw).unwrap();
                let decoded = decode_symbols(encode_fields(&fields).symbols()).unwrap();
                assert_eq!(decoded, fields);
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 11 * 7 * 200);

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}");
    println!("criterion 2: PASS: {cases} exact encode/decode round trips ({dt:?})");
}

#[test]
fn criterion_3_quiet_channel_monte_carlo() {
    let t0 = Instant::now();

    let report = run_monte_carlo(&quiet_spec(), 104, 104).unwrap();
    assert_eq!(report.tx_packets, 104);
    assert_eq!(report.rx_packets, 104, "{report:?}");
    assert_eq!(report.false_negatives, 0, "{report:?}");
    assert!(report.false_positives <= 1, "{report:?}");

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!(
        "criterion 3: PASS: tx=104 rx={} fp={} fn={} at 20 dB SNR ({dt:?})",
        report.rx_packets, report.false_positives, report.false_negatives
    );
}

#[test]
fn criterion_4_interference_robustness() {
    let t0 = Instant::now();

    let mut spec = quiet_spec();
    spec.scenario.interferers.push(InterfererModel {
        power_db: -70.0, // as strong as the beacon itself
        duty_cycle: 0.5,
        burst_len_samples: 4,
        defers_to_busy_channel: true,
    });
    let report = run_monte_carlo(&spec, 150, 150).unwrap();
    assert_eq!(report.tx_packets, 150);
    assert!(report.rx_packets >= 148, "{report:?}");

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}");
    println!(
        "criterion 4: PASS: rx={}/150 under a 50% duty equal-power interferer ({dt:?})",
        report.rx_packets
    );
}

#[test]
fn criterion_5_deafness_impact() {
    let t0 = Instant::now();

    let n = 500;
    let hearing = run_monte_carlo(&quiet_spec(), n, 500).unwrap();
    let mut spec = quiet_spec();
    spec.deaf_duty_cycle = 0.01;
    spec.deaf_burst_len_samples = 10;
    let deaf = run_monte_carlo(&spec, n, 500).unwrap();

    let drop = (hearing.rx_packets as f64 - deaf.rx_packets as f64) / n as f64;
    assert!(drop < 0.02, "hearing {hearing:?} deaf {deaf:?}");

    let dt = t0.elapsed();
    println!(
        "criterion 5: PASS: 1% duty deafness dropped {:.2}% absolute over {n} packets ({dt:?})",
        drop * 100.0
    );
}

#[test]
fn criterion_6_linear_time_budget() {
    let len = 720_000usize; // one simulated hour at 5 ms per sample
    let mut scenario = ChannelScenario {
        noise_spread_db: EXPONENTIAL_SPREAD_DB,
        rng_seed: 6,
        ..ChannelScenario::default()
    };
    for i in 0..40 {
        scenario.packets.push(ScheduledPacket {
            start_sample: 10_000 + i * 17_000,
            fields: beacon(),
            rx_power_db: -70.0,
        });
    }
    let trace = synthesize_trace(&scenario, len).unwrap();

    let mut det = Detector::new(DetectorConfig::default()).unwrap();
    let mut packets = 0usize;
    let mut ops_marks = [0u64; 3]; // after 10k, after len-10k, after len
    let t0 = Instant::now();
    for (i, v) in trace.values().enumerate() {
        if det.push_sample(v).packet.is_some() {
            packets += 1;
        }
        match i + 1 {
            10_000 => ops_marks[0] = det.ops(),
            710_000 => ops_marks[1] = det.ops(),
            720_000 => ops_marks[2] = det.ops(),
            _ => {}
        }
    }
    let dt = t0.elapsed();

    assert_eq!(packets, 40, "every scheduled packet decodes");
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}");
    let first = ops_marks[0] as f64 / 10_000.0;
    let last = (ops_marks[2] - ops_marks[1]) as f64 / 10_000.0;
    let ratio = (first - last).abs() / last;
    assert!(ratio < 0.05, "per-sample ops drifted {ratio:.4} (first {first}, last {last})");
    println!(
        "criterion 6: PASS: 720k samples in {dt:?}, per-sample ops {first:.1} -> {last:.1} ({:.2}% drift)",
        ratio * 100.0
    );
}

#[test]
fn criterion_7_offset_invariance() {
    let t0 = Instant::now();

    let beacons = [beacon(), PacketFields::new(120, 2412, 80).unwrap()];
    let mut scenario = ChannelScenario {
        noise_spread_db: EXPONENTIAL_SPREAD_DB,
        rng_seed: 7,
        ..ChannelScenario::default()
    };
    for i in 0..20 {
        scenario.packets.push(ScheduledPacket {
            start_sample: 600 + i * 1_300,
            fields: beacons[i % 2],
            rx_power_db: -70.0,
        });
    }
    let trace = synthesize_trace(&scenario, 27_000).unwrap();
    let mut shifted = PowerTrace::with_capacity(trace.len());
    for s in trace.samples() {
        shifted.push(s.t_us, s.rssi_db + 17.0).unwrap();
    }

    let decode_all = |trace: &PowerTrace| {
        let mut det = Detector::new(DetectorConfig::default()).unwrap();
        let mut out: Vec<(u64, PacketFields)> = Vec::new();
        for v in trace.values() {
            if let Some(p) = det.push_sample(v).packet {
                out.push((det.samples_accepted() - 1, p));
            }
        }
        if let Some(p) = det.flush().packet {
            out.push((det.samples_accepted(), p));
        }
        out
    };
    let base = decode_all(&trace);
    let offset = decode_all(&shifted);
    assert_eq!(base.len(), 20, "all packets decode");
    assert_eq!(base, offset, "packet streams must match exactly");

    let dt = t0.elapsed();
    println!(
        "criterion 7: PASS: +17 dB left all {} decodes identical ({dt:?})",
        base.len()
    );
}

#[test]
fn criterion_8_action_semantics() {
    let t0 = Instant::now();

    // the worked request quantizes up to 60 min and travels the full pipeline
    let seq = encode_packet(&SpectrumRequest {
        duration_min: 50,
        center_freq_mhz: 5890,
        bandwidth_mhz: 10,
    })
    .unwrap();
    let claim = decode_symbols(seq.symbols()).unwrap();
    assert_eq!(claim, beacon());

    let wifi = DeviceProfile {
        current_center_mhz: 5885,
        channel_bw_mhz: 20,
        alternate_channels_mhz: vec![5180, 5500],
        can_sleep: false,
        device_kind: "wifi-ap".into(),
    };
    wifi.validate().unwrap();
    match decide_action(&claim, &wifi) {
        SpectrumAction::SwitchChannel { target_mhz } => {
            assert_eq!(target_mhz, 5180);
            assert!(!overlaps(
                claim.center_freq_mhz(),
                claim.bandwidth_mhz(),
                target_mhz,
                wifi.channel_bw_mhz
            ));
        }
        other => panic!("wifi profile must switch, got {other:?}"),
    }

    let lora = DeviceProfile {
        current_center_mhz: 5890,
        channel_bw_mhz: 1,
        alternate_channels_mhz: vec![],
        can_sleep: true,
        device_kind: "lora-node".into(),
    };
    lora.validate().unwrap();
    assert_eq!(
        decide_action(&claim, &lora),
        SpectrumAction::Sleep { duration_min: 60 }
    );

    let dt = t0.elapsed();
    println!("criterion 8: PASS: wifi switches to a clear alternate, lora sleeps 60 min ({dt:?})");
}
