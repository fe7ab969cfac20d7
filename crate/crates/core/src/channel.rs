//! Channel synthesis and Monte-Carlo detection runs.
//!
//! Everything combines in linear power and only the final reported sample is
//! a dB value: noise, beacon chips and interferer bursts add as energies, the
//! way an energy-detecting RSSI front end sees them.
//!
//! Noise is Gamma-distributed linear power with mean equal to the configured
//! floor. That family is what an energy detector that integrates k
//! exponential snapshots reports; the scenario parameterizes it by the
//! equivalent dB standard deviation, so `noise_spread_db = 5.57` is exactly
//! the single-snapshot exponential case and smaller spreads correspond to
//! longer integration. SNR statements stay precise: on-chip signal power
//! divided by mean noise power.
//!
//! Interferers are on/off burst processes with a target duty cycle. A
//! deferring interferer (CSMA-like) never starts a burst while a beacon
//! packet is on air, because the beacon transmitter ignores carrier sensing
//! and such traffic yields to its energy; the lost airtime is paid back
//! afterwards by a deficit counter so the long-run duty cycle still holds.
//!
//! Receiver deafness (a radio that cannot report RSSI while transmitting)
//! repeats the last reported value. Sampling jitter occasionally duplicates
//! or drops a sample. Every random choice derives from one scenario seed, so
//! a scenario synthesizes bit-identically every time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::detector::{Detector, DetectorConfig};
use crate::modem::{on_off_chips, PACKET_CHIPS};
use crate::protocol::{encode_fields, PacketFields};
use crate::trace::RssiTrace;
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dB standard deviation of single-snapshot (exponential) energy noise:
/// (10 / ln 10) * sqrt(pi^2 / 6).
pub const EXPONENTIAL_SPREAD_DB: f64 = 5.570043140052503;

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ScheduledPacket {
    pub start_sample: usize,
    pub fields: PacketFields,
    pub rx_power_db: f64,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DeafPeriod {
    pub start_sample: usize,
    pub len_samples: usize,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct InterfererModel {
    pub power_db: f64,
    /// Long-run fraction of samples covered by bursts, 0..=1.
    pub duty_cycle: f64,
    pub burst_len_samples: usize,
    /// CSMA-like: never start a burst while a beacon packet is on air.
    pub defers_to_busy_channel: bool,
}

#[derive(Clone, Debug)]
pub struct ChannelScenario {
    pub noise_floor_db: f64,
    /// Equivalent dB std of the noise; 0 means a deterministic floor.
    pub noise_spread_db: f64,
    pub sample_period_us: u64,
    pub quantization_step_db: f64,
    /// Std of accumulated sampling slip per symbol span, in chips.
    pub jitter_chips_std: f64,
    pub rng_seed: u64,
    pub packets: Vec<ScheduledPacket>,
    pub interferers: Vec<InterfererModel>,
    pub deaf_periods: Vec<DeafPeriod>,
}

impl Default for ChannelScenario {
    fn default() -> Self {
        ChannelScenario {
            noise_floor_db: -90.0,
            noise_spread_db: 0.0,
            sample_period_us: 5_000,
            quantization_step_db: 1.0,
            jitter_chips_std: 0.0,
            rng_seed: 0,
            packets: Vec::new(),
            interferers: Vec::new(),
            deaf_periods: Vec::new(),
        }
    }
}

impl ChannelScenario {
    pub fn validate(&self, len_samples: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Scenario(msg));
        if self.sample_period_us == 0 {
            return fail("sample_period_us must be positive".into());
        }
        if !(self.noise_spread_db >= 0.0) {
            return fail("noise_spread_db must be finite and non-negative".into());
        }
        if !(self.quantization_step_db >= 0.0) {
            return fail("quantization_step_db must be finite and non-negative".into());
        }
        if !(self.jitter_chips_std >= 0.0) {
            return fail("jitter_chips_std must be finite and non-negative".into());
        }
        let mut starts: Vec<usize> = self.packets.iter().map(|p| p.start_sample).collect();
        starts.sort_unstable();
        for w in starts.windows(2) {
            if w[1] < w[0] + PACKET_CHIPS {
                return fail(format!(
                    "scheduled packets at samples {} and {} overlap",
                    w[0], w[1]
                ));
            }
        }
        for p in &self.packets {
            if p.start_sample + PACKET_CHIPS > len_samples {
                return fail(format!(
                    "packet at sample {} runs past the trace end",
                    p.start_sample
                ));
            }
        }
        for d in &self.deaf_periods {
            if d.start_sample + d.len_samples > len_samples {
                return fail(format!(
                    "deaf period at sample {} runs past the trace end",
                    d.start_sample
                ));
            }
        }
        for i in &self.interferers {
            if !(0.0..=1.0).contains(&i.duty_cycle) {
                return fail(format!("interferer duty cycle {} not in [0, 1]", i.duty_cycle));
            }
            if i.burst_len_samples == 0 {
                return fail("interferer burst length must be positive".into());
            }
        }
        Ok(())
    }
}

/// Gamma shape parameter whose log has the requested dB spread.
fn gamma_shape_for_spread(spread_db: f64) -> f64 {
    let target = (spread_db * std::f64::consts::LN_10 / 10.0).powi(2);
    trigamma_inv(target)
}

/// Trigamma via the recurrence down from the asymptotic series.
fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv
        + inv2 / 2.0
        + inv2 * inv * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 - inv2 / 30.0)))
}

/// Inverse of the (strictly decreasing) trigamma on (0, inf).
fn trigamma_inv(y: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6, 1e9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if trigamma(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Burst on/off mask for one interferer. Starts only where allowed (deferral),
/// keeps the long-run duty cycle through a deficit counter.
fn burst_mask(model: &InterfererModel, packet_on_air: &[bool], rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = packet_on_air.len();
    let mut mask = vec![false; n];
    if model.duty_cycle <= 0.0 {
        return mask;
    }
    let burst = model.burst_len_samples;
    let p_start = if model.duty_cycle >= 1.0 {
        1.0
    } else {
        (model.duty_cycle / (burst as f64 * (1.0 - model.duty_cycle))).min(1.0)
    };
    let slack = (2 * burst) as f64;
    let mut remaining = 0usize;
    let mut emitted = 0f64;
    for i in 0..n {
        if remaining > 0 {
            mask[i] = true;
            emitted += 1.0;
            remaining -= 1;
            continue;
        }
        if model.defers_to_busy_channel && packet_on_air[i] {
            continue;
        }
        let target = model.duty_cycle * i as f64;
        let behind = emitted < target - slack;
        let ahead = emitted > target + slack;
        if behind || (!ahead && rng.gen::<f64>() < p_start) {
            mask[i] = true;
            emitted += 1.0;
            remaining = burst - 1;
        }
    }
    mask
}

/// Synthesizes the RSSI trace a receiver would report for `scenario`.
pub fn synthesize_trace(scenario: &ChannelScenario, len_samples: usize) -> Result<RssiTrace> {
    scenario.validate(len_samples)?;

    // beacon energy and airtime envelope
    let mut signal_lin = vec![0.0f64; len_samples];
    let mut on_air = vec![false; len_samples];
    for p in &scenario.packets {
        let lin = db_to_linear(p.rx_power_db);
        let chips = on_off_chips(&encode_fields(&p.fields));
        for (i, on) in chips.into_iter().enumerate() {
            if on {
                signal_lin[p.start_sample + i] += lin;
            }
            on_air[p.start_sample + i] = true;
        }
    }

    // independent seeded streams per randomness source, in a fixed order
    let mut master = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(master.gen());
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(master.gen());

    let mut interference_lin = vec![0.0f64; len_samples];
    for model in &scenario.interferers {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let lin = db_to_linear(model.power_db);
        for (i, on) in burst_mask(model, &on_air, &mut rng).into_iter().enumerate() {
            if on {
                interference_lin[i] += lin;
            }
        }
    }

    let floor_lin = db_to_linear(scenario.noise_floor_db);
    let gamma = if scenario.noise_spread_db > 0.0 {
        let shape = gamma_shape_for_spread(scenario.noise_spread_db);
        Some(rand_distr::Gamma::new(shape, floor_lin / shape).expect("valid gamma"))
    } else {
        None
    };

    let step = scenario.quantization_step_db;
    let mut reported: Vec<f64> = (0..len_samples)
        .map(|i| {
            let noise = match &gamma {
                Some(g) => g.sample(&mut noise_rng),
                None => floor_lin,
            };
            let db = linear_to_db(noise + signal_lin[i] + interference_lin[i]);
            if step > 0.0 {
                (db / step).round() * step
            } else {
                db
            }
        })
        .collect();

    // deafness: the radio repeats its last report while it cannot listen
    for d in &scenario.deaf_periods {
        let held = reported[d.start_sample.saturating_sub(1)];
        let from = d.start_sample.max(1);
        for v in &mut reported[from..d.start_sample + d.len_samples] {
            *v = held;
        }
    }

    // sampling jitter: occasional duplicate or dropped samples such that the
    // slip accumulated over one symbol span has the configured std
    if scenario.jitter_chips_std > 0.0 {
        let p = scenario.jitter_chips_std.powi(2) / (2.0 * PACKET_CHIPS as f64 / 8.0);
        let mut slipped = Vec::with_capacity(len_samples);
        let mut si = 0usize;
        while slipped.len() < len_samples {
            if si >= reported.len() {
                slipped.push(*reported.last().unwrap());
                continue;
            }
            let r: f64 = jitter_rng.gen();
            if r < p {
                si += 1; // drop
                continue;
            }
            slipped.push(reported[si]);
            if r < 2.0 * p {
                slipped.push(reported[si]); // duplicate
            }
            si += 1;
        }
        slipped.truncate(len_samples);
        reported = slipped;
    }

    let mut trace = RssiTrace::with_capacity(len_samples);
    for (i, v) in reported.into_iter().enumerate() {
        trace.push(i as u64 * scenario.sample_period_us, v)?;
    }
    Ok(trace)
}

/// Monte-Carlo run description: a scenario template (no scheduled packets)
/// plus the beacon to repeat and how to space repetitions.
#[derive(Clone, Debug)]
pub struct MonteCarloSpec {
    pub scenario: ChannelScenario,
    pub packet: PacketFields,
    pub rx_power_db: f64,
    /// Inclusive range of idle samples between packets.
    pub gap_range_samples: (usize, usize),
    pub detector: DetectorConfig,
    /// Fraction of time the receiver is deaf (0 disables), in bursts of
    /// `deaf_burst_len_samples`.
    pub deaf_duty_cycle: f64,
    pub deaf_burst_len_samples: usize,
}

impl MonteCarloSpec {
    pub fn new(scenario: ChannelScenario, packet: PacketFields, rx_power_db: f64) -> Self {
        MonteCarloSpec {
            scenario,
            packet,
            rx_power_db,
            gap_range_samples: (400, 1200),
            detector: DetectorConfig::default(),
            deaf_duty_cycle: 0.0,
            deaf_burst_len_samples: 10,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Default, Serialize)]
pub struct LatencyStats {
    /// Decodes contributing to the stats.
    pub count: usize,
    /// Samples from packet start to decode emission.
    pub min_samples: u64,
    pub max_samples: u64,
    pub mean_samples: f64,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct DetectionReport {
    pub tx_packets: usize,
    pub rx_packets: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub latency: LatencyStats,
}

/// Schedules `n_packets` repetitions of the configured beacon with randomized
/// gaps, synthesizes the trace, runs a fresh detector over it and scores the
/// outcome. Pure in (spec, n_packets, seed).
pub fn run_monte_carlo(spec: &MonteCarloSpec, n_packets: usize, seed: u64) -> Result<DetectionReport> {
    if !spec.scenario.packets.is_empty() {
        return Err(Error::Scenario(
            "monte-carlo template must not schedule packets".into(),
        ));
    }
    let (gap_lo, gap_hi) = spec.gap_range_samples;
    if gap_lo > gap_hi {
        return Err(Error::Scenario("empty gap range".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenario = spec.scenario.clone();
    let mut cursor = 0usize;
    for _ in 0..n_packets {
        cursor += rng.gen_range(gap_lo..=gap_hi);
        scenario.packets.push(ScheduledPacket {
            start_sample: cursor,
            fields: spec.packet,
            rx_power_db: spec.rx_power_db,
        });
        cursor += PACKET_CHIPS;
    }
    let len = cursor + gap_hi.max(256);

    if spec.deaf_duty_cycle > 0.0 {
        let burst = spec.deaf_burst_len_samples.max(1);
        let mean_gap = burst as f64 * (1.0 - spec.deaf_duty_cycle) / spec.deaf_duty_cycle;
        let exp = rand_distr::Exp::new(1.0 / mean_gap.max(1e-9)).expect("valid rate");
        let mut at = 0usize;
        loop {
            at += exp.sample(&mut rng) as usize + 1;
            if at + burst > len {
                break;
            }
            scenario.deaf_periods.push(DeafPeriod {
                start_sample: at,
                len_samples: burst,
            });
            at += burst;
        }
    }
    scenario.rng_seed = rng.gen();

    let trace = synthesize_trace(&scenario, len)?;
    let mut detector = Detector::new(spec.detector)?;
    let mut decodes: Vec<(u64, PacketFields)> = Vec::new();
    for v in trace.values() {
        if let Some(fields) = detector.push_sample(v).packet {
            decodes.push((detector.samples_accepted() - 1, fields));
        }
    }
    if let Some(fields) = detector.flush().packet {
        decodes.push((detector.samples_accepted(), fields));
    }

    let accept_until = PACKET_CHIPS as u64 + spec.detector.assembly_timeout_chips;
    let mut matched = vec![false; scenario.packets.len()];
    let mut rx = 0usize;
    let mut false_pos = 0usize;
    let mut latencies: Vec<u64> = Vec::new();
    for (at, fields) in decodes {
        let hit = scenario.packets.iter().enumerate().find(|(j, p)| {
            !matched[*j]
                && fields == p.fields
                && at >= p.start_sample as u64
                && at <= p.start_sample as u64 + accept_until
        });
        match hit {
            Some((j, p)) => {
                matched[j] = true;
                rx += 1;
                latencies.push(at - p.start_sample as u64);
            }
            None => false_pos += 1,
        }
    }

    let latency = if latencies.is_empty() {
        LatencyStats::default()
    } else {
        LatencyStats {
            count: latencies.len(),
            min_samples: *latencies.iter().min().unwrap(),
            max_samples: *latencies.iter().max().unwrap(),
            mean_samples: latencies.iter().sum::<u64>() as f64 / latencies.len() as f64,
        }
    };
    Ok(DetectionReport {
        tx_packets: n_packets,
        rx_packets: rx,
        false_positives: false_pos,
        false_negatives: n_packets - rx,
        latency,
    })
}
