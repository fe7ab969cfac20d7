//! Flat key-value files for scenarios and device profiles.
//!
//! Format: one `key = value` per line, `#` comments, blank lines ignored.
//! Repeated elements use zero-based dotted indices (`packet.0.start_sample`).
//! Unknown or leftover keys are errors, so a typo never silently becomes a
//! default.

use std::collections::BTreeMap;
use std::str::FromStr;

use dpass_core::channel::{ChannelScenario, DeafPeriod, InterfererModel, ScheduledPacket};
use dpass_core::coordinator::DeviceProfile;
use dpass_core::detector::DetectorConfig;
use dpass_core::protocol::PacketFields;

#[derive(Debug)]
pub struct ScenarioFile {
    pub scenario: ChannelScenario,
    /// Required by `synth`, ignored elsewhere.
    pub trace_len_samples: Option<usize>,
    pub detector: DetectorConfig,
    pub mc: Option<McSection>,
}

/// The `mc.*` section: what to transmit in a Monte-Carlo run and how.
#[derive(Debug)]
pub struct McSection {
    pub packet: PacketFields,
    pub rx_power_db: f64,
    pub gap_range_samples: (usize, usize),
    pub deaf_duty_cycle: f64,
    pub deaf_burst_len_samples: usize,
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }
    Ok(map)
}

fn take<T: FromStr>(map: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>, String> {
    match map.remove(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| format!("key `{key}`: cannot parse `{raw}`")),
    }
}

fn require<T: FromStr>(map: &mut BTreeMap<String, String>, key: &str) -> Result<T, String> {
    take(map, key)?.ok_or_else(|| format!("missing key `{key}`"))
}

fn reject_leftovers(map: &BTreeMap<String, String>, what: &str) -> Result<(), String> {
    match map.keys().next() {
        None => Ok(()),
        Some(k) => Err(format!("unknown {what} key `{k}`")),
    }
}

/// Pulls `prefix.N.field` keys out of `map`, grouped by index. Indices must
/// be contiguous from zero.
fn take_indexed(
    map: &mut BTreeMap<String, String>,
    prefix: &str,
) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut groups: BTreeMap<usize, BTreeMap<String, String>> = BTreeMap::new();
    let keys: Vec<String> = map
        .keys()
        .filter(|k| k.starts_with(prefix) && k[prefix.len()..].starts_with('.'))
        .cloned()
        .collect();
    for key in keys {
        let rest = &key[prefix.len() + 1..];
        let (idx, field) = rest
            .split_once('.')
            .ok_or_else(|| format!("key `{key}`: expected `{prefix}.<index>.<field>`"))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| format!("key `{key}`: bad index `{idx}`"))?;
        let value = map.remove(&key).unwrap();
        groups.entry(idx).or_default().insert(field.to_string(), value);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (i, (idx, group)) in groups.into_iter().enumerate() {
        if idx != i {
            return Err(format!("`{prefix}` indices must be contiguous from 0, found {idx}"));
        }
        out.push(group);
    }
    Ok(out)
}

/// Pulls `prefix.field` keys out of `map`, stripping the prefix.
fn take_section(map: &mut BTreeMap<String, String>, prefix: &str) -> BTreeMap<String, String> {
    let keys: Vec<String> = map
        .keys()
        .filter(|k| k.starts_with(prefix) && k[prefix.len()..].starts_with('.'))
        .cloned()
        .collect();
    let mut out = BTreeMap::new();
    for key in keys {
        let value = map.remove(&key).unwrap();
        out.insert(key[prefix.len() + 1..].to_string(), value);
    }
    out
}

fn packet_fields(map: &mut BTreeMap<String, String>, ctx: &str) -> Result<PacketFields, String> {
    let duration: u32 = require(map, "duration_min").map_err(|e| format!("{ctx}: {e}"))?;
    let center: u32 = require(map, "center_mhz").map_err(|e| format!("{ctx}: {e}"))?;
    let bw: u32 = require(map, "bw_mhz").map_err(|e| format!("{ctx}: {e}"))?;
    PacketFields::new(duration, center, bw).map_err(|e| format!("{ctx}: {e}"))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, String> {
    let mut kv = parse_kv(text)?;
    let mut sc = ChannelScenario::default();

    if let Some(v) = take(&mut kv, "noise_floor_db")? {
        sc.noise_floor_db = v;
    }
    if let Some(v) = take(&mut kv, "noise_spread_db")? {
        sc.noise_spread_db = v;
    }
    if let Some(v) = take(&mut kv, "sample_period_us")? {
        sc.sample_period_us = v;
    }
    if let Some(v) = take(&mut kv, "quantization_step_db")? {
        sc.quantization_step_db = v;
    }
    if let Some(v) = take(&mut kv, "jitter_chips_std")? {
        sc.jitter_chips_std = v;
    }
    if let Some(v) = take(&mut kv, "seed")? {
        sc.rng_seed = v;
    }
    let trace_len_samples = take(&mut kv, "trace_len_samples")?;

    for (i, mut group) in take_indexed(&mut kv, "packet")?.into_iter().enumerate() {
        let ctx = format!("packet.{i}");
        let fields = packet_fields(&mut group, &ctx)?;
        sc.packets.push(ScheduledPacket {
            start_sample: require(&mut group, "start_sample").map_err(|e| format!("{ctx}: {e}"))?,
            fields,
            rx_power_db: require(&mut group, "rx_power_db").map_err(|e| format!("{ctx}: {e}"))?,
        });
        reject_leftovers(&group, &ctx)?;
    }

    for (i, mut group) in take_indexed(&mut kv, "interferer")?.into_iter().enumerate() {
        let ctx = format!("interferer.{i}");
        sc.interferers.push(InterfererModel {
            power_db: require(&mut group, "power_db").map_err(|e| format!("{ctx}: {e}"))?,
            duty_cycle: require(&mut group, "duty_cycle").map_err(|e| format!("{ctx}: {e}"))?,
            burst_len_samples: require(&mut group, "burst_len_samples")
                .map_err(|e| format!("{ctx}: {e}"))?,
            defers_to_busy_channel: take(&mut group, "defers_to_busy")?.unwrap_or(true),
        });
        reject_leftovers(&group, &ctx)?;
    }

    for (i, mut group) in take_indexed(&mut kv, "deaf")?.into_iter().enumerate() {
        let ctx = format!("deaf.{i}");
        sc.deaf_periods.push(DeafPeriod {
            start_sample: require(&mut group, "start_sample").map_err(|e| format!("{ctx}: {e}"))?,
            len_samples: require(&mut group, "len_samples").map_err(|e| format!("{ctx}: {e}"))?,
        });
        reject_leftovers(&group, &ctx)?;
    }

    let mut det = DetectorConfig::default();
    let mut dk = take_section(&mut kv, "detector");
    if let Some(v) = take(&mut dk, "threshold_k")? {
        det.threshold_k = v;
    }
    if let Some(v) = take(&mut dk, "debounce_chips")? {
        det.debounce_chips = v;
    }
    if let Some(v) = take(&mut dk, "symbol_spacing_chips")? {
        det.symbol_spacing_chips = v;
    }
    if let Some(v) = take(&mut dk, "spacing_tolerance_chips")? {
        det.spacing_tolerance_chips = v;
    }
    if let Some(v) = take(&mut dk, "assembly_timeout_chips")? {
        det.assembly_timeout_chips = v;
    }
    if let Some(v) = take(&mut dk, "min_window_std_db")? {
        det.min_window_std_db = v;
    }
    reject_leftovers(&dk, "detector")?;
    det.validate().map_err(|e| format!("detector: {e}"))?;

    let mut mk = take_section(&mut kv, "mc");
    let mc = if mk.is_empty() {
        None
    } else {
        let packet = packet_fields(&mut mk, "mc")?;
        let rx_power_db = require(&mut mk, "rx_power_db").map_err(|e| format!("mc: {e}"))?;
        let gap_min = take(&mut mk, "gap_min_samples")?.unwrap_or(400);
        let gap_max = take(&mut mk, "gap_max_samples")?.unwrap_or(1200);
        if gap_min > gap_max {
            return Err("mc: gap_min_samples exceeds gap_max_samples".into());
        }
        let section = McSection {
            packet,
            rx_power_db,
            gap_range_samples: (gap_min, gap_max),
            deaf_duty_cycle: take(&mut mk, "deaf_duty_cycle")?.unwrap_or(0.0),
            deaf_burst_len_samples: take(&mut mk, "deaf_burst_len_samples")?.unwrap_or(10),
        };
        reject_leftovers(&mk, "mc")?;
        Some(section)
    };

    reject_leftovers(&kv, "scenario")?;
    Ok(ScenarioFile {
        scenario: sc,
        trace_len_samples,
        detector: det,
        mc,
    })
}

pub fn parse_profile(text: &str) -> Result<DeviceProfile, String> {
    let mut kv = parse_kv(text)?;
    let alternates = match kv.remove("alternates_mhz") {
        None => Vec::new(),
        Some(raw) if raw.trim().is_empty() => Vec::new(),
        Some(raw) => raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| format!("alternates_mhz: cannot parse `{}`", s.trim()))
            })
            .collect::<Result<Vec<u32>, String>>()?,
    };
    let profile = DeviceProfile {
        current_center_mhz: require(&mut kv, "center_mhz")?,
        channel_bw_mhz: require(&mut kv, "bw_mhz")?,
        alternate_channels_mhz: alternates,
        can_sleep: take(&mut kv, "can_sleep")?.unwrap_or(false),
        device_kind: kv.remove("kind").unwrap_or_else(|| "device".into()),
    };
    reject_leftovers(&kv, "profile")?;
    profile.validate().map_err(|e| e.to_string())?;
    Ok(profile)
}
