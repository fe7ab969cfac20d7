//! `dpass`: encode beacon packets, synthesize channel traces, detect packets
//! in traces and run Monte-Carlo detection experiments.
//!
//! Exit codes: 0 success, 2 bad command line (including unencodable request
//! values and unopenable paths), 3 malformed input data.

mod config;
mod tracefmt;

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use dpass_core::channel::{run_monte_carlo, synthesize_trace, MonteCarloSpec};
use dpass_core::coordinator::{decide_action, DeviceProfile};
use dpass_core::detector::{Detection, Detector, DetectorConfig};
use dpass_core::modem::{packet_airtime_us, TxConfig, PACKET_CHIPS};
use dpass_core::protocol::{encode_fields, quantize_request, SpectrumRequest};
use tracefmt::{write_trace, TraceFormat, TraceReader};

#[derive(Parser)]
#[command(name = "dpass", version, about = "Spectrum beacon tools: encode, synthesize, detect, report")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a spectrum request into its 8-symbol packet
    Encode {
        /// Requested claim duration in minutes (rounded up to the grid)
        #[arg(long)]
        duration: u32,
        /// Center frequency in MHz, 0..=9999
        #[arg(long)]
        center: u32,
        /// Requested bandwidth in MHz (rounded up to the grid)
        #[arg(long)]
        bw: u32,
        /// Emit one JSON object instead of human-readable lines
        #[arg(long)]
        json: bool,
    },
    /// Synthesize the RSSI trace a scenario file describes
    Synth {
        #[arg(long)]
        scenario: PathBuf,
        /// Output path, `-` for stdout
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: TraceFormat,
    },
    /// Stream a trace through the detector, emitting JSON lines
    Detect {
        /// Trace path; `-` or absent reads stdin
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Device profile; adds an action line per decoded packet
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: TraceFormat,
    },
    /// Monte-Carlo detection run over a scenario template with an mc section
    Mc {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of beacon packets to schedule
        #[arg(long)]
        packets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CmdError {
    Usage(String),
    Input(String),
}

impl CmdError {
    fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Input(m) => m,
        }
    }

    fn code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Input(_) => 3,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DPASS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.cmd {
        Cmd::Encode {
            duration,
            center,
            bw,
            json,
        } => cmd_encode(duration, center, bw, json),
        Cmd::Synth {
            scenario,
            out,
            seed,
            format,
        } => cmd_synth(&scenario, &out, seed, format),
        Cmd::Detect {
            trace,
            profile,
            format,
        } => cmd_detect(trace.as_deref(), profile.as_deref(), format),
        Cmd::Mc {
            scenario,
            packets,
            seed,
        } => cmd_mc(&scenario, packets, seed),
    }
}

fn read_file(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn cmd_encode(duration: u32, center: u32, bw: u32, as_json: bool) -> Result<(), CmdError> {
    let fields = quantize_request(&SpectrumRequest {
        duration_min: duration,
        center_freq_mhz: center,
        bandwidth_mhz: bw,
    })
    .map_err(|e| CmdError::Usage(e.to_string()))?;
    let symbols: Vec<String> = encode_fields(&fields).iter().map(|s| s.to_string()).collect();
    let airtime_us = packet_airtime_us(&TxConfig::default()).expect("default tx config");
    if as_json {
        println!(
            "{}",
            json!({
                "text": fields.to_string(),
                "duration_min": fields.duration_min(),
                "center_freq_mhz": fields.center_freq_mhz(),
                "bandwidth_mhz": fields.bandwidth_mhz(),
                "symbols": symbols,
                "airtime_us": airtime_us,
            })
        );
    } else {
        println!("{fields}");
        println!("symbols: {}", symbols.join(" "));
        println!("airtime: {airtime_us} us ({PACKET_CHIPS} chips)");
    }
    Ok(())
}

fn cmd_synth(
    scenario_path: &Path,
    out_path: &Path,
    seed: Option<u64>,
    format: TraceFormat,
) -> Result<(), CmdError> {
    let file = config::parse_scenario(&read_file(scenario_path)?).map_err(CmdError::Input)?;
    let mut scenario = file.scenario;
    if let Some(seed) = seed {
        scenario.rng_seed = seed;
    }
    let len = file.trace_len_samples.ok_or_else(|| {
        CmdError::Input("scenario is missing trace_len_samples (required by synth)".into())
    })?;
    let trace = synthesize_trace(&scenario, len).map_err(|e| CmdError::Input(e.to_string()))?;

    let sink: Box<dyn Write> = if out_path.as_os_str() == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(fs::File::create(out_path).map_err(|e| {
            CmdError::Usage(format!("cannot create {}: {e}", out_path.display()))
        })?)
    };
    write_trace(BufWriter::new(sink), &trace, format)
        .map_err(|e| CmdError::Input(format!("writing trace: {e}")))?;
    log::info!("wrote {} samples", trace.len());
    Ok(())
}

fn emit_detection<W: Write>(
    out: &mut W,
    timestamps: &[u64],
    profile: Option<&DeviceProfile>,
    detection: &Detection,
) -> io::Result<()> {
    let t_of = |idx: u64| timestamps[(idx as usize).min(timestamps.len() - 1)];
    if let Some(ev) = detection.event {
        writeln!(
            out,
            "{}",
            json!({
                "type": "symbol",
                "t_us": t_of(ev.sample_index),
                "sample_index": ev.sample_index,
                "symbol": ev.symbol.to_string(),
                "score": ev.score,
            })
        )?;
    }
    if let Some(packet) = detection.packet {
        let idx = detection.event.map(|e| e.sample_index).unwrap_or(0);
        writeln!(
            out,
            "{}",
            json!({
                "type": "packet",
                "t_us": t_of(idx),
                "text": packet.to_string(),
                "duration_min": packet.duration_min(),
                "center_freq_mhz": packet.center_freq_mhz(),
                "bandwidth_mhz": packet.bandwidth_mhz(),
            })
        )?;
        if let Some(profile) = profile {
            let mut line = serde_json::to_value(decide_action(&packet, profile)).unwrap();
            let obj = line.as_object_mut().unwrap();
            obj.insert("type".into(), "action".into());
            obj.insert("packet".into(), packet.to_string().into());
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

fn cmd_detect(
    trace_path: Option<&Path>,
    profile_path: Option<&Path>,
    format: TraceFormat,
) -> Result<(), CmdError> {
    let profile = profile_path
        .map(|p| config::parse_profile(&read_file(p)?).map_err(CmdError::Input))
        .transpose()?;

    let stdin = io::stdin();
    let source: Box<dyn BufRead> = match trace_path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufReader::new(fs::File::open(p).map_err(
            |e| CmdError::Usage(format!("cannot open {}: {e}", p.display())),
        )?)),
        _ => Box::new(stdin.lock()),
    };
    let mut reader = TraceReader::new(source, format);
    let mut detector = Detector::new(DetectorConfig::default()).expect("default config");
    let mut timestamps: Vec<u64> = Vec::new();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    let io_err = |e: io::Error| CmdError::Input(format!("reading trace: {e}"));
    while let Some((t, v)) = reader.next_sample().map_err(io_err)? {
        timestamps.push(t);
        let d = detector.push_sample(v);
        if !d.is_empty() {
            emit_detection(&mut out, &timestamps, profile.as_ref(), &d)
                .map_err(|e| CmdError::Input(format!("writing output: {e}")))?;
        }
    }
    let d = detector.flush();
    if !d.is_empty() {
        emit_detection(&mut out, &timestamps, profile.as_ref(), &d)
            .map_err(|e| CmdError::Input(format!("writing output: {e}")))?;
    }
    out.flush()
        .map_err(|e| CmdError::Input(format!("writing output: {e}")))?;

    if reader.malformed() * 100 > reader.records() {
        return Err(CmdError::Input(format!(
            "{} of {} trace records malformed",
            reader.malformed(),
            reader.records()
        )));
    }
    Ok(())
}

fn cmd_mc(scenario_path: &Path, packets: usize, seed: u64) -> Result<(), CmdError> {
    let file = config::parse_scenario(&read_file(scenario_path)?).map_err(CmdError::Input)?;
    let mc = file.mc.ok_or_else(|| {
        CmdError::Input("scenario has no mc.* section (required by mc)".into())
    })?;
    let spec = MonteCarloSpec {
        scenario: file.scenario,
        packet: mc.packet,
        rx_power_db: mc.rx_power_db,
        gap_range_samples: mc.gap_range_samples,
        detector: file.detector,
        deaf_duty_cycle: mc.deaf_duty_cycle,
        deaf_burst_len_samples: mc.deaf_burst_len_samples,
    };
    let report =
        run_monte_carlo(&spec, packets, seed).map_err(|e| CmdError::Input(e.to_string()))?;
    println!("{}", serde_json::to_string(&report).unwrap());
    Ok(())
}
