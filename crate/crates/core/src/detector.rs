//! Streaming symbol detection from raw RSSI samples.
//!
//! Each incoming sample lands in a 63-sample ring buffer. Once the buffer is
//! full, every push mean-normalizes the window, correlates it against all
//! twelve alphabet sequences, and compares the best score against a threshold
//! that floats on the window's own standard deviation. That makes detection
//! invariant to constant power offsets and to the absolute noise level: a
//! window must *look like* a symbol, not merely be loud.
//!
//! Scores near a real symbol boundary can briefly exceed the threshold at the
//! wrong alignment (partial overlap of two adjacent symbols correlates with
//! some third sequence). Candidates therefore go through a local-maximum
//! hold: a candidate is only emitted once `debounce_chips` samples pass with
//! no better candidate, and any stronger candidate inside that hold replaces
//! it. With a hold of half a symbol, every such misaligned candidate sits
//! within the hold of a true peak whose score dominates, so it is absorbed.
//!
//! Emitted events feed a grammar assembler: eight events, preamble first,
//! consecutive events one symbol apart within tolerance, all inside a
//! timeout. Anything else silently discards the partial packet (the violating
//! event may itself start a new one).
//!
//! Work per sample is constant: one window copy, one normalization pass and
//! six 63-chip dot products (the other six scores are negations, since the
//! inverted sequences are chip-wise negations). Total cost is linear in trace
//! length; the `ops` counter exposes that for tests.

use serde::Serialize;

use crate::pn::{Alphabet, SymbolId, ALPHABET_SIZE, SEQUENCE_LEN};
use crate::protocol::{decode_symbols, preamble, PacketFields, PACKET_SYMBOLS};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct DetectorConfig {
    /// Correlation window length; must equal the sequence length (63).
    pub window_len_chips: usize,
    /// Threshold in units of window std times sqrt(window length).
    pub threshold_k: f64,
    /// Local-maximum hold: a candidate is emitted only after this many
    /// samples pass without a better one.
    pub debounce_chips: u64,
    /// Nominal distance between consecutive symbol peaks.
    pub symbol_spacing_chips: u64,
    /// Allowed deviation from the nominal spacing.
    pub spacing_tolerance_chips: u64,
    /// Partial packets older than this are discarded.
    pub assembly_timeout_chips: u64,
    /// Windows with std below this produce no events (flat-input guard).
    pub min_window_std_db: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window_len_chips: SEQUENCE_LEN,
            threshold_k: 4.5,
            debounce_chips: 32,
            symbol_spacing_chips: SEQUENCE_LEN as u64,
            spacing_tolerance_chips: 2,
            assembly_timeout_chips: 10 * SEQUENCE_LEN as u64,
            min_window_std_db: 0.01,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::DetectorConfig(msg.to_string()));
        if self.window_len_chips != SEQUENCE_LEN {
            return fail("window_len_chips must be 63, the alphabet sequence length");
        }
        if !(self.threshold_k > 0.0) {
            return fail("threshold_k must be positive");
        }
        if self.debounce_chips == 0 {
            return fail("debounce_chips must be positive");
        }
        if self.symbol_spacing_chips == 0 {
            return fail("symbol_spacing_chips must be positive");
        }
        if self.spacing_tolerance_chips >= self.symbol_spacing_chips {
            return fail("spacing_tolerance_chips must be smaller than symbol_spacing_chips");
        }
        if self.assembly_timeout_chips <= self.symbol_spacing_chips {
            return fail("assembly_timeout_chips must exceed symbol_spacing_chips");
        }
        if !(self.min_window_std_db > 0.0) {
            return fail("min_window_std_db must be positive");
        }
        Ok(())
    }
}

/// A detected symbol: which one, where, and how strongly it correlated.
///
/// `sample_index` counts accepted (finite) samples from detector creation and
/// names the sample that completed the best-aligned window.
#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct SymbolEvent {
    pub symbol: SymbolId,
    pub sample_index: u64,
    pub score: f64,
}

/// What one pushed sample produced. A packet always rides on the event that
/// completed it, so both fields can be set at once.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Detection {
    pub event: Option<SymbolEvent>,
    pub packet: Option<PacketFields>,
}

impl Detection {
    pub fn is_empty(&self) -> bool {
        self.event.is_none() && self.packet.is_none()
    }
}

/// Subtracts the window mean from every sample.
pub fn mean_normalize(window: &[f64; SEQUENCE_LEN]) -> [f64; SEQUENCE_LEN] {
    let mean = window.iter().sum::<f64>() / SEQUENCE_LEN as f64;
    let mut out = *window;
    for v in &mut out {
        *v -= mean;
    }
    out
}

/// Correlation score of a normalized window against every alphabet sequence,
/// indexed by symbol rank. Ranks 6..=11 are the negations of ranks 0..=5
/// because inverted sequences are chip-wise negations.
pub fn correlate_all(
    normalized: &[f64; SEQUENCE_LEN],
    alphabet: &Alphabet,
) -> [f64; ALPHABET_SIZE] {
    let mut scores = [0.0f64; ALPHABET_SIZE];
    for rank in 0..ALPHABET_SIZE / 2 {
        let id = SymbolId::from_rank(rank).unwrap();
        let chips = alphabet.sequence(id).chips();
        let mut dot = 0.0;
        for j in 0..SEQUENCE_LEN {
            dot += normalized[j] * chips[j] as f64;
        }
        scores[rank] = dot;
        scores[rank + ALPHABET_SIZE / 2] = -dot;
    }
    scores
}

/// Detection threshold for a window with the given standard deviation:
/// `threshold_k * std * sqrt(63)`, i.e. `threshold_k` sigma of the
/// correlation of 63 independent samples with that spread.
pub fn dynamic_threshold(window_std_db: f64, cfg: &DetectorConfig) -> f64 {
    cfg.threshold_k * window_std_db * (SEQUENCE_LEN as f64).sqrt()
}

/// Grammar assembler: folds an ordered stream of symbol events into packets.
///
/// A packet is eight events that start with the preamble pair, keep
/// consecutive spacings within `symbol_spacing_chips` ± tolerance and finish
/// within `assembly_timeout_chips` of the first. Any violation silently drops
/// the partial packet (logged at debug), and the violating event is retried
/// as a possible fresh start. A completed run that fails to decode is also
/// dropped. `Detector` drives one of these internally; it is public so event
/// streams from elsewhere can be assembled the same way.
#[derive(Debug, Default)]
pub struct Assembler {
    spacing: u64,
    tolerance: u64,
    timeout: u64,
    partial: Vec<SymbolEvent>,
}

impl Assembler {
    pub fn new(cfg: &DetectorConfig) -> Self {
        Assembler {
            spacing: cfg.symbol_spacing_chips,
            tolerance: cfg.spacing_tolerance_chips,
            timeout: cfg.assembly_timeout_chips,
            partial: Vec::with_capacity(PACKET_SYMBOLS),
        }
    }

    /// Feeds the next event; events must arrive in sample-index order.
    /// Returns the decoded fields when this event completes a valid packet.
    pub fn on_event(&mut self, ev: SymbolEvent) -> Option<PacketFields> {
        let [pre0, pre1] = preamble();
        loop {
            if self.partial.is_empty() {
                if ev.symbol == pre0 {
                    self.partial.push(ev);
                }
                return None;
            }
            if ev.sample_index.saturating_sub(self.partial[0].sample_index) > self.timeout {
                log::debug!(
                    "partial packet at {} discarded: timeout",
                    self.partial[0].sample_index
                );
                self.partial.clear();
                continue; // the event may start a fresh packet
            }
            let gap = ev.sample_index.saturating_sub(self.partial.last().unwrap().sample_index);
            if gap < self.spacing - self.tolerance || gap > self.spacing + self.tolerance {
                log::debug!(
                    "partial packet at {} discarded: event gap {} outside {}+-{}",
                    self.partial[0].sample_index,
                    gap,
                    self.spacing,
                    self.tolerance
                );
                self.partial.clear();
                continue;
            }
            if self.partial.len() == 1 && ev.symbol != pre1 {
                log::debug!("partial packet discarded: second symbol {} is not {}", ev.symbol, pre1);
                self.partial.clear();
                continue;
            }
            self.partial.push(ev);
            if self.partial.len() < PACKET_SYMBOLS {
                return None;
            }
            let mut symbols = [pre0; PACKET_SYMBOLS];
            for (s, e) in symbols.iter_mut().zip(&self.partial) {
                *s = e.symbol;
            }
            self.partial.clear();
            match decode_symbols(&symbols) {
                Ok(fields) => return Some(fields),
                Err(err) => {
                    log::debug!("assembled packet failed to decode: {err}");
                    return None;
                }
            }
        }
    }
}

/// Streaming detector; see the module docs for the pipeline.
#[derive(Debug)]
pub struct Detector {
    cfg: DetectorConfig,
    alphabet: Alphabet,
    ring: [f64; SEQUENCE_LEN],
    write_pos: usize,
    filled: usize,
    accepted: u64,
    pending: Option<SymbolEvent>,
    assembler: Assembler,
    ops: u64,
}

impl Detector {
    pub fn new(cfg: DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Detector {
            cfg,
            alphabet: Alphabet::canonical(),
            ring: [0.0; SEQUENCE_LEN],
            write_pos: 0,
            filled: 0,
            accepted: 0,
            pending: None,
            assembler: Assembler::new(&cfg),
            ops: 0,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.cfg
    }

    /// Finite samples accepted so far (event indices refer to this count).
    pub fn samples_accepted(&self) -> u64 {
        self.accepted
    }

    /// Work units spent so far; grows by the same amount for every sample
    /// once the window is full.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Feeds one RSSI sample. Non-finite samples are rejected without
    /// touching any state.
    pub fn push_sample(&mut self, rssi_db: f64) -> Detection {
        if !rssi_db.is_finite() {
            return Detection::default();
        }
        let index = self.accepted;
        self.accepted += 1;
        self.ring[self.write_pos] = rssi_db;
        self.write_pos = (self.write_pos + 1) % SEQUENCE_LEN;
        if self.filled < SEQUENCE_LEN {
            self.filled += 1;
        }

        let candidate = if self.filled == SEQUENCE_LEN {
            self.scan_window(index)
        } else {
            self.ops += 1;
            None
        };
        self.settle(index, candidate)
    }

    /// Flushes the stream: confirms any held candidate immediately. Call once
    /// at end of input; further pushes continue normally.
    pub fn flush(&mut self) -> Detection {
        let mut out = Detection::default();
        if let Some(p) = self.pending.take() {
            out.event = Some(p);
            out.packet = self.assembler.on_event(p);
        }
        out
    }

    /// Correlates the current (full) window; returns a candidate event if the
    /// best score clears the threshold.
    fn scan_window(&mut self, index: u64) -> Option<SymbolEvent> {
        let mut window = [0.0f64; SEQUENCE_LEN];
        for (j, w) in window.iter_mut().enumerate() {
            // write_pos now points at the oldest sample
            *w = self.ring[(self.write_pos + j) % SEQUENCE_LEN];
        }
        let normalized = mean_normalize(&window);
        let var = normalized.iter().map(|v| v * v).sum::<f64>() / SEQUENCE_LEN as f64;
        let std = var.sqrt();
        self.ops += 3 * SEQUENCE_LEN as u64;
        if std < self.cfg.min_window_std_db {
            self.ops += (ALPHABET_SIZE / 2 * SEQUENCE_LEN) as u64 + ALPHABET_SIZE as u64;
            return None;
        }
        let scores = correlate_all(&normalized, &self.alphabet);
        self.ops += (ALPHABET_SIZE / 2 * SEQUENCE_LEN) as u64;
        let mut best_rank = 0;
        for rank in 1..ALPHABET_SIZE {
            if scores[rank] > scores[best_rank] {
                best_rank = rank;
            }
        }
        self.ops += ALPHABET_SIZE as u64;
        let threshold = dynamic_threshold(std, &self.cfg);
        if scores[best_rank] >= threshold {
            Some(SymbolEvent {
                symbol: SymbolId::from_rank(best_rank).unwrap(),
                sample_index: index,
                score: scores[best_rank],
            })
        } else {
            None
        }
    }

    /// Local-maximum hold: keep the strongest candidate for `debounce_chips`
    /// samples; confirm it once nothing better shows up in that span.
    fn settle(&mut self, index: u64, candidate: Option<SymbolEvent>) -> Detection {
        let mut out = Detection::default();
        match self.pending {
            None => self.pending = candidate,
            Some(held) => {
                let improves = candidate.map_or(false, |c| {
                    c.score > held.score && c.sample_index - held.sample_index <= self.cfg.debounce_chips
                });
                if improves {
                    self.pending = candidate;
                } else if index - held.sample_index > self.cfg.debounce_chips {
                    out.event = Some(held);
                    out.packet = self.assembler.on_event(held);
                    self.pending = candidate;
                }
                // otherwise: weaker candidate inside the hold is absorbed
            }
        }
        out
    }
}
