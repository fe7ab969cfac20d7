//! Packet layout and the symbol value table.
//!
//! A packet is eight symbols: a fixed two-symbol preamble, one duration
//! symbol, four frequency digits (thousands first), and one bandwidth symbol.
//! Each value column assigns meanings to the symbols in rank order; `S5-` is
//! the pilot and never carries a value.
//!
//! | symbol | duration (min) | freq digit | bandwidth (MHz) |
//! |--------|----------------|------------|-----------------|
//! | `S0+`  | 5              | 0          | 10              |
//! | `S1+`  | 10             | 1          | 20              |
//! | `S2+`  | 20             | 2          | 40              |
//! | `S3+`  | 40             | 3          | 80              |
//! | `S4+`  | 60             | 4          | 160             |
//! | `S5+`  | 90             | 5          | 320             |
//! | `S0-`  | 120            | 6          | 640             |
//! | `S1-`  | 180            | 7          | -               |
//! | `S2-`  | 240            | 8          | -               |
//! | `S3-`  | 300            | 9          | -               |
//! | `S4-`  | 360            | (reserved) | -               |
//! | `S5-`  | pilot          | pilot      | pilot           |
//!
//! Requested durations and bandwidths are rounded up to the next table value,
//! so a grant never under-covers the request.

use serde::{Deserialize, Serialize};

use crate::pn::SymbolId;
use crate::{Error, Result};

/// Symbols per packet: preamble (2) + duration (1) + frequency digits (4) +
/// bandwidth (1).
pub const PACKET_SYMBOLS: usize = 8;

/// Durations encodable in the duration column, minutes, ascending.
pub const DURATIONS_MIN: [u32; 11] = [5, 10, 20, 40, 60, 90, 120, 180, 240, 300, 360];

/// Bandwidths encodable in the bandwidth column, MHz, ascending.
pub const BANDWIDTHS_MHZ: [u32; 7] = [10, 20, 40, 80, 160, 320, 640];

/// Largest encodable center frequency (four decimal digits of MHz).
pub const MAX_CENTER_MHZ: u32 = 9999;

/// The fixed packet preamble: pilot, then its inversion.
pub fn preamble() -> [SymbolId; 2] {
    [SymbolId::PILOT, SymbolId::PILOT.inverse()]
}

/// One value column of the symbol table.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum TableColumn {
    Duration,
    FreqDigit,
    Bandwidth,
}

impl std::fmt::Display for TableColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TableColumn::Duration => "duration",
            TableColumn::FreqDigit => "frequency digit",
            TableColumn::Bandwidth => "bandwidth",
        })
    }
}

/// Value a symbol carries in `column`.
///
/// The pilot is reserved everywhere; `S4-` has no frequency-digit meaning
/// (digits stop at 9); `S1-`..`S4-` have no bandwidth meaning.
pub fn table_value(column: TableColumn, symbol: SymbolId) -> Result<u32> {
    if symbol == SymbolId::PILOT {
        return Err(Error::ReservedSymbol(symbol));
    }
    let rank = symbol.rank();
    match column {
        TableColumn::Duration => Ok(DURATIONS_MIN[rank]),
        TableColumn::FreqDigit if rank <= 9 => Ok(rank as u32),
        TableColumn::Bandwidth if rank < BANDWIDTHS_MHZ.len() => Ok(BANDWIDTHS_MHZ[rank]),
        _ => Err(Error::InvalidSymbolForColumn { symbol, column }),
    }
}

/// Inverse of [`table_value`]: the symbol carrying exactly `value`.
pub fn table_symbol(column: TableColumn, value: u32) -> Result<SymbolId> {
    let rank = match column {
        TableColumn::Duration => DURATIONS_MIN.iter().position(|&d| d == value),
        TableColumn::FreqDigit => (value <= 9).then_some(value as usize),
        TableColumn::Bandwidth => BANDWIDTHS_MHZ.iter().position(|&b| b == value),
    };
    match rank {
        Some(r) => SymbolId::from_rank(r),
        None => Err(Error::NotATableValue(value, column)),
    }
}

/// Smallest table duration covering `requested` minutes.
pub fn quantize_duration(requested: u32) -> Result<u32> {
    if requested < 1 {
        return Err(Error::DurationOutOfRange(requested));
    }
    DURATIONS_MIN
        .iter()
        .copied()
        .find(|&d| d >= requested)
        .ok_or(Error::DurationOutOfRange(requested))
}

/// Smallest table bandwidth covering `requested` MHz.
pub fn quantize_bandwidth(requested: u32) -> Result<u32> {
    if requested < 1 {
        return Err(Error::BandwidthOutOfRange(requested));
    }
    BANDWIDTHS_MHZ
        .iter()
        .copied()
        .find(|&b| b >= requested)
        .ok_or(Error::BandwidthOutOfRange(requested))
}

/// A raw reservation request, before rounding to the table grid.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpectrumRequest {
    pub duration_min: u32,
    pub center_freq_mhz: u32,
    pub bandwidth_mhz: u32,
}

/// Decoded (or to-be-encoded) packet content. Always on the table grid:
/// duration and bandwidth are exact column values, center is 0..=9999 MHz.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawPacketFields")]
pub struct PacketFields {
    duration_min: u32,
    center_freq_mhz: u32,
    bandwidth_mhz: u32,
}

#[derive(Deserialize)]
struct RawPacketFields {
    duration_min: u32,
    center_freq_mhz: u32,
    bandwidth_mhz: u32,
}

impl TryFrom<RawPacketFields> for PacketFields {
    type Error = Error;

    fn try_from(raw: RawPacketFields) -> Result<Self> {
        PacketFields::new(raw.duration_min, raw.center_freq_mhz, raw.bandwidth_mhz)
    }
}

impl PacketFields {
    pub fn new(duration_min: u32, center_freq_mhz: u32, bandwidth_mhz: u32) -> Result<Self> {
        if !DURATIONS_MIN.contains(&duration_min) {
            return Err(Error::NotATableValue(duration_min, TableColumn::Duration));
        }
        if !BANDWIDTHS_MHZ.contains(&bandwidth_mhz) {
            return Err(Error::NotATableValue(bandwidth_mhz, TableColumn::Bandwidth));
        }
        if center_freq_mhz > MAX_CENTER_MHZ {
            return Err(Error::FrequencyOutOfRange(center_freq_mhz));
        }
        Ok(PacketFields {
            duration_min,
            center_freq_mhz,
            bandwidth_mhz,
        })
    }

    pub fn duration_min(&self) -> u32 {
        self.duration_min
    }

    pub fn center_freq_mhz(&self) -> u32 {
        self.center_freq_mhz
    }

    pub fn bandwidth_mhz(&self) -> u32 {
        self.bandwidth_mhz
    }
}

impl std::fmt::Display for PacketFields {
    /// Canonical one-line form, e.g. `DPASS{dur=60min,center=5890MHz,bw=10MHz}`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DPASS{{dur={}min,center={}MHz,bw={}MHz}}",
            self.duration_min, self.center_freq_mhz, self.bandwidth_mhz
        )
    }
}

/// Rounds a request up to the table grid.
pub fn quantize_request(req: &SpectrumRequest) -> Result<PacketFields> {
    let duration_min = quantize_duration(req.duration_min)?;
    let bandwidth_mhz = quantize_bandwidth(req.bandwidth_mhz)?;
    if req.center_freq_mhz > MAX_CENTER_MHZ {
        return Err(Error::FrequencyOutOfRange(req.center_freq_mhz));
    }
    PacketFields::new(duration_min, req.center_freq_mhz, bandwidth_mhz)
}

/// A complete, well-formed packet as symbols on the air.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SymbolSequence {
    symbols: [SymbolId; PACKET_SYMBOLS],
}

impl SymbolSequence {
    pub fn symbols(&self) -> &[SymbolId; PACKET_SYMBOLS] {
        &self.symbols
    }

    pub fn iter(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.symbols.iter().copied()
    }
}

impl TryFrom<[SymbolId; PACKET_SYMBOLS]> for SymbolSequence {
    type Error = Error;

    /// Accepts only arrays that decode to a valid packet.
    fn try_from(symbols: [SymbolId; PACKET_SYMBOLS]) -> Result<Self> {
        decode_symbols(&symbols)?;
        Ok(SymbolSequence { symbols })
    }
}

/// Encodes grid-exact fields. Infallible by construction of [`PacketFields`].
pub fn encode_fields(fields: &PacketFields) -> SymbolSequence {
    let [p0, p1] = preamble();
    let dig = |n: u32| table_symbol(TableColumn::FreqDigit, n).expect("digit 0..=9");
    let c = fields.center_freq_mhz;
    let symbols = [
        p0,
        p1,
        table_symbol(TableColumn::Duration, fields.duration_min).expect("grid duration"),
        dig(c / 1000),
        dig(c / 100 % 10),
        dig(c / 10 % 10),
        dig(c % 10),
        table_symbol(TableColumn::Bandwidth, fields.bandwidth_mhz).expect("grid bandwidth"),
    ];
    SymbolSequence { symbols }
}

/// Rounds `req` up to the grid and encodes it.
pub fn encode_packet(req: &SpectrumRequest) -> Result<SymbolSequence> {
    Ok(encode_fields(&quantize_request(req)?))
}

/// Decodes eight received symbols into packet fields.
///
/// A wrong preamble yields [`Error::NotAPacket`]; a pilot or column-invalid
/// symbol in a value slot yields the corresponding symbol error.
pub fn decode_symbols(symbols: &[SymbolId; PACKET_SYMBOLS]) -> Result<PacketFields> {
    if symbols[0..2] != preamble() {
        return Err(Error::NotAPacket);
    }
    let duration_min = table_value(TableColumn::Duration, symbols[2])?;
    let mut center = 0u32;
    for &s in &symbols[3..7] {
        center = center * 10 + table_value(TableColumn::FreqDigit, s)?;
    }
    let bandwidth_mhz = table_value(TableColumn::Bandwidth, symbols[7])?;
    PacketFields::new(duration_min, center, bandwidth_mhz)
}
