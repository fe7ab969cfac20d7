use crate::pn::SymbolId;
use crate::protocol::TableColumn;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // PN alphabet
    #[error("taps 0x{taps:02x} are not a primitive degree-6 polynomial (LFSR period {period:?}, need 63)")]
    NonPrimitiveTaps { taps: u8, period: Option<u32> },
    #[error("LFSR seed must be a nonzero 6-bit value, got 0x{0:02x}")]
    BadSeed(u8),
    #[error("no alphabet symbol with index {0} (want 0..=5, rank 0..=11)")]
    BadSymbolIndex(u8),
    #[error("chip values must be +1 or -1")]
    BadChipValue,
    #[error("chip sequence is unbalanced (sum {0}, expected +1 or -1)")]
    UnbalancedChips(i32),

    // protocol
    #[error("duration {0} min is outside the encodable range 1..=360")]
    DurationOutOfRange(u32),
    #[error("center frequency {0} MHz is outside the encodable range 0..=9999")]
    FrequencyOutOfRange(u32),
    #[error("bandwidth {0} MHz is outside the encodable range 1..=640")]
    BandwidthOutOfRange(u32),
    #[error("{0} is not a value in the {1} column")]
    NotATableValue(u32, TableColumn),
    #[error("symbol {0} is the pilot and carries no value")]
    ReservedSymbol(SymbolId),
    #[error("symbol {symbol} has no entry in the {column} column")]
    InvalidSymbolForColumn { symbol: SymbolId, column: TableColumn },
    #[error("sequence does not start with the preamble")]
    NotAPacket,

    // modem
    #[error("chip duration must be positive")]
    ZeroChipDuration,
    #[error("on power must exceed off power")]
    PowerOrdering,

    // trace
    #[error("trace timestamps must be strictly increasing (sample {index})")]
    NonMonotonicTrace { index: usize },

    // detector
    #[error("invalid detector config: {0}")]
    DetectorConfig(String),

    // channel
    #[error("invalid channel scenario: {0}")]
    Scenario(String),
    #[error("device profile lists the current channel as an alternate")]
    AlternateIsCurrent,
}
