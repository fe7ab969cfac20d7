//! Maximum-length sequence alphabet.
//!
//! Twelve 63-chip symbols: one m-sequence per primitive degree-6 polynomial,
//! each started from the all-ones register, plus the six chip-wise inversions.
//! Every sequence is balanced (chip sum +1, or -1 inverted) and has the
//! two-valued circular autocorrelation (63 at lag zero, -1 everywhere else)
//! that makes a sliding correlator reliable at low SNR.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Chips per symbol; the period of a degree-6 m-sequence.
pub const SEQUENCE_LEN: usize = 63;

/// Number of symbols in the canonical alphabet (6 sequences x 2 polarities).
pub const ALPHABET_SIZE: usize = 12;

const DEGREE: u32 = 6;
const STATE_MASK: u8 = 0x3f;

/// The six primitive degree-6 polynomials, as coefficient bitmasks
/// (bit i = coefficient of x^i, the x^6 term implicit), ascending.
/// Exactly these six masks give a 63-long LFSR cycle; see the brute-force
/// enumeration in the tests.
pub const PRIMITIVE_TAPS: [u8; 6] = [
    0x03, // x^6 + x + 1
    0x1b, // x^6 + x^4 + x^3 + x + 1
    0x21, // x^6 + x^5 + 1
    0x27, // x^6 + x^5 + x^2 + x + 1
    0x2d, // x^6 + x^5 + x^3 + x^2 + 1
    0x33, // x^6 + x^5 + x^4 + x + 1
];

/// The all-ones register used for every canonical sequence.
pub const CANONICAL_SEED: u8 = 0x3f;

/// One symbol of the alphabet: sequence index 0..=5 plus polarity,
/// written `S0+` .. `S5-`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SymbolId {
    index: u8,
    inverted: bool,
}

impl SymbolId {
    /// The pilot `S5-`: reserved in every value column, first preamble symbol.
    pub const PILOT: SymbolId = SymbolId {
        index: 5,
        inverted: true,
    };

    pub fn new(index: u8, inverted: bool) -> Result<Self> {
        if index >= 6 {
            return Err(Error::BadSymbolIndex(index));
        }
        Ok(SymbolId { index, inverted })
    }

    /// Position in Table order: `S0+`..`S5+` are 0..=5, `S0-`..`S5-` are 6..=11.
    pub fn rank(self) -> usize {
        self.index as usize + if self.inverted { 6 } else { 0 }
    }

    pub fn from_rank(rank: usize) -> Result<Self> {
        if rank >= ALPHABET_SIZE {
            return Err(Error::BadSymbolIndex(rank.min(u8::MAX as usize) as u8));
        }
        Ok(SymbolId {
            index: (rank % 6) as u8,
            inverted: rank >= 6,
        })
    }

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn is_inverted(self) -> bool {
        self.inverted
    }

    pub fn inverse(self) -> Self {
        SymbolId {
            index: self.index,
            inverted: !self.inverted,
        }
    }

    /// All twelve symbols in rank order.
    pub fn all() -> impl Iterator<Item = SymbolId> {
        (0..ALPHABET_SIZE).map(|r| SymbolId::from_rank(r).unwrap())
    }
}

impl PartialOrd for SymbolId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SymbolId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl std::fmt::Display for SymbolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}{}", self.index, if self.inverted { '-' } else { '+' })
    }
}

impl std::str::FromStr for SymbolId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let b = s.as_bytes();
        if b.len() == 3 && b[0] == b'S' && (b'0'..=b'5').contains(&b[1]) {
            let inverted = match b[2] {
                b'+' => false,
                b'-' => true,
                _ => return Err(format!("bad symbol name {s:?}")),
            };
            return Ok(SymbolId {
                index: b[1] - b'0',
                inverted,
            });
        }
        Err(format!("bad symbol name {s:?}"))
    }
}

impl Serialize for SymbolId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SymbolId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A bipolar 63-chip sequence, each chip +1 or -1, with |chip sum| == 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChipSequence {
    chips: [i8; SEQUENCE_LEN],
}

impl ChipSequence {
    /// Validates chip values and the m-sequence balance property.
    pub fn from_chips(chips: [i8; SEQUENCE_LEN]) -> Result<Self> {
        if chips.iter().any(|&c| c != 1 && c != -1) {
            return Err(Error::BadChipValue);
        }
        let sum: i32 = chips.iter().map(|&c| c as i32).sum();
        if sum.abs() != 1 {
            return Err(Error::UnbalancedChips(sum));
        }
        Ok(ChipSequence { chips })
    }

    pub fn chips(&self) -> &[i8; SEQUENCE_LEN] {
        &self.chips
    }

    /// Chip sum: +1 for a canonical m-sequence, -1 for an inverted one.
    pub fn balance(&self) -> i32 {
        self.chips.iter().map(|&c| c as i32).sum()
    }

    pub fn inverted(&self) -> Self {
        let mut chips = self.chips;
        for c in &mut chips {
            *c = -*c;
        }
        ChipSequence { chips }
    }
}

fn hardware_taps(poly_mask: u8) -> u8 {
    // The register shifts left and feeds back into bit 0, so coefficient
    // x^i maps onto state bit 5-i.
    let mut t = 0;
    for i in 0..DEGREE {
        if poly_mask >> i & 1 == 1 {
            t |= 1 << (5 - i);
        }
    }
    t
}

fn lfsr_step(state: u8, hw_taps: u8) -> u8 {
    let fb = ((state & hw_taps).count_ones() & 1) as u8;
    ((state << 1) | fb) & STATE_MASK
}

/// Steps the register until it revisits `seed`, up to one full state space.
/// `None` means the seed's orbit never returns (possible for degenerate taps
/// whose update is not invertible).
pub fn lfsr_period(taps: u8, seed: u8) -> Option<u32> {
    if taps > STATE_MASK || seed == 0 || seed > STATE_MASK {
        return None;
    }
    let hw = hardware_taps(taps);
    let mut s = seed;
    for n in 1..=64 {
        s = lfsr_step(s, hw);
        if s == seed {
            return Some(n);
        }
    }
    None
}

/// Runs the Fibonacci LFSR for `taps` from `seed` and returns the 63-chip
/// bipolar output (register MSB, 1 -> +1, 0 -> -1). The taps must describe a
/// primitive polynomial, checked operationally: the orbit of the seed must
/// have period exactly 63.
pub fn generate_m_sequence(taps: u8, seed: u8) -> Result<ChipSequence> {
    if seed == 0 || seed > STATE_MASK {
        return Err(Error::BadSeed(seed));
    }
    let period = lfsr_period(taps, seed);
    if period != Some(SEQUENCE_LEN as u32) {
        return Err(Error::NonPrimitiveTaps { taps, period });
    }
    let hw = hardware_taps(taps);
    let mut s = seed;
    let mut chips = [0i8; SEQUENCE_LEN];
    for chip in &mut chips {
        *chip = if s & 0x20 != 0 { 1 } else { -1 };
        s = lfsr_step(s, hw);
    }
    debug_assert_eq!(chips.iter().map(|&c| c as i32).sum::<i32>(), 1);
    Ok(ChipSequence { chips })
}

/// Circular cross-correlation: `out[k] = sum_i a[i] * b[(i + k) % 63]`.
pub fn circular_cross_correlation(a: &ChipSequence, b: &ChipSequence) -> [i32; SEQUENCE_LEN] {
    let mut out = [0i32; SEQUENCE_LEN];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0i32;
        for i in 0..SEQUENCE_LEN {
            acc += a.chips[i] as i32 * b.chips[(i + k) % SEQUENCE_LEN] as i32;
        }
        *o = acc;
    }
    out
}

/// The full symbol alphabet in rank order.
#[derive(Clone, Debug)]
pub struct Alphabet {
    seqs: Vec<ChipSequence>,
}

impl Alphabet {
    /// Builds the canonical alphabet: one sequence per primitive polynomial in
    /// ascending tap order (ranks 0..=5), then their inversions (ranks 6..=11).
    pub fn canonical() -> Self {
        let mut seqs: Vec<ChipSequence> = PRIMITIVE_TAPS
            .iter()
            .map(|&t| generate_m_sequence(t, CANONICAL_SEED).expect("primitive taps"))
            .collect();
        for i in 0..6 {
            seqs.push(seqs[i].inverted());
        }
        Alphabet { seqs }
    }

    pub fn sequence(&self, id: SymbolId) -> &ChipSequence {
        &self.seqs[id.rank()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (SymbolId, &ChipSequence)> {
        self.seqs
            .iter()
            .enumerate()
            .map(|(r, s)| (SymbolId::from_rank(r).unwrap(), s))
    }
}
