//! Trace serialization: diffable CSV (`t_us,rssi_db` header) and a packed
//! binary variant (little-endian u64 timestamp + f32 dB per record) for bulk
//! runs.
//!
//! Reading is streaming and forgiving: a malformed record (unparseable,
//! non-finite value, non-increasing timestamp) is skipped with a warning and
//! counted; the caller decides when the ratio is unacceptable.

use std::io::{self, BufRead, Read, Write};

use clap::ValueEnum;
use dpass_core::trace::PowerTrace;

pub const CSV_HEADER: &str = "t_us,rssi_db";

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum)]
pub enum TraceFormat {
    #[default]
    Csv,
    Bin,
}

pub fn write_trace<W: Write>(mut w: W, trace: &PowerTrace, format: TraceFormat) -> io::Result<()> {
    match format {
        TraceFormat::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for s in trace.samples() {
                writeln!(w, "{},{}", s.t_us, s.rssi_db)?;
            }
        }
        TraceFormat::Bin => {
            for s in trace.samples() {
                w.write_all(&s.t_us.to_le_bytes())?;
                w.write_all(&(s.rssi_db as f32).to_le_bytes())?;
            }
        }
    }
    w.flush()
}

pub struct TraceReader<R> {
    inner: R,
    format: TraceFormat,
    header_read: bool,
    last_t: Option<u64>,
    records: usize,
    malformed: usize,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(inner: R, format: TraceFormat) -> Self {
        TraceReader {
            inner,
            format,
            header_read: false,
            last_t: None,
            records: 0,
            malformed: 0,
        }
    }

    pub fn records(&self) -> usize {
        self.records
    }

    pub fn malformed(&self) -> usize {
        self.malformed
    }

    /// Next good sample, or None at end of input. Malformed records are
    /// consumed, warned about and counted, never returned.
    pub fn next_sample(&mut self) -> io::Result<Option<(u64, f64)>> {
        loop {
            let parsed = match self.format {
                TraceFormat::Csv => {
                    if !self.header_read {
                        self.header_read = true;
                        let mut header = String::new();
                        if self.inner.read_line(&mut header)? == 0 {
                            return Ok(None);
                        }
                        if header.trim() != CSV_HEADER {
                            return Err(io::Error::new(
                                io::ErrorKind::InvalidData,
                                format!("expected `{CSV_HEADER}` header, got `{}`", header.trim()),
                            ));
                        }
                    }
                    let mut line = String::new();
                    if self.inner.read_line(&mut line)? == 0 {
                        return Ok(None);
                    }
                    if line.trim().is_empty() {
                        continue;
                    }
                    self.records += 1;
                    parse_csv_line(line.trim())
                }
                TraceFormat::Bin => {
                    let mut buf = [0u8; 12];
                    match read_exact_or_eof(&mut self.inner, &mut buf)? {
                        Fill::Empty => return Ok(None),
                        Fill::Partial => {
                            self.records += 1;
                            self.malformed += 1;
                            log::warn!("trailing partial binary record skipped");
                            return Ok(None);
                        }
                        Fill::Full => {
                            self.records += 1;
                            let t = u64::from_le_bytes(buf[..8].try_into().unwrap());
                            let v = f32::from_le_bytes(buf[8..].try_into().unwrap()) as f64;
                            Ok((t, v))
                        }
                    }
                }
            };
            match parsed {
                Ok((t, v)) if v.is_finite() && Some(t) > self.last_t => {
                    self.last_t = Some(t);
                    return Ok(Some((t, v)));
                }
                Ok((t, v)) => {
                    self.malformed += 1;
                    log::warn!("skipping bad record {}: t={t} v={v}", self.records);
                }
                Err(why) => {
                    self.malformed += 1;
                    log::warn!("skipping record {}: {why}", self.records);
                }
            }
        }
    }
}

fn parse_csv_line(line: &str) -> Result<(u64, f64), String> {
    let (t, v) = line.split_once(',').ok_or("missing comma")?;
    let t = t.trim().parse::<u64>().map_err(|e| e.to_string())?;
    let v = v.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((t, v))
}

enum Fill {
    Full,
    Partial,
    Empty,
}

fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<Fill> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..])? {
            0 if filled == 0 => return Ok(Fill::Empty),
            0 => return Ok(Fill::Partial),
            n => filled += n,
        }
    }
    Ok(Fill::Full)
}
