//! Execution trace records.
//!
//! `FullTraceEntry` is the eleven-field record of one executed instruction:
//! two reads (address, value, last-writing step), the fetched program counter
//! and opcode, and the outputs (write address, write value, next pc).
//! `TraceEntry` is the projection onto the three output fields; it is what
//! the hash chain commits to.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::isa::Word;

/// Per-cell tag naming the most recent step that wrote the cell.
///
/// Serialized as 8 bytes little-endian: `INITIAL` is 2^64-1, a step index is
/// its two's-complement 64-bit value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LastStep {
    Initial,
    Step(i64),
}

impl LastStep {
    pub fn to_u64(self) -> u64 {
        match self {
            LastStep::Initial => u64::MAX,
            LastStep::Step(k) => k as u64,
        }
    }

    pub fn from_u64(raw: u64) -> Self {
        if raw == u64::MAX {
            LastStep::Initial
        } else {
            LastStep::Step(raw as i64)
        }
    }

    pub fn step(self) -> Option<i64> {
        match self {
            LastStep::Initial => None,
            LastStep::Step(k) => Some(k),
        }
    }
}

impl std::fmt::Display for LastStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LastStep::Initial => write!(f, "INITIAL"),
            LastStep::Step(k) => write!(f, "{k}"),
        }
    }
}

/// Byte length of a serialized `FullTraceEntry`.
pub const FULL_TRACE_ENTRY_LEN: usize = 52;
/// Byte length of a serialized `TraceEntry`.
pub const TRACE_ENTRY_LEN: usize = 12;

/// The full record of one executed instruction, in table column order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullTraceEntry {
    pub read1_address: Word,
    pub read1_value: Word,
    pub read1_last_step: LastStep,
    pub read2_address: Word,
    pub read2_value: Word,
    pub read2_last_step: LastStep,
    pub read_pc_address: Word,
    pub read_pc_opcode: Word,
    pub write_address: Word,
    pub write_value: Word,
    pub write_pc: Word,
}

impl Default for LastStep {
    fn default() -> Self {
        LastStep::Initial
    }
}

/// The output projection: what the hash chain commits to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub write_address: Word,
    pub write_value: Word,
    pub write_pc: Word,
}

impl TraceEntry {
    pub fn to_bytes(self) -> [u8; TRACE_ENTRY_LEN] {
        let mut out = [0u8; TRACE_ENTRY_LEN];
        out[0..4].copy_from_slice(&self.write_address.to_le_bytes());
        out[4..8].copy_from_slice(&self.write_value.to_le_bytes());
        out[8..12].copy_from_slice(&self.write_pc.to_le_bytes());
        out
    }

    pub fn from_bytes(raw: &[u8]) -> Option<Self> {
        if raw.len() != TRACE_ENTRY_LEN {
            return None;
        }
        let word = |i: usize| Word::from_le_bytes(raw[i..i + 4].try_into().unwrap());
        Some(TraceEntry { write_address: word(0), write_value: word(4), write_pc: word(8) })
    }
}

impl FullTraceEntry {
    /// Projection onto the output fields.
    pub fn outputs(&self) -> TraceEntry {
        TraceEntry {
            write_address: self.write_address,
            write_value: self.write_value,
            write_pc: self.write_pc,
        }
    }

    pub fn read_address(&self, which: WhichRead) -> Word {
        match which {
            WhichRead::Read1 => self.read1_address,
            WhichRead::Read2 => self.read2_address,
        }
    }

    pub fn read_value(&self, which: WhichRead) -> Word {
        match which {
            WhichRead::Read1 => self.read1_value,
            WhichRead::Read2 => self.read2_value,
        }
    }

    pub fn read_last_step(&self, which: WhichRead) -> LastStep {
        match which {
            WhichRead::Read1 => self.read1_last_step,
            WhichRead::Read2 => self.read2_last_step,
        }
    }

    /// Fixed-width serialization, fields in table column order, all
    /// little-endian: 4+4+8 per read, 4+4 for the pc fetch, 4+4+4 outputs.
    pub fn to_bytes(&self) -> [u8; FULL_TRACE_ENTRY_LEN] {
        let mut out = [0u8; FULL_TRACE_ENTRY_LEN];
        out[0..4].copy_from_slice(&self.read1_address.to_le_bytes());
        out[4..8].copy_from_slice(&self.read1_value.to_le_bytes());
        out[8..16].copy_from_slice(&self.read1_last_step.to_u64().to_le_bytes());
        out[16..20].copy_from_slice(&self.read2_address.to_le_bytes());
        out[20..24].copy_from_slice(&self.read2_value.to_le_bytes());
        out[24..32].copy_from_slice(&self.read2_last_step.to_u64().to_le_bytes());
        out[32..36].copy_from_slice(&self.read_pc_address.to_le_bytes());
        out[36..40].copy_from_slice(&self.read_pc_opcode.to_le_bytes());
        out[40..44].copy_from_slice(&self.write_address.to_le_bytes());
        out[44..48].copy_from_slice(&self.write_value.to_le_bytes());
        out[48..52].copy_from_slice(&self.write_pc.to_le_bytes());
        out
    }

    pub fn from_bytes(raw: &[u8]) -> Option<Self> {
        if raw.len() != FULL_TRACE_ENTRY_LEN {
            return None;
        }
        let word = |i: usize| Word::from_le_bytes(raw[i..i + 4].try_into().unwrap());
        let last = |i: usize| {
            LastStep::from_u64(u64::from_le_bytes(raw[i..i + 8].try_into().unwrap()))
        };
        Some(FullTraceEntry {
            read1_address: word(0),
            read1_value: word(4),
            read1_last_step: last(8),
            read2_address: word(16),
            read2_value: word(20),
            read2_last_step: last(24),
            read_pc_address: word(32),
            read_pc_opcode: word(36),
            write_address: word(40),
            write_value: word(44),
            write_pc: word(48),
        })
    }
}

/// Selects one of the two read columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WhichRead {
    Read1,
    Read2,
}

impl WhichRead {
    pub fn tag(self) -> u8 {
        match self {
            WhichRead::Read1 => 1,
            WhichRead::Read2 => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(WhichRead::Read1),
            2 => Some(WhichRead::Read2),
            _ => None,
        }
    }
}

/// A contiguous run of trace entries starting at a (usually negative)
/// base step index: the loading prefix followed by the execution steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FullTrace {
    pub base_index: i64,
    pub entries: Vec<FullTraceEntry>,
}

impl FullTrace {
    pub fn new(loading: Vec<FullTraceEntry>, execution: Vec<FullTraceEntry>) -> Self {
        let base_index = -(loading.len() as i64);
        let mut entries = loading;
        entries.extend(execution);
        FullTrace { base_index, entries }
    }

    pub fn entry_at(&self, step: i64) -> Option<&FullTraceEntry> {
        let off = step.checked_sub(self.base_index)?;
        if off < 0 {
            return None;
        }
        self.entries.get(off as usize)
    }

    /// Number of loading (negative-index) entries.
    pub fn loading_len(&self) -> usize {
        (-self.base_index) as usize
    }

    /// Number of execution (index >= 0) entries.
    pub fn execution_len(&self) -> usize {
        self.entries.len() - self.loading_len()
    }

    pub fn execution_entries(&self) -> &[FullTraceEntry] {
        &self.entries[self.loading_len()..]
    }

    pub fn loading_entries(&self) -> &[FullTraceEntry] {
        &self.entries[..self.loading_len()]
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(&self.base_index.to_le_bytes())?;
        for e in &self.entries {
            w.write_all(&e.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> io::Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)?;
        let base_index = i64::from_le_bytes(head);
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() % FULL_TRACE_ENTRY_LEN != 0 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "truncated trace entry"));
        }
        let entries = raw
            .chunks(FULL_TRACE_ENTRY_LEN)
            .map(|c| FullTraceEntry::from_bytes(c).unwrap())
            .collect();
        Ok(FullTrace { base_index, entries })
    }
}

/// Independent brute-force oracle for the `lastStep` bookkeeping: linear scan
/// over all entries with index < `before_step`, returning the greatest index
/// that wrote `address`.
///
/// Address 0 is the null cell (the zero-fill convention records "no write" as
/// a write of 0 to address 0), so writes to it never count and reads of it
/// are always `Initial`.
pub fn last_step_oracle(trace: &FullTrace, address: Word, before_step: i64) -> LastStep {
    if address == 0 {
        return LastStep::Initial;
    }
    let mut found = LastStep::Initial;
    for (off, entry) in trace.entries.iter().enumerate() {
        let idx = trace.base_index + off as i64;
        if idx >= before_step {
            break;
        }
        if entry.write_address == address {
            found = LastStep::Step(idx);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_entry(addr: Word, value: Word) -> FullTraceEntry {
        FullTraceEntry { write_address: addr, write_value: value, ..Default::default() }
    }

    #[test]
    fn last_step_encoding() {
        assert_eq!(LastStep::Initial.to_u64(), u64::MAX);
        assert_eq!(LastStep::Step(-3).to_u64(), (-3i64) as u64);
        assert_eq!(LastStep::from_u64(17), LastStep::Step(17));
        assert_eq!(LastStep::from_u64(u64::MAX), LastStep::Initial);
    }

    #[test]
    fn oracle_never_written() {
        let trace = FullTrace::new(vec![], vec![write_entry(5, 1)]);
        assert_eq!(last_step_oracle(&trace, 77, 10), LastStep::Initial);
    }

    #[test]
    fn oracle_takes_greatest_index() {
        let entries = vec![
            write_entry(40, 1), // step 0
            write_entry(41, 2), // step 1
            write_entry(40, 3), // step 2
            write_entry(40, 4), // step 3 (visible below before_step=10 only)
        ];
        let trace = FullTrace::new(vec![], entries);
        assert_eq!(last_step_oracle(&trace, 40, 10), LastStep::Step(3));
        // strict bound: a write at the query step itself does not count
        assert_eq!(last_step_oracle(&trace, 40, 3), LastStep::Step(2));
        assert_eq!(last_step_oracle(&trace, 40, 1), LastStep::Step(0));
        assert_eq!(last_step_oracle(&trace, 40, 0), LastStep::Initial);
    }

    #[test]
    fn oracle_sees_loading_entries() {
        let loading = vec![write_entry(0x100, 7), write_entry(0x104, 8)];
        let trace = FullTrace::new(loading, vec![write_entry(50, 9)]);
        assert_eq!(last_step_oracle(&trace, 0x104, 0), LastStep::Step(-1));
        assert_eq!(last_step_oracle(&trace, 0x100, 0), LastStep::Step(-2));
    }

    #[test]
    fn oracle_ignores_null_address() {
        let trace = FullTrace::new(vec![], vec![write_entry(0, 0), write_entry(0, 5)]);
        assert_eq!(last_step_oracle(&trace, 0, 10), LastStep::Initial);
    }

    #[test]
    fn entry_roundtrip() {
        let e = FullTraceEntry {
            read1_address: 1,
            read1_value: 2,
            read1_last_step: LastStep::Step(-4),
            read2_address: 3,
            read2_value: 4,
            read2_last_step: LastStep::Initial,
            read_pc_address: 0x100,
            read_pc_opcode: 0x0103_0102,
            write_address: 5,
            write_value: 6,
            write_pc: 0x104,
        };
        assert_eq!(FullTraceEntry::from_bytes(&e.to_bytes()), Some(e));
        assert_eq!(TraceEntry::from_bytes(&e.outputs().to_bytes()), Some(e.outputs()));
    }
}
