//! The traced virtual CPU.
//!
//! A 32-bit word-addressed sparse memory; registers are cells 0..31, the pc
//! is the only register without an address. Loading a program (and its
//! input) is itself traced as write-only entries at negative step indices, so
//! the very first execution step already has a committed prefix to hash
//! against. Every cell remembers the step that last wrote it.
//!
//! Address 0 is the null cell: instructions with no write record the
//! zero-filled pair (0, 0), so real writes to address 0 are discarded and its
//! reads always see (0, INITIAL). This keeps the trace records and the
//! brute-force `last_step_oracle` in exact agreement.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::isa::{self, StepOutcome, Word};
use crate::trace::{FullTraceEntry, LastStep};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CpuError {
    #[error("program, input and register regions overlap")]
    OverlappingRegions,
    #[error("machine is not running")]
    NotRunning,
    #[error("still running after {0} steps")]
    StepBudgetExceeded(u64),
    #[error("input of {got} words exceeds the input region capacity {capacity}")]
    InputTooLong { got: usize, capacity: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultKind {
    IllegalInstruction,
    ReadOnlyWrite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted(Word),
    Trapped(FaultKind),
}

impl Status {
    pub fn is_running(self) -> bool {
        matches!(self, Status::Running)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryCell {
    pub value: Word,
    pub last_step: LastStep,
}

/// Half-open address range `[base, base + len)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Region {
    pub base: Word,
    pub len: Word,
}

impl Region {
    pub fn new(base: Word, len: Word) -> Self {
        Region { base, len }
    }

    pub fn contains(&self, addr: Word) -> bool {
        addr >= self.base && (addr - self.base) < self.len
    }

    fn overlaps(&self, other: &Region) -> bool {
        if self.len == 0 || other.len == 0 {
            return false;
        }
        self.base < other.base.saturating_add(other.len)
            && other.base < self.base.saturating_add(self.len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    /// (address, opcode word) pairs; consecutive instructions sit 4 apart.
    pub instructions: Vec<(Word, Word)>,
    pub program_region: Region,
    pub input_region: Region,
    pub entry_pc: Word,
}

impl Program {
    /// Lay out `words` starting at `base` with the pc stride, reserving an
    /// input region of `input_capacity` words.
    pub fn from_words(base: Word, words: &[Word], input: Region) -> Self {
        let instructions = words
            .iter()
            .enumerate()
            .map(|(i, w)| (base + (i as Word) * isa::PC_STRIDE, *w))
            .collect();
        Program {
            instructions,
            program_region: Region::new(base, (words.len() as Word) * isa::PC_STRIDE),
            input_region: input,
            entry_pc: base,
        }
    }

    pub fn validate(&self) -> Result<(), CpuError> {
        let registers = Region::new(0, isa::REGISTER_COUNT);
        if self.program_region.overlaps(&self.input_region)
            || self.program_region.overlaps(&registers)
            || self.input_region.overlaps(&registers)
        {
            return Err(CpuError::OverlappingRegions);
        }
        for (addr, _) in &self.instructions {
            if !self.program_region.contains(*addr) {
                return Err(CpuError::OverlappingRegions);
            }
        }
        Ok(())
    }

    /// Count of negative-step loading writes: program words plus the full
    /// input-region capacity (unprovided input words load as zero).
    pub fn loading_len(&self) -> usize {
        self.instructions.len() + self.input_region.len as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    memory: BTreeMap<Word, MemoryCell>,
    pub pc: Word,
    pub step_counter: i64,
    pub status: Status,
    pub program_region: Region,
    pub input_region: Region,
}

impl Machine {
    /// Value and last-writing step of a cell; unmapped cells read as zero,
    /// never written.
    pub fn read(&self, addr: Word) -> MemoryCell {
        if addr == 0 {
            return MemoryCell::default();
        }
        self.memory.get(&addr).copied().unwrap_or_default()
    }

    fn write(&mut self, addr: Word, value: Word, step: i64) {
        if addr == 0 {
            return; // null cell: recorded but discarded
        }
        self.memory.insert(addr, MemoryCell { value, last_step: LastStep::Step(step) });
    }

    fn is_read_only(&self, addr: Word) -> bool {
        self.program_region.contains(addr) || self.input_region.contains(addr)
    }
}

/// Load a program and its input words into a fresh machine.
///
/// Returns the machine and the loading trace: one write-only entry per
/// program word, then per input-region word, at step indices -m..-1. Every
/// loading entry has zeroed reads and `write_pc` equal to the entry pc.
pub fn load_program(
    program: &Program,
    input_words: &[Word],
) -> Result<(Machine, Vec<FullTraceEntry>), CpuError> {
    program.validate()?;
    let capacity = program.input_region.len as usize;
    if input_words.len() > capacity {
        return Err(CpuError::InputTooLong { got: input_words.len(), capacity });
    }

    let mut writes: Vec<(Word, Word)> = program.instructions.clone();
    for i in 0..capacity {
        let value = input_words.get(i).copied().unwrap_or(0);
        writes.push((program.input_region.base + i as Word, value));
    }

    let m = writes.len() as i64;
    let mut machine = Machine {
        memory: BTreeMap::new(),
        pc: program.entry_pc,
        step_counter: 0,
        status: Status::Running,
        program_region: program.program_region,
        input_region: program.input_region,
    };
    let mut entries = Vec::with_capacity(writes.len());
    for (offset, (addr, value)) in writes.into_iter().enumerate() {
        let step = -m + offset as i64;
        machine.write(addr, value, step);
        entries.push(FullTraceEntry {
            write_address: addr,
            write_value: value,
            write_pc: program.entry_pc,
            ..Default::default()
        });
    }
    Ok((machine, entries))
}

/// Overrides applied to a single step; the fault-injection hook. `None`
/// everywhere reproduces the honest step.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepOverride {
    /// Fetch the opcode from (and account the step to) this pc instead.
    pub pc: Option<Word>,
    /// Use this opcode regardless of what memory holds at the fetch address.
    pub opcode: Option<Word>,
    pub read1_address: Option<Word>,
    pub read1_value: Option<Word>,
    pub read1_last_step: Option<LastStep>,
    pub read2_address: Option<Word>,
    pub read2_value: Option<Word>,
    pub read2_last_step: Option<LastStep>,
    pub write_address: Option<Word>,
    pub write_value: Option<Word>,
    pub write_pc: Option<Word>,
}

/// Execute one instruction, returning the successor machine and its trace
/// entry.
pub fn step(machine: &Machine) -> Result<(Machine, FullTraceEntry), CpuError> {
    step_with(machine, &StepOverride::default())
}

/// `step` with field overrides. Overridden reads feed the computation, and
/// overridden outputs are applied to memory and pc, so a single corrupted
/// step cascades into a coherent (but wrong) successor state.
pub fn step_with(
    machine: &Machine,
    forced: &StepOverride,
) -> Result<(Machine, FullTraceEntry), CpuError> {
    if !machine.status.is_running() {
        return Err(CpuError::NotRunning);
    }
    let mut next = machine.clone();
    let step_index = machine.step_counter;

    let pc = forced.pc.unwrap_or(machine.pc);
    let fetched = machine.read(pc).value;
    let opcode = forced.opcode.unwrap_or(fetched);
    let instr = isa::decode(opcode);

    let (mut r1_addr, mut r1_val, mut r1_last) = (0, 0, LastStep::Initial);
    if let Some(addr) = instr.read1_address() {
        let addr = forced.read1_address.unwrap_or(addr);
        let cell = machine.read(addr);
        r1_addr = addr;
        r1_val = cell.value;
        r1_last = cell.last_step;
    }
    if let Some(v) = forced.read1_value {
        r1_val = v;
    }
    if let Some(ls) = forced.read1_last_step {
        r1_last = ls;
    }

    let (mut r2_addr, mut r2_val, mut r2_last) = (0, 0, LastStep::Initial);
    if let Some(addr) = instr.read2_address(r1_val) {
        let addr = forced.read2_address.unwrap_or(addr);
        let cell = machine.read(addr);
        r2_addr = addr;
        r2_val = cell.value;
        r2_last = cell.last_step;
    }
    if let Some(v) = forced.read2_value {
        r2_val = v;
    }
    if let Some(ls) = forced.read2_last_step {
        r2_last = ls;
    }

    let effect = instr.apply(r1_val, r2_val, pc);
    let mut write_address = forced.write_address.unwrap_or(effect.write_address);
    let mut write_value = forced.write_value.unwrap_or(effect.write_value);
    let mut write_pc = forced.write_pc.unwrap_or(effect.next_pc);

    match effect.outcome {
        StepOutcome::Continue => {
            if (write_address, write_value) != (0, 0) && machine.is_read_only(write_address) {
                // a trapping step records no write and a stuck pc
                next.status = Status::Trapped(FaultKind::ReadOnlyWrite);
                write_address = 0;
                write_value = 0;
                write_pc = forced.write_pc.unwrap_or(pc);
            } else {
                next.write(write_address, write_value, step_index);
            }
        }
        StepOutcome::Halt => next.status = Status::Halted(r1_val),
        StepOutcome::Trap => next.status = Status::Trapped(FaultKind::IllegalInstruction),
    }

    next.pc = write_pc;
    next.step_counter = step_index + 1;

    let entry = FullTraceEntry {
        read1_address: r1_addr,
        read1_value: r1_val,
        read1_last_step: r1_last,
        read2_address: r2_addr,
        read2_value: r2_val,
        read2_last_step: r2_last,
        read_pc_address: pc,
        read_pc_opcode: opcode,
        write_address,
        write_value,
        write_pc,
    };
    Ok((next, entry))
}

/// Run until the machine halts, traps, or `max_steps` is reached. Still
/// running at the budget is an error (the program does not fit the agreed
/// search depth).
pub fn run(machine: Machine, max_steps: u64) -> Result<(Machine, Vec<FullTraceEntry>), CpuError> {
    let (m, trace) = run_to_budget(machine, max_steps);
    if m.status.is_running() {
        return Err(CpuError::StepBudgetExceeded(max_steps));
    }
    Ok((m, trace))
}

/// Like `run` but a still-running machine at the budget is returned as-is;
/// the dispute needs full-length traces for programs that never terminate.
pub fn run_to_budget(mut machine: Machine, max_steps: u64) -> (Machine, Vec<FullTraceEntry>) {
    let mut trace = Vec::new();
    while machine.status.is_running() && (trace.len() as u64) < max_steps {
        let (next, entry) = step(&machine).expect("running machine steps");
        trace.push(entry);
        machine = next;
    }
    (machine, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{encode, Instruction};
    use crate::trace::{last_step_oracle, FullTrace};

    fn tiny_program(words: &[Word]) -> Program {
        Program::from_words(0x100, words, Region::new(64, 2))
    }

    #[test]
    fn loading_entries_at_negative_indices() {
        let p = tiny_program(&[
            encode(Instruction::Addi { rd: 1, rs1: 0, imm: 5 }),
            encode(Instruction::Halt),
        ]);
        // 2 program words + 2 input words -> m = 4, indices -4..-1
        let (machine, loading) = load_program(&p, &[9]).unwrap();
        assert_eq!(loading.len(), 4);
        assert_eq!(machine.read(0x100).last_step, LastStep::Step(-4));
        assert_eq!(machine.read(0x104).last_step, LastStep::Step(-3));
        assert_eq!(machine.read(64), MemoryCell { value: 9, last_step: LastStep::Step(-2) });
        assert_eq!(machine.read(65), MemoryCell { value: 0, last_step: LastStep::Step(-1) });
        for e in &loading {
            assert_eq!(e.write_pc, 0x100);
            assert_eq!(e.read1_last_step, LastStep::Initial);
            assert_eq!((e.read1_address, e.read2_address), (0, 0));
        }
    }

    #[test]
    fn empty_program_loads_empty_trace() {
        let p = Program::from_words(0x100, &[], Region::new(64, 0));
        let (machine, loading) = load_program(&p, &[]).unwrap();
        assert!(loading.is_empty());
        assert_eq!(machine.read(0x100), MemoryCell::default());
    }

    #[test]
    fn overlapping_regions_rejected() {
        let p = Program {
            instructions: vec![],
            program_region: Region::new(60, 10),
            input_region: Region::new(64, 4),
            entry_pc: 60,
        };
        assert_eq!(load_program(&p, &[]).unwrap_err(), CpuError::OverlappingRegions);
        let q = Program {
            instructions: vec![],
            program_region: Region::new(16, 8),
            input_region: Region::new(64, 1),
            entry_pc: 16,
        };
        assert_eq!(load_program(&q, &[]).unwrap_err(), CpuError::OverlappingRegions);
    }

    #[test]
    fn add_produces_sum_and_next_pc() {
        let p = tiny_program(&[
            encode(Instruction::Addi { rd: 1, rs1: 0, imm: 5 }),
            encode(Instruction::Addi { rd: 2, rs1: 0, imm: 7 }),
            encode(Instruction::Add { rd: 3, rs1: 1, rs2: 2 }),
            encode(Instruction::Halt),
        ]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        let (machine, _) = step(&machine).unwrap();
        let (machine, _) = step(&machine).unwrap();
        let (machine, entry) = step(&machine).unwrap();
        assert_eq!(entry.write_value, 12);
        assert_eq!(entry.write_address, 3);
        assert_eq!(entry.write_pc, 0x108 + 4);
        assert_eq!(machine.read(3).value, 12);
        assert_eq!(machine.read(3).last_step, LastStep::Step(2));
    }

    #[test]
    fn branch_taken_writes_nothing() {
        let p = tiny_program(&[
            encode(Instruction::Beq { rs1: 5, rs2: 6, offset: 2 }), // 0 == 0: taken
            encode(Instruction::Halt),
            encode(Instruction::Halt),
        ]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        let (_, entry) = step(&machine).unwrap();
        assert_eq!((entry.write_address, entry.write_value), (0, 0));
        assert_eq!(entry.write_pc, 0x100 + 8);
    }

    #[test]
    fn halt_reads_exit_code_from_a0() {
        let p = tiny_program(&[
            encode(Instruction::Addi { rd: 10, rs1: 0, imm: 3 }),
            encode(Instruction::Halt),
        ]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        let (machine, trace) = run(machine, 16).unwrap();
        assert_eq!(machine.status, Status::Halted(3));
        assert_eq!(trace.len(), 2);
        assert_eq!(trace[1].read1_address, 10);
        assert_eq!(trace[1].read1_value, 3);
        assert_eq!(trace[1].write_pc, 0x104);
    }

    #[test]
    fn write_into_program_region_traps() {
        let q = tiny_program(&[
            encode(Instruction::Addi { rd: 1, rs1: 0, imm: 127 }),
            encode(Instruction::Addi { rd: 1, rs1: 1, imm: 127 }),
            encode(Instruction::Addi { rd: 1, rs1: 1, imm: 2 }), // x1 = 0x100
            encode(Instruction::Sw { base: 1, src: 2, offset: 0 }),
            encode(Instruction::Halt),
        ]);
        let (mq, _) = load_program(&q, &[]).unwrap();
        let (mq, _) = step(&mq).unwrap();
        let (mq, _) = step(&mq).unwrap();
        let (mq, _) = step(&mq).unwrap();
        let (mq, entry) = step(&mq).unwrap();
        assert_eq!(mq.status, Status::Trapped(FaultKind::ReadOnlyWrite));
        // a trapping step records no write and keeps its pc; memory untouched
        assert_eq!((entry.write_address, entry.write_value), (0, 0));
        assert_eq!(mq.read(0x100).value, q.instructions[0].1);
        assert_eq!(entry.write_pc, 0x10c);
    }

    #[test]
    fn illegal_opcode_traps() {
        let p = tiny_program(&[0]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        let (machine, entry) = step(&machine).unwrap();
        assert_eq!(machine.status, Status::Trapped(FaultKind::IllegalInstruction));
        assert_eq!(entry.write_pc, 0x100);
    }

    #[test]
    fn budget_exceeded_on_infinite_loop() {
        let p = tiny_program(&[encode(Instruction::Beq { rs1: 1, rs2: 1, offset: 0 })]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        assert_eq!(
            run(machine.clone(), 64).unwrap_err(),
            CpuError::StepBudgetExceeded(64)
        );
        let (m, trace) = run_to_budget(machine, 64);
        assert!(m.status.is_running());
        assert_eq!(trace.len(), 64);
    }

    #[test]
    fn not_running_refuses_to_step() {
        let p = tiny_program(&[encode(Instruction::Halt)]);
        let (machine, _) = load_program(&p, &[]).unwrap();
        let (machine, _) = step(&machine).unwrap();
        assert_eq!(step(&machine).unwrap_err(), CpuError::NotRunning);
    }

    #[test]
    fn lw_reports_last_writing_step() {
        let p = tiny_program(&[
            encode(Instruction::Addi { rd: 1, rs1: 0, imm: 40 }),  // x1 = 40
            encode(Instruction::Sw { base: 1, src: 1, offset: 0 }), // mem[40] = 40 at step 1
            encode(Instruction::Lw { rd: 2, base: 1, offset: 0 }),  // read mem[40]
            encode(Instruction::Halt),
        ]);
        let (machine, loading) = load_program(&p, &[]).unwrap();
        let (_, trace) = run(machine, 16).unwrap();
        assert_eq!(trace[2].read2_address, 40);
        assert_eq!(trace[2].read2_last_step, LastStep::Step(1));
        // agrees with the brute-force oracle
        let full = FullTrace::new(loading, trace.clone());
        assert_eq!(last_step_oracle(&full, 40, 2), LastStep::Step(1));
    }

    #[test]
    fn determinism() {
        let p = tiny_program(&[
            encode(Instruction::Addi { rd: 1, rs1: 0, imm: 3 }),
            encode(Instruction::Addi { rd: 2, rs1: 1, imm: 4 }),
            encode(Instruction::Add { rd: 10, rs1: 1, rs2: 2 }),
            encode(Instruction::Halt),
        ]);
        let (m1, l1) = load_program(&p, &[1, 2]).unwrap();
        let (m2, l2) = load_program(&p, &[1, 2]).unwrap();
        let (f1, t1) = run(m1, 16).unwrap();
        let (f2, t2) = run(m2, 16).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(t1, t2);
        assert_eq!(f1, f2);
    }
}
