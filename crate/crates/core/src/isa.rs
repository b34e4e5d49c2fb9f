//! Instruction set and encoding.
//!
//! A small fixed-field encoding: byte 3 is the operation kind, bytes 2..0 are
//! three 8-bit operand fields. Every instruction reads at most two memory
//! cells and writes at most one, so each executed step maps directly onto the
//! eleven-column trace layout. Registers are memory cells 0..31; the program
//! counter advances in strides of 4.

pub type Word = u32;

/// Number of memory-mapped registers (cells 0..31).
pub const REGISTER_COUNT: Word = 32;
/// Address of the exit-code register (`a0`).
pub const A0: Word = 10;
/// Program-counter stride between consecutive instructions.
pub const PC_STRIDE: Word = 4;

const K_ADD: u8 = 0x01;
const K_SUB: u8 = 0x02;
const K_AND: u8 = 0x03;
const K_OR: u8 = 0x04;
const K_XOR: u8 = 0x05;
const K_SLT: u8 = 0x06;
const K_ADDI: u8 = 0x07;
const K_LUI: u8 = 0x08;
const K_LW: u8 = 0x09;
const K_SW: u8 = 0x0a;
const K_BEQ: u8 = 0x0b;
const K_BNE: u8 = 0x0c;
const K_JAL: u8 = 0x0d;
const K_JALR: u8 = 0x0e;
const K_HALT: u8 = 0x0f;

/// Decoded instruction. Register operands are cell addresses 0..31;
/// branch/jump offsets are signed counts of instruction slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instruction {
    Add { rd: u8, rs1: u8, rs2: u8 },
    Sub { rd: u8, rs1: u8, rs2: u8 },
    And { rd: u8, rs1: u8, rs2: u8 },
    Or { rd: u8, rs1: u8, rs2: u8 },
    Xor { rd: u8, rs1: u8, rs2: u8 },
    Slt { rd: u8, rs1: u8, rs2: u8 },
    Addi { rd: u8, rs1: u8, imm: i8 },
    Lui { rd: u8, imm: u16 },
    Lw { rd: u8, base: u8, offset: i8 },
    Sw { base: u8, src: u8, offset: i8 },
    Beq { rs1: u8, rs2: u8, offset: i8 },
    Bne { rs1: u8, rs2: u8, offset: i8 },
    Jal { rd: u8, offset: i8 },
    Jalr { rd: u8, rs1: u8, offset: i8 },
    Halt,
    /// Unknown opcodes decode to this marker so faults stay data, not errors.
    Illegal,
}

fn reg(field: u8) -> Option<u8> {
    (field < REGISTER_COUNT as u8).then_some(field)
}

/// Total decoder: anything malformed yields `Illegal`.
pub fn decode(opcode: Word) -> Instruction {
    let kind = (opcode >> 24) as u8;
    let a = (opcode >> 16) as u8;
    let b = (opcode >> 8) as u8;
    let c = opcode as u8;
    let r3 = |f: fn(u8, u8, u8) -> Instruction| match (reg(a), reg(b), reg(c)) {
        (Some(x), Some(y), Some(z)) => f(x, y, z),
        _ => Instruction::Illegal,
    };
    match kind {
        K_ADD => r3(|rd, rs1, rs2| Instruction::Add { rd, rs1, rs2 }),
        K_SUB => r3(|rd, rs1, rs2| Instruction::Sub { rd, rs1, rs2 }),
        K_AND => r3(|rd, rs1, rs2| Instruction::And { rd, rs1, rs2 }),
        K_OR => r3(|rd, rs1, rs2| Instruction::Or { rd, rs1, rs2 }),
        K_XOR => r3(|rd, rs1, rs2| Instruction::Xor { rd, rs1, rs2 }),
        K_SLT => r3(|rd, rs1, rs2| Instruction::Slt { rd, rs1, rs2 }),
        K_ADDI => match (reg(a), reg(b)) {
            (Some(rd), Some(rs1)) => Instruction::Addi { rd, rs1, imm: c as i8 },
            _ => Instruction::Illegal,
        },
        K_LUI => match reg(a) {
            Some(rd) => Instruction::Lui { rd, imm: ((b as u16) << 8) | c as u16 },
            None => Instruction::Illegal,
        },
        K_LW => match (reg(a), reg(b)) {
            (Some(rd), Some(base)) => Instruction::Lw { rd, base, offset: c as i8 },
            _ => Instruction::Illegal,
        },
        K_SW => match (reg(a), reg(b)) {
            (Some(base), Some(src)) => Instruction::Sw { base, src, offset: c as i8 },
            _ => Instruction::Illegal,
        },
        K_BEQ => match (reg(a), reg(b)) {
            (Some(rs1), Some(rs2)) => Instruction::Beq { rs1, rs2, offset: c as i8 },
            _ => Instruction::Illegal,
        },
        K_BNE => match (reg(a), reg(b)) {
            (Some(rs1), Some(rs2)) => Instruction::Bne { rs1, rs2, offset: c as i8 },
            _ => Instruction::Illegal,
        },
        K_JAL => match reg(a) {
            Some(rd) => Instruction::Jal { rd, offset: c as i8 },
            None => Instruction::Illegal,
        },
        K_JALR => match (reg(a), reg(b)) {
            (Some(rd), Some(rs1)) => Instruction::Jalr { rd, rs1, offset: c as i8 },
            _ => Instruction::Illegal,
        },
        K_HALT => Instruction::Halt,
        _ => Instruction::Illegal,
    }
}

pub fn encode(instr: Instruction) -> Word {
    let pack = |k: u8, a: u8, b: u8, c: u8| {
        ((k as Word) << 24) | ((a as Word) << 16) | ((b as Word) << 8) | c as Word
    };
    match instr {
        Instruction::Add { rd, rs1, rs2 } => pack(K_ADD, rd, rs1, rs2),
        Instruction::Sub { rd, rs1, rs2 } => pack(K_SUB, rd, rs1, rs2),
        Instruction::And { rd, rs1, rs2 } => pack(K_AND, rd, rs1, rs2),
        Instruction::Or { rd, rs1, rs2 } => pack(K_OR, rd, rs1, rs2),
        Instruction::Xor { rd, rs1, rs2 } => pack(K_XOR, rd, rs1, rs2),
        Instruction::Slt { rd, rs1, rs2 } => pack(K_SLT, rd, rs1, rs2),
        Instruction::Addi { rd, rs1, imm } => pack(K_ADDI, rd, rs1, imm as u8),
        Instruction::Lui { rd, imm } => pack(K_LUI, rd, (imm >> 8) as u8, imm as u8),
        Instruction::Lw { rd, base, offset } => pack(K_LW, rd, base, offset as u8),
        Instruction::Sw { base, src, offset } => pack(K_SW, base, src, offset as u8),
        Instruction::Beq { rs1, rs2, offset } => pack(K_BEQ, rs1, rs2, offset as u8),
        Instruction::Bne { rs1, rs2, offset } => pack(K_BNE, rs1, rs2, offset as u8),
        Instruction::Jal { rd, offset } => pack(K_JAL, rd, 0, offset as u8),
        Instruction::Jalr { rd, rs1, offset } => pack(K_JALR, rd, rs1, offset as u8),
        Instruction::Halt => pack(K_HALT, 0, 0, 0),
        Instruction::Illegal => 0,
    }
}

/// What executing one instruction does, as a pure function of the fetched
/// opcode, the two read values and the current pc. This single definition
/// backs both the machine and the on-chain execution check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepEffect {
    /// Attempted write, zero-filled when the instruction writes nothing.
    pub write_address: Word,
    pub write_value: Word,
    pub next_pc: Word,
    pub outcome: StepOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    /// Successful exit; the exit code is the first read (register a0).
    Halt,
    /// Illegal instruction.
    Trap,
}

fn sext(x: i8) -> Word {
    x as i32 as Word
}

impl Instruction {
    /// Address of the first read operand, if the instruction has one.
    pub fn read1_address(self) -> Option<Word> {
        match self {
            Instruction::Add { rs1, .. }
            | Instruction::Sub { rs1, .. }
            | Instruction::And { rs1, .. }
            | Instruction::Or { rs1, .. }
            | Instruction::Xor { rs1, .. }
            | Instruction::Slt { rs1, .. }
            | Instruction::Addi { rs1, .. }
            | Instruction::Jalr { rs1, .. }
            | Instruction::Beq { rs1, .. }
            | Instruction::Bne { rs1, .. } => Some(rs1 as Word),
            Instruction::Lw { base, .. } | Instruction::Sw { base, .. } => Some(base as Word),
            Instruction::Halt => Some(A0),
            Instruction::Lui { .. } | Instruction::Jal { .. } | Instruction::Illegal => None,
        }
    }

    /// Address of the second read operand. Loads index memory off the first
    /// read's value, so it is a parameter here.
    pub fn read2_address(self, read1_value: Word) -> Option<Word> {
        match self {
            Instruction::Add { rs2, .. }
            | Instruction::Sub { rs2, .. }
            | Instruction::And { rs2, .. }
            | Instruction::Or { rs2, .. }
            | Instruction::Xor { rs2, .. }
            | Instruction::Slt { rs2, .. }
            | Instruction::Beq { rs2, .. }
            | Instruction::Bne { rs2, .. } => Some(rs2 as Word),
            Instruction::Lw { offset, .. } => Some(read1_value.wrapping_add(sext(offset))),
            Instruction::Sw { src, .. } => Some(src as Word),
            _ => None,
        }
    }

    /// Execute over the two (possibly unused) read values at `pc`.
    pub fn apply(self, v1: Word, v2: Word, pc: Word) -> StepEffect {
        let seq = pc.wrapping_add(PC_STRIDE);
        let eff = |wa: Word, wv: Word, npc: Word, outcome: StepOutcome| StepEffect {
            write_address: wa,
            write_value: wv,
            next_pc: npc,
            outcome,
        };
        let alu = |rd: u8, value: Word| eff(rd as Word, value, seq, StepOutcome::Continue);
        match self {
            Instruction::Add { rd, .. } => alu(rd, v1.wrapping_add(v2)),
            Instruction::Sub { rd, .. } => alu(rd, v1.wrapping_sub(v2)),
            Instruction::And { rd, .. } => alu(rd, v1 & v2),
            Instruction::Or { rd, .. } => alu(rd, v1 | v2),
            Instruction::Xor { rd, .. } => alu(rd, v1 ^ v2),
            Instruction::Slt { rd, .. } => alu(rd, ((v1 as i32) < (v2 as i32)) as Word),
            Instruction::Addi { rd, imm, .. } => alu(rd, v1.wrapping_add(sext(imm))),
            Instruction::Lui { rd, imm } => alu(rd, (imm as Word) << 16),
            Instruction::Lw { rd, .. } => alu(rd, v2),
            Instruction::Sw { offset, .. } => eff(
                v1.wrapping_add(sext(offset)),
                v2,
                seq,
                StepOutcome::Continue,
            ),
            Instruction::Beq { offset, .. } => {
                let target = pc.wrapping_add(sext(offset).wrapping_mul(PC_STRIDE));
                eff(0, 0, if v1 == v2 { target } else { seq }, StepOutcome::Continue)
            }
            Instruction::Bne { offset, .. } => {
                let target = pc.wrapping_add(sext(offset).wrapping_mul(PC_STRIDE));
                eff(0, 0, if v1 != v2 { target } else { seq }, StepOutcome::Continue)
            }
            Instruction::Jal { rd, offset } => eff(
                rd as Word,
                seq,
                pc.wrapping_add(sext(offset).wrapping_mul(PC_STRIDE)),
                StepOutcome::Continue,
            ),
            Instruction::Jalr { rd, offset, .. } => {
                eff(rd as Word, seq, v1.wrapping_add(sext(offset)), StepOutcome::Continue)
            }
            Instruction::Halt => eff(0, 0, pc, StepOutcome::Halt),
            Instruction::Illegal => eff(0, 0, pc, StepOutcome::Trap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_add() {
        let w = encode(Instruction::Add { rd: 3, rs1: 1, rs2: 2 });
        assert_eq!(decode(w), Instruction::Add { rd: 3, rs1: 1, rs2: 2 });
    }

    #[test]
    fn zero_opcode_is_illegal() {
        assert_eq!(decode(0), Instruction::Illegal);
    }

    #[test]
    fn decode_halt() {
        assert_eq!(decode(encode(Instruction::Halt)), Instruction::Halt);
    }

    #[test]
    fn out_of_range_register_is_illegal() {
        // kind ADD with operand field 32
        let w = (0x01u32 << 24) | (32 << 16);
        assert_eq!(decode(w), Instruction::Illegal);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let samples = [
            Instruction::Add { rd: 3, rs1: 1, rs2: 2 },
            Instruction::Sub { rd: 0, rs1: 31, rs2: 15 },
            Instruction::Addi { rd: 7, rs1: 7, imm: -5 },
            Instruction::Lui { rd: 1, imm: 0xbeef },
            Instruction::Lw { rd: 5, base: 2, offset: 16 },
            Instruction::Sw { base: 2, src: 5, offset: -1 },
            Instruction::Beq { rs1: 1, rs2: 2, offset: -3 },
            Instruction::Bne { rs1: 1, rs2: 2, offset: 3 },
            Instruction::Jal { rd: 5, offset: -8 },
            Instruction::Jalr { rd: 8, rs1: 5, offset: 0 },
            Instruction::Slt { rd: 4, rs1: 9, rs2: 10 },
            Instruction::Halt,
        ];
        for s in samples {
            assert_eq!(decode(encode(s)), s, "{s:?}");
        }
    }

    #[test]
    fn branch_offsets_scale_by_stride() {
        let beq = Instruction::Beq { rs1: 1, rs2: 2, offset: -3 };
        let eff = beq.apply(7, 7, 0x100);
        assert_eq!(eff.next_pc, 0x100 - 12);
        let not_taken = beq.apply(7, 8, 0x100);
        assert_eq!(not_taken.next_pc, 0x104);
    }

    #[test]
    fn slt_is_signed() {
        let slt = Instruction::Slt { rd: 3, rs1: 1, rs2: 2 };
        assert_eq!(slt.apply(u32::MAX, 0, 0).write_value, 1); // -1 < 0
        assert_eq!(slt.apply(1, 2, 0).write_value, 1);
        assert_eq!(slt.apply(2, 1, 0).write_value, 0);
    }
}
