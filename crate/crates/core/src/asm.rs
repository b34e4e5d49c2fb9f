//! Line-oriented assembly for the virtual CPU, plus the raw binary program
//! form (little-endian 32-bit words).
//!
//! ```text
//! # fibonacci
//! .input 64 1          # input region: base address, word capacity
//! .org 256             # program base (default 256)
//! .entry start         # entry label (default: program base)
//! start:
//!     addi x1, x0, 0
//! loop:
//!     bne  x3, x4, loop
//!     lw   x5, 0(x2)
//!     halt
//! ```
//!
//! Branch and jump targets are labels or immediate slot offsets; `lw`/`sw`
//! use `offset(base)` addressing in cells.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::isa::{encode, Instruction, Word, PC_STRIDE};
use crate::machine::{Program, Region};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct AsmError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, AsmError> {
    Err(AsmError { line, msg: msg.into() })
}

#[derive(Clone, Debug)]
enum Operand {
    Reg(u8),
    Imm(i64),
    Label(String),
    /// `offset(base)` memory operand.
    Mem { offset: i64, base: u8 },
}

fn parse_register(tok: &str) -> Option<u8> {
    let tok = tok.trim();
    if tok.eq_ignore_ascii_case("a0") {
        return Some(10);
    }
    let rest = tok.strip_prefix('x').or_else(|| tok.strip_prefix('X'))?;
    let n: u8 = rest.parse().ok()?;
    (n < 32).then_some(n)
}

fn parse_int(tok: &str) -> Option<i64> {
    let tok = tok.trim();
    let (neg, body) = match tok.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, tok),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        body.parse().ok()?
    };
    Some(if neg { -v } else { v })
}

fn parse_operand(tok: &str, line: usize) -> Result<Operand, AsmError> {
    let tok = tok.trim();
    if let Some(r) = parse_register(tok) {
        return Ok(Operand::Reg(r));
    }
    if let Some(open) = tok.find('(') {
        let close = match tok.rfind(')') {
            Some(c) if c > open => c,
            _ => return err(line, format!("malformed memory operand `{tok}`")),
        };
        let off_str = &tok[..open];
        let offset = if off_str.trim().is_empty() {
            0
        } else {
            match parse_int(off_str) {
                Some(v) => v,
                None => return err(line, format!("bad offset in `{tok}`")),
            }
        };
        let base = match parse_register(&tok[open + 1..close]) {
            Some(r) => r,
            None => return err(line, format!("bad base register in `{tok}`")),
        };
        return Ok(Operand::Mem { offset, base });
    }
    if let Some(v) = parse_int(tok) {
        return Ok(Operand::Imm(v));
    }
    if tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !tok.is_empty() {
        return Ok(Operand::Label(tok.to_string()));
    }
    err(line, format!("unrecognized operand `{tok}`"))
}

struct PendingInstr {
    line: usize,
    mnemonic: String,
    operands: Vec<Operand>,
    slot: usize,
}

/// Assemble program text into a `Program`.
pub fn assemble(source: &str) -> Result<Program, AsmError> {
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut pending: Vec<PendingInstr> = Vec::new();
    let mut base: Word = 256;
    let mut input_region = Region::new(64, 0);
    let mut entry_label: Option<(String, usize)> = None;

    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let mut text = raw;
        for marker in ["#", "//", ";"] {
            if let Some(pos) = text.find(marker) {
                text = &text[..pos];
            }
        }
        let mut text = text.trim();
        if text.is_empty() {
            continue;
        }

        while let Some(colon) = text.find(':') {
            let label = text[..colon].trim();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return err(line, format!("bad label `{label}`"));
            }
            if labels.insert(label.to_string(), pending.len()).is_some() {
                return err(line, format!("duplicate label `{label}`"));
            }
            text = text[colon + 1..].trim();
        }
        if text.is_empty() {
            continue;
        }

        if let Some(rest) = text.strip_prefix('.') {
            let mut parts = rest.split_whitespace();
            let directive = parts.next().unwrap_or("");
            let args: Vec<&str> = parts.collect();
            match directive {
                "input" => {
                    if args.len() != 2 {
                        return err(line, ".input takes BASE and LENGTH");
                    }
                    let b = parse_int(args[0]).filter(|v| *v >= 0 && *v <= u32::MAX as i64);
                    let l = parse_int(args[1]).filter(|v| *v >= 0 && *v <= u32::MAX as i64);
                    match (b, l) {
                        (Some(b), Some(l)) => input_region = Region::new(b as Word, l as Word),
                        _ => return err(line, "bad .input arguments"),
                    }
                }
                "org" => match args.first().and_then(|a| parse_int(a)) {
                    Some(v) if v >= 0 && v <= u32::MAX as i64 => base = v as Word,
                    _ => return err(line, "bad .org address"),
                },
                "entry" => match args.first() {
                    Some(l) => entry_label = Some((l.to_string(), line)),
                    None => return err(line, ".entry takes a label"),
                },
                other => return err(line, format!("unknown directive `.{other}`")),
            }
            continue;
        }

        let (mnemonic, rest) = match text.find(char::is_whitespace) {
            Some(pos) => (&text[..pos], &text[pos..]),
            None => (text, ""),
        };
        let operands = rest
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|tok| parse_operand(tok, line))
            .collect::<Result<Vec<_>, _>>()?;
        pending.push(PendingInstr {
            line,
            mnemonic: mnemonic.to_ascii_lowercase(),
            operands,
            slot: pending.len(),
        });
    }

    let mut words = Vec::with_capacity(pending.len());
    for instr in &pending {
        words.push(encode_instr(instr, &labels)?);
    }

    let entry_pc = match entry_label {
        Some((label, line)) => match labels.get(&label) {
            Some(slot) => base + (*slot as Word) * PC_STRIDE,
            None => return err(line, format!("unknown entry label `{label}`")),
        },
        None => base,
    };

    let mut program = Program::from_words(base, &words, input_region);
    program.entry_pc = entry_pc;
    program.validate().map_err(|e| AsmError { line: 0, msg: e.to_string() })?;
    Ok(program)
}

fn branch_offset(
    target: &Operand,
    slot: usize,
    labels: &BTreeMap<String, usize>,
    line: usize,
) -> Result<i8, AsmError> {
    let delta = match target {
        Operand::Label(name) => match labels.get(name) {
            Some(t) => *t as i64 - slot as i64,
            None => return err(line, format!("unknown label `{name}`")),
        },
        Operand::Imm(v) => *v,
        _ => return err(line, "expected a label or slot offset"),
    };
    i8::try_from(delta).map_err(|_| AsmError {
        line,
        msg: format!("branch target {delta} slots away does not fit in 8 bits"),
    })
}

fn encode_instr(
    instr: &PendingInstr,
    labels: &BTreeMap<String, usize>,
) -> Result<Word, AsmError> {
    let line = instr.line;
    let ops = &instr.operands;
    let want = |n: usize| -> Result<(), AsmError> {
        if ops.len() != n {
            return err(line, format!("`{}` takes {n} operands, got {}", instr.mnemonic, ops.len()));
        }
        Ok(())
    };
    let reg = |i: usize| -> Result<u8, AsmError> {
        match ops.get(i) {
            Some(Operand::Reg(r)) => Ok(*r),
            _ => err(line, format!("operand {} of `{}` must be a register", i + 1, instr.mnemonic)),
        }
    };
    let imm8 = |i: usize| -> Result<i8, AsmError> {
        match ops.get(i) {
            Some(Operand::Imm(v)) => i8::try_from(*v)
                .map_err(|_| AsmError { line, msg: format!("immediate {v} does not fit in 8 bits") }),
            _ => err(line, format!("operand {} of `{}` must be an immediate", i + 1, instr.mnemonic)),
        }
    };
    let mem = |i: usize| -> Result<(i8, u8), AsmError> {
        match ops.get(i) {
            Some(Operand::Mem { offset, base }) => {
                let off = i8::try_from(*offset).map_err(|_| AsmError {
                    line,
                    msg: format!("offset {offset} does not fit in 8 bits"),
                })?;
                Ok((off, *base))
            }
            _ => err(line, format!("operand {} of `{}` must be offset(base)", i + 1, instr.mnemonic)),
        }
    };

    let three_reg = |f: fn(u8, u8, u8) -> Instruction| -> Result<Word, AsmError> {
        want(3)?;
        Ok(encode(f(reg(0)?, reg(1)?, reg(2)?)))
    };

    let word = match instr.mnemonic.as_str() {
        "add" => three_reg(|rd, rs1, rs2| Instruction::Add { rd, rs1, rs2 })?,
        "sub" => three_reg(|rd, rs1, rs2| Instruction::Sub { rd, rs1, rs2 })?,
        "and" => three_reg(|rd, rs1, rs2| Instruction::And { rd, rs1, rs2 })?,
        "or" => three_reg(|rd, rs1, rs2| Instruction::Or { rd, rs1, rs2 })?,
        "xor" => three_reg(|rd, rs1, rs2| Instruction::Xor { rd, rs1, rs2 })?,
        "slt" => three_reg(|rd, rs1, rs2| Instruction::Slt { rd, rs1, rs2 })?,
        "addi" => {
            want(3)?;
            encode(Instruction::Addi { rd: reg(0)?, rs1: reg(1)?, imm: imm8(2)? })
        }
        "lui" => {
            want(2)?;
            let imm = match ops.get(1) {
                Some(Operand::Imm(v)) if (0..=0xffff).contains(v) => *v as u16,
                _ => return err(line, "`lui` takes a 16-bit immediate"),
            };
            encode(Instruction::Lui { rd: reg(0)?, imm })
        }
        "lw" => {
            want(2)?;
            let (offset, base) = mem(1)?;
            encode(Instruction::Lw { rd: reg(0)?, base, offset })
        }
        "sw" => {
            want(2)?;
            let (offset, base) = mem(1)?;
            encode(Instruction::Sw { base, src: reg(0)?, offset })
        }
        "beq" | "bne" => {
            want(3)?;
            let offset = branch_offset(&ops[2], instr.slot, labels, line)?;
            let (rs1, rs2) = (reg(0)?, reg(1)?);
            if instr.mnemonic == "beq" {
                encode(Instruction::Beq { rs1, rs2, offset })
            } else {
                encode(Instruction::Bne { rs1, rs2, offset })
            }
        }
        "jal" => {
            want(2)?;
            let offset = branch_offset(&ops[1], instr.slot, labels, line)?;
            encode(Instruction::Jal { rd: reg(0)?, offset })
        }
        "jalr" => {
            want(3)?;
            encode(Instruction::Jalr { rd: reg(0)?, rs1: reg(1)?, offset: imm8(2)? })
        }
        "halt" => {
            want(0)?;
            encode(Instruction::Halt)
        }
        other => return err(line, format!("unknown mnemonic `{other}`")),
    };
    Ok(word)
}

/// Load the raw binary program form: little-endian 32-bit words laid out at
/// the default base with an input region sized to `input_capacity` words.
pub fn program_from_binary(bytes: &[u8], input_capacity: Word) -> Result<Program, AsmError> {
    if bytes.len() % 4 != 0 {
        return err(0, format!("binary program length {} is not a multiple of 4", bytes.len()));
    }
    let words: Vec<Word> = bytes
        .chunks(4)
        .map(|c| Word::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let program = Program::from_words(256, &words, Region::new(64, input_capacity));
    program.validate().map_err(|e| AsmError { line: 0, msg: e.to_string() })?;
    Ok(program)
}

/// The binary form of an assembled program (opcode words only).
pub fn program_to_binary(program: &Program) -> Vec<u8> {
    program.instructions.iter().flat_map(|(_, w)| w.to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::decode;
    use crate::machine::{load_program, run, Status};

    #[test]
    fn assembles_and_runs() {
        let src = r#"
            # doubles the input word
            .input 64 1
            .org 256
            start:
                addi x1, x0, 64
                lw   x2, 0(x1)
                add  a0, x2, x2
                halt
        "#;
        let p = assemble(src).unwrap();
        assert_eq!(p.entry_pc, 256);
        let (m, _) = load_program(&p, &[21]).unwrap();
        let (m, trace) = run(m, 64).unwrap();
        assert_eq!(m.status, Status::Halted(42));
        assert_eq!(trace.len(), 4);
    }

    #[test]
    fn labels_and_branches() {
        let src = r#"
            .input 64 0
            loop_head:
                addi x1, x1, 1
                bne  x1, x2, loop_head
                halt
        "#;
        let p = assemble(src).unwrap();
        match decode(p.instructions[1].1) {
            crate::isa::Instruction::Bne { offset, .. } => assert_eq!(offset, -1),
            other => panic!("expected bne, got {other:?}"),
        }
    }

    #[test]
    fn reports_error_line() {
        let src = "addi x1, x0, 1\nbogus x1\nhalt\n";
        let e = assemble(src).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("bogus"));
    }

    #[test]
    fn unknown_label_is_an_error() {
        let e = assemble("beq x1, x2, nowhere\n").unwrap_err();
        assert!(e.msg.contains("nowhere"));
    }

    #[test]
    fn binary_roundtrip() {
        let src = ".input 64 2\naddi x1, x0, 7\nhalt\n";
        let p = assemble(src).unwrap();
        let bin = program_to_binary(&p);
        let q = program_from_binary(&bin, 2).unwrap();
        assert_eq!(p, q);
    }
}
