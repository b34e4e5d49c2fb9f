//! The bundled reference programs used by tests and the fault campaign.

use crate::asm::assemble;
use crate::isa::Word;
use crate::machine::Program;

pub const FIBONACCI_SRC: &str = include_str!("../../../programs/fibonacci.s");
pub const MEMCPY_SRC: &str = include_str!("../../../programs/memcpy.s");
pub const BRANCHES_SRC: &str = include_str!("../../../programs/branches.s");

/// A reference program together with the canonical test input.
#[derive(Clone, Debug)]
pub struct ReferenceProgram {
    pub name: &'static str,
    pub program: Program,
    pub input_words: Vec<Word>,
    /// (cell, expected value) probes of the final memory state.
    pub expected_cells: Vec<(Word, Word)>,
}

pub fn fibonacci() -> ReferenceProgram {
    ReferenceProgram {
        name: "fibonacci",
        program: assemble(FIBONACCI_SRC).expect("bundled program assembles"),
        input_words: vec![10],
        expected_cells: vec![(112, 55)],
    }
}

pub fn memcpy() -> ReferenceProgram {
    ReferenceProgram {
        name: "memcpy",
        program: assemble(MEMCPY_SRC).expect("bundled program assembles"),
        input_words: vec![11, 22, 33, 44],
        expected_cells: vec![(96, 11), (99, 44), (110, 110)],
    }
}

pub fn branches() -> ReferenceProgram {
    ReferenceProgram {
        name: "branches",
        program: assemble(BRANCHES_SRC).expect("bundled program assembles"),
        input_words: vec![4, 3],
        expected_cells: vec![],
    }
}

/// All reference programs, in a fixed order.
pub fn all() -> Vec<ReferenceProgram> {
    vec![fibonacci(), memcpy(), branches()]
}
