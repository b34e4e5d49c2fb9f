//! A desk-scale, fully simulated optimistic-verification game.
//!
//! The crate provides a traced 32-bit virtual CPU, recursive hash-chain
//! commitments over its execution trace, one-time signatures, a deterministic
//! UTXO ledger with pre-signed transaction templates, the message-linking
//! scheme that binds each response to its challenge, and the complete n-ary
//! challenge-response dispute game, plus an adversary that injects faults to
//! drive soundness testing.

pub mod adversary;
pub mod asm;
pub mod dispute;
pub mod hashchain;
pub mod isa;
pub mod ledger;
pub mod linking;
pub mod machine;
pub mod ots;
pub mod programs;
pub mod search;
pub mod trace;
pub mod transcript;

pub use isa::Word;
pub use machine::{Machine, Program, Status};
pub use trace::{FullTrace, FullTraceEntry, LastStep, TraceEntry};
