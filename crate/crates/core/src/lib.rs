//! Core of the semtrace toolkit: a parser and tracing interpreter for a small
//! Python subset, trace serializers, input expansion, verification, and the
//! debugging-sample and self-refinement machinery. `no_std` with `alloc`.

#![no_std]

extern crate alloc;

pub mod num;
pub mod pyrepr;
pub mod subjectlang;
pub mod tracer;
pub mod inputs;
pub mod program;

pub use program::{Problem, Program, ProgramError};
pub mod formats;
pub mod verify;
pub mod refinery;
pub mod harness;
