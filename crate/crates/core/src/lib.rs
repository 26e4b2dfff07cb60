//! Toolchain for Emucharts extended state machines.
//!
//! A model goes through [`parser`] into a [`model::Diagram`], is validated
//! by [`analyzer::accept`], and can then be executed by [`interp`] or
//! turned into a MISRA-C style module by [`codegen`]. [`harness`] compiles
//! the generated module and compares its traces against the interpreter;
//! [`lint`] checks C text against the header grammar and a small rule set.

pub mod analyzer;
pub mod assets;
pub mod codegen;
pub mod diag;
pub mod harness;
pub mod interp;
pub mod lint;
pub mod model;
pub mod num;
pub mod parser;
pub mod random;

pub use analyzer::{accept, Accepted, CheckedDiagram};
pub use diag::{Diagnostic, Severity};
pub use model::{Arc, Assignment, Diagram, Expr, MachineState, NumericType, Value};
