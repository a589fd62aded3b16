//! Omission-based abstraction for ground answer-set programs.
//!
//! The crate turns a ground normal program Π and a set of atoms A into the
//! smaller program omit(Π, A) over the remaining atoms, decides whether an
//! abstract answer set is concrete or spurious, explains spurious ones with
//! a generated debugging program, refines abstractions until a concrete
//! answer is found or unsatisfiability is reached, and extracts minimal
//! unsatisfiable "blocker" cores from the final abstraction.
//!
//! Module map:
//! - [`program`]: atoms, rules, programs, interpretations, omission sets
//! - [`parser`]: text format in and out
//! - [`solver`]: answer-set search (builtin, brute-force, external)
//! - [`abstraction`]: the omission operator and spuriousness checks
//! - [`debugger`]: bad-omission diagnosis for spurious abstract answers
//! - [`driver`]: refinement and blocker-extraction loops

pub mod abstraction;
pub mod debugger;
pub mod driver;
pub mod parser;
pub mod program;
pub mod solver;

pub use program::{Atom, Head, Interpretation, OmissionSet, Program, Rule, RuleShape, ShapeKey};
