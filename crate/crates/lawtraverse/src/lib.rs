//! Planning compute-optimal adaptive training runs.
//!
//! The pipeline: fit saturating power laws `E = a(C+d)^(-b) + c` to measured
//! training runs ([`fit`]), partition the error axis by which model shape buys
//! error reduction cheapest ([`traverse`]), simulate the composed adaptive
//! trajectory and its compute-optimal frontier ([`trajectory`]), and convert
//! schedules into concrete FLOP and carbon budgets ([`flops`]).
//! [`synth`] generates deterministic synthetic run data and houses an
//! independent brute-force oracle for cross-checking the scheduler.

pub mod fit;
pub mod flops;
pub mod io;
pub mod law;
pub mod synth;
pub mod trajectory;
pub mod traverse;

pub use law::{CostUnit, LawError, LawFamily, PowerLaw};
