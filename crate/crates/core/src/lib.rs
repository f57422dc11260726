//! Transistor-level analysis of GDI / pass-transistor full-adder cells.
//!
//! - [`netlist`]: circuit model and SPICE-subset netlist format
//! - [`cells`]: cell generators and Boolean reference functions
//! - [`switchlevel`]: voltage-bound switch-level evaluation
//! - [`transient`]: level-1 MOSFET transient simulator and measurements
//! - [`bench`]: supply-voltage sweep harness and report rendering
//! - [`sizing`]: coordinate-descent width optimizer

pub mod bench;
pub mod cells;
pub mod netlist;
pub mod sizing;
pub mod switchlevel;
pub mod transient;

pub use cells::{CellSpec, TruthFunction};
pub use netlist::{count_transistors, Circuit, Polarity, TransistorCount};
