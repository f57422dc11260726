//! Small analog transient simulator.
//!
//! Level-1 MOSFETs, dense modified nodal analysis, Newton per time point,
//! trapezoidal capacitor companions with a backward-Euler step after each
//! source breakpoint.

mod engine;
pub mod export;
mod measure;
mod model;
mod stimulus;

pub use engine::{dc_operating_point, transient, Network, SimError, SimOptions, Waveform};
pub use measure::{crossings, measure_delay, measure_power, pdp, Crossing, Edge, MeasureError};
pub use model::{device_current, mos_eval, square_law, DeviceModel, ModelSet, MosEval};
pub use stimulus::{simulate_cell, testbench, CellRun, Stimulus};

#[cfg(test)]
mod tests;
