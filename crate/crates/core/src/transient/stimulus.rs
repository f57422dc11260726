//! Standard cell stimulus: a binary count over the inputs, one state per
//! period, repeated so the last pass starts from a settled history.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::{Network, SimError, SimOptions, Waveform};
use super::measure::{crossings, measure_power, Edge, MeasureError};
use super::model::ModelSet;
use crate::cells::{row_bits, CellSpec};
use crate::netlist::{Capacitor, Circuit, IndependentSource, Pulse, SourceKind, GROUND};

/// Count stimulus. Input `i` of `n` carries bit `n - 1 - i` of the row index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Stimulus {
    pub vdd: f64,
    /// Hold time of one input state, seconds.
    pub period: f64,
    /// Rise and fall time of every input edge.
    pub edge: f64,
    /// Laps through the full count; measurements use the last one.
    pub passes: usize,
    /// Capacitive load on each output, farads.
    pub load: f64,
}

impl Default for Stimulus {
    fn default() -> Self {
        Stimulus {
            vdd: 1.8,
            period: 10e-9,
            edge: 50e-12,
            passes: 2,
            load: 10e-15,
        }
    }
}

impl Stimulus {
    pub fn at_vdd(vdd: f64) -> Self {
        Stimulus { vdd, ..Default::default() }
    }

    pub fn rows(&self, inputs: usize) -> usize {
        1 << inputs
    }

    pub fn tstop(&self, inputs: usize) -> f64 {
        (self.passes * self.rows(inputs)) as f64 * self.period
    }

    /// Start of the measured (last) pass.
    pub fn measure_start(&self, inputs: usize) -> f64 {
        ((self.passes - 1) * self.rows(inputs)) as f64 * self.period
    }

    pub fn pulse_for_bit(&self, bit: usize) -> Pulse {
        let hold = (1u64 << bit) as f64 * self.period;
        Pulse {
            v_low: 0.0,
            v_high: self.vdd,
            delay: hold,
            rise: self.edge,
            fall: self.edge,
            width: hold - self.edge,
            period: 2.0 * hold,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.vdd > 0.0 && self.period > 0.0 && self.edge > 0.0 && self.edge * 2.0 < self.period) {
            return Err(SimError::Invalid("stimulus needs vdd > 0 and 0 < 2*edge < period".into()));
        }
        if self.passes == 0 || !(self.load >= 0.0) {
            return Err(SimError::Invalid("stimulus needs passes >= 1 and load >= 0".into()));
        }
        Ok(())
    }
}

/// Cell circuit with supply, input pulses and output loads attached.
/// Independent sources already present in the cell are dropped.
pub fn testbench(spec: &CellSpec, stim: &Stimulus) -> Result<Circuit, SimError> {
    stim.validate()?;
    let mut c = spec.circuit.clone();
    c.sources.clear();
    let vdd = c
        .ports
        .vdd
        .clone()
        .ok_or_else(|| SimError::Invalid(format!("cell '{}' declares no vdd port", spec.name)))?;
    if c.ports.inputs.is_empty() {
        return Err(SimError::Invalid(format!("cell '{}' declares no inputs", spec.name)));
    }
    let invalid = |e: crate::netlist::NetlistError| SimError::Invalid(e.to_string());
    c.add_source(IndependentSource {
        name: "VDD".into(),
        positive: vdd,
        negative: GROUND.into(),
        kind: SourceKind::Dc(stim.vdd),
    })
    .map_err(invalid)?;
    let n = c.ports.inputs.len();
    for (i, net) in c.ports.inputs.clone().into_iter().enumerate() {
        c.add_source(IndependentSource {
            name: format!("VIN_{net}"),
            positive: net,
            negative: GROUND.into(),
            kind: SourceKind::Pulse(stim.pulse_for_bit(n - 1 - i)),
        })
        .map_err(invalid)?;
    }
    if stim.load > 0.0 {
        for net in c.ports.outputs.clone() {
            c.add_capacitor(Capacitor {
                name: format!("CLOAD_{net}"),
                positive: net,
                negative: GROUND.into(),
                value: stim.load,
            })
            .map_err(invalid)?;
        }
    }
    Ok(c)
}

/// A completed standard-stimulus run of one cell.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub waveform: Waveform,
    pub stimulus: Stimulus,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn simulate_cell(
    spec: &CellSpec,
    models: &ModelSet,
    stim: &Stimulus,
    opts: &SimOptions,
) -> Result<CellRun, SimError> {
    let bench = testbench(spec, stim)?;
    let opts = SimOptions {
        tstop: stim.tstop(spec.inputs().len()),
        ..*opts
    };
    let waveform = Network::new(&bench, models)?.transient(&opts)?;
    Ok(CellRun {
        waveform,
        stimulus: *stim,
        inputs: spec.inputs().to_vec(),
        outputs: spec.outputs().to_vec(),
    })
}

impl CellRun {
    fn n(&self) -> usize {
        self.inputs.len()
    }

    fn row_start(&self, r: usize) -> f64 {
        self.stimulus.measure_start(self.n()) + r as f64 * self.stimulus.period
    }

    /// Output logic per row of the last pass, sampled just before each
    /// period ends and thresholded at Vdd/2.
    pub fn sampled_table(&self) -> BTreeMap<String, Vec<bool>> {
        let rows = self.stimulus.rows(self.n());
        let half = self.stimulus.vdd / 2.0;
        let period = self.stimulus.period;
        self.outputs
            .iter()
            .map(|o| {
                let bits = (0..rows)
                    .map(|r| {
                        let t = self.row_start(r) + period - period / 100.0;
                        self.waveform.voltage_at(o, t).unwrap_or(0.0) >= half
                    })
                    .collect();
                (o.clone(), bits)
            })
            .collect()
    }

    /// Worst 50%-to-50% delay over all output transitions of the last pass.
    ///
    /// Expected output changes come from the cell's reference functions
    /// when present, otherwise from the sampled table.
    pub fn delay(&self, spec: &CellSpec) -> Result<f64, MeasureError> {
        let n = self.n();
        let rows = self.stimulus.rows(n);
        let period = self.stimulus.period;
        let half = self.stimulus.vdd / 2.0;
        let sampled = self.sampled_table();
        let w = &self.waveform;
        let expected = |o: &str, r: usize| -> bool {
            match spec.golden.get(o) {
                Some(f) if f.arity() == n => f.row(r),
                _ => sampled[o][r],
            }
        };
        let mut input_cross = Vec::with_capacity(n);
        for i in &self.inputs {
            let s = w.voltage(i).ok_or_else(|| MeasureError::UnknownNet(i.clone()))?;
            input_cross.push(crossings(&w.times, s, half));
        }
        let mut output_cross = BTreeMap::new();
        for o in &self.outputs {
            let s = w.voltage(o).ok_or_else(|| MeasureError::UnknownNet(o.clone()))?;
            output_cross.insert(o.as_str(), crossings(&w.times, s, half));
        }

        let mut worst = 0.0f64;
        for r in 0..rows {
            let prev = (r + rows - 1) % rows;
            let start = self.row_start(r);
            let end = start + period;
            let (pb, rb) = (row_bits(n, prev), row_bits(n, r));
            let edge_time = (0..n)
                .filter(|&i| pb[i] != rb[i])
                .filter_map(|i| input_cross[i].iter().find(|c| c.time >= start && c.time < end))
                .map(|c| c.time)
                .fold(f64::INFINITY, f64::min);
            if !edge_time.is_finite() {
                return Err(MeasureError::NoInputTransition(self.inputs[n - 1].clone()));
            }
            for o in &self.outputs {
                let (before, after) = (expected(o, prev), expected(o, r));
                if before == after {
                    continue;
                }
                let want = if after { Edge::Rising } else { Edge::Falling };
                let hit = output_cross[o.as_str()]
                    .iter()
                    .find(|c| c.edge == want && c.time >= edge_time && c.time < end)
                    .ok_or_else(|| MeasureError::NoTransition {
                        output: o.clone(),
                        at: edge_time,
                    })?;
                worst = worst.max(hit.time - edge_time);
            }
        }
        Ok(worst)
    }

    /// Average supply power over the last pass.
    pub fn power(&self) -> Result<f64, MeasureError> {
        let start = self.stimulus.measure_start(self.n());
        measure_power(&self.waveform, self.stimulus.vdd, start, self.stimulus.period)
    }
}
