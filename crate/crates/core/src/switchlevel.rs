//! Switch-level evaluation with worst-case voltage bounds.
//!
//! Every transistor is an imperfect switch. An ON NMOS passes a 0 intact
//! but limits a passed 1 to `Vg - Vtn`; an ON PMOS passes a 1 intact but
//! holds a passed 0 at or above `Vg + |Vtp|`. Bounds are kept in integer
//! microvolts so propagation runs on a finite lattice.
//!
//! Evaluation alternates two phases until the set of conducting devices
//! stops changing: gate interpretation (a gate is 1 iff its level is at
//! least `Vdd/2`), then bound propagation from the driven nets through the
//! conducting devices to the least fixpoint.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::{row_bits, CellSpec, TruthFunction};
use crate::netlist::{Circuit, Polarity, GROUND};

type Microvolts = i64;

fn quantize(v: f64) -> Microvolts {
    (v * 1e6).round() as Microvolts
}

fn volts(uv: Microvolts) -> f64 {
    uv as f64 * 1e-6
}

#[derive(Debug, Error, PartialEq)]
pub enum SwitchError {
    #[error("circuit has no vdd port")]
    NoSupply,
    #[error("input port '{0}' is not assigned")]
    MissingInput(String),
    #[error("'{0}' is not a net of the circuit")]
    UnknownNet(String),
    #[error("invalid switch parameters: {0}")]
    InvalidParams(String),
    #[error("device states did not settle after {0} passes")]
    Unsettled(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Logic {
    Zero,
    One,
    HiZ,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strength {
    /// Held by a supply rail or an input driver.
    Driven,
    /// Reached through at least one transistor channel.
    Passed,
}

/// Switch-level value of a net.
///
/// For `One`, `vmax` is the highest level the net can reach; for `Zero`,
/// `vmin` is the lowest. The unused bound mirrors the used one. `HiZ` and
/// `Conflict` carry the full `[0, Vdd]` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalState {
    pub logic: Logic,
    pub vmax: f64,
    pub vmin: f64,
    pub strength: Strength,
}

impl SignalState {
    pub fn driven(bit: bool, vdd: f64) -> Self {
        let v = if bit { vdd } else { 0.0 };
        SignalState {
            logic: if bit { Logic::One } else { Logic::Zero },
            vmax: v,
            vmin: v,
            strength: Strength::Driven,
        }
    }

    /// A driven level that may sit away from the rail, e.g. a degraded
    /// input from an upstream pass network.
    pub fn driven_level(logic: Logic, level: f64) -> Self {
        SignalState {
            logic,
            vmax: level,
            vmin: level,
            strength: Strength::Driven,
        }
    }

    /// Settled level for `Zero`/`One`, `None` otherwise.
    pub fn level(&self) -> Option<f64> {
        match self.logic {
            Logic::One => Some(self.vmax),
            Logic::Zero => Some(self.vmin),
            _ => None,
        }
    }

    pub fn is_full_swing(&self, vdd: f64) -> bool {
        match self.logic {
            Logic::One => quantize(self.vmax) == quantize(vdd),
            Logic::Zero => quantize(self.vmin) == 0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchParams {
    pub vdd: f64,
    pub vtn: f64,
    pub vtp_abs: f64,
}

impl SwitchParams {
    pub fn new(vdd: f64, vtn: f64, vtp_abs: f64) -> Self {
        SwitchParams { vdd, vtn, vtp_abs }
    }

    pub fn validate(&self) -> Result<(), SwitchError> {
        if !(self.vdd > 0.0) {
            return Err(SwitchError::InvalidParams("vdd must be positive".into()));
        }
        if !(self.vtn > 0.0 && self.vtp_abs > 0.0) {
            return Err(SwitchError::InvalidParams("thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDiagnostic {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub states: BTreeMap<String, SignalState>,
    pub diagnostics: Vec<SwitchDiagnostic>,
}

impl Evaluation {
    pub fn state(&self, net: &str) -> Option<&SignalState> {
        self.states.get(net)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Bound {
    one: Option<Microvolts>,
    zero: Option<Microvolts>,
    conflict: bool,
}

impl Bound {
    fn merge(&mut self, other: Bound) {
        self.one = match (self.one, other.one) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.zero = match (self.zero, other.zero) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.conflict |= other.conflict;
    }

    fn logic(&self) -> Logic {
        match (self.conflict, self.one, self.zero) {
            (true, _, _) | (_, Some(_), Some(_)) => Logic::Conflict,
            (_, Some(_), None) => Logic::One,
            (_, None, Some(_)) => Logic::Zero,
            _ => Logic::HiZ,
        }
    }

    fn level(&self) -> Option<Microvolts> {
        match self.logic() {
            Logic::One => self.one,
            Logic::Zero => self.zero,
            _ => None,
        }
    }

    fn from_state(s: &SignalState) -> Bound {
        match s.logic {
            Logic::One => Bound {
                one: Some(quantize(s.vmax)),
                ..Bound::default()
            },
            Logic::Zero => Bound {
                zero: Some(quantize(s.vmin)),
                ..Bound::default()
            },
            Logic::Conflict => Bound {
                conflict: true,
                ..Bound::default()
            },
            Logic::HiZ => Bound::default(),
        }
    }
}

struct Switch {
    polarity: Polarity,
    name: String,
    gate: usize,
    ends: [usize; 2],
}

struct Network {
    names: Vec<String>,
    switches: Vec<Switch>,
}

impl Network {
    fn new(c: &Circuit) -> Self {
        let names: Vec<String> = c.nets().iter().cloned().collect();
        let index = |n: &str| names.binary_search_by(|x| x.as_str().cmp(n)).expect("net exists");
        let switches = c
            .mosfets
            .iter()
            .map(|m| Switch {
                polarity: m.polarity,
                name: m.name.clone(),
                gate: index(&m.gate),
                ends: [index(&m.drain), index(&m.source)],
            })
            .collect();
        Network { names, switches }
    }

    fn index(&self, n: &str) -> Option<usize> {
        self.names.binary_search_by(|x| x.as_str().cmp(n)).ok()
    }
}

struct Limits {
    vdd: Microvolts,
    half: Microvolts,
    vtn: Microvolts,
    vtp: Microvolts,
}

/// What a conducting switch delivers to one end given the other end.
fn pass(sw: &Switch, gate_level: Microvolts, from: Bound, lim: &Limits) -> Bound {
    let mut out = Bound {
        conflict: from.conflict,
        ..Bound::default()
    };
    match sw.polarity {
        Polarity::Nmos => {
            out.one = from.one.map(|v| v.min(gate_level - lim.vtn).max(0));
            out.zero = from.zero;
        }
        Polarity::Pmos => {
            out.one = from.one;
            out.zero = from.zero.map(|v| v.max(gate_level + lim.vtp).min(lim.vdd));
        }
    }
    out
}

fn propagate(net: &Network, fixed: &[Option<Bound>], on: &[Option<Microvolts>], lim: &Limits) -> Vec<Bound> {
    let mut state: Vec<Bound> = fixed.iter().map(|f| f.unwrap_or_default()).collect();
    loop {
        let mut next: Vec<Bound> = fixed.iter().map(|f| f.unwrap_or_default()).collect();
        for (sw, gate) in net.switches.iter().zip(on) {
            let Some(g) = *gate else { continue };
            for (from, to) in [(sw.ends[0], sw.ends[1]), (sw.ends[1], sw.ends[0])] {
                if fixed[to].is_none() {
                    next[to].merge(pass(sw, g, state[from], lim));
                }
            }
        }
        if next == state {
            return state;
        }
        state = next;
    }
}

fn conducting(sw: &Switch, gate: &Bound, lim: &Limits) -> Option<Microvolts> {
    let level = gate.level()?;
    let high = level >= lim.half;
    let on = match sw.polarity {
        Polarity::Nmos => high,
        Polarity::Pmos => !high,
    };
    on.then_some(level)
}

/// Evaluates with arbitrary driven nets. `fixed` must include the supply.
pub fn evaluate_states(
    c: &Circuit,
    fixed: &BTreeMap<String, SignalState>,
    p: SwitchParams,
) -> Result<Evaluation, SwitchError> {
    p.validate()?;
    let net = Network::new(c);
    let lim = Limits {
        vdd: quantize(p.vdd),
        half: quantize(p.vdd / 2.0),
        vtn: quantize(p.vtn),
        vtp: quantize(p.vtp_abs),
    };
    let mut fixed_bounds: Vec<Option<Bound>> = vec![None; net.names.len()];
    fixed_bounds[net.index(GROUND).expect("ground exists")] = Some(Bound {
        zero: Some(0),
        ..Bound::default()
    });
    for (name, s) in fixed {
        let i = net.index(name).ok_or_else(|| SwitchError::UnknownNet(name.clone()))?;
        fixed_bounds[i] = Some(Bound::from_state(s));
    }

    let max_passes = net.switches.len() + 2;
    let mut on: Vec<Option<Microvolts>> = vec![None; net.switches.len()];
    let mut settled = None;
    for _ in 0..max_passes {
        let state = propagate(&net, &fixed_bounds, &on, &lim);
        let next_on: Vec<Option<Microvolts>> = net
            .switches
            .iter()
            .map(|sw| conducting(sw, &state[sw.gate], &lim))
            .collect();
        if next_on == on {
            settled = Some(state);
            break;
        }
        on = next_on;
    }
    let state = settled.ok_or(SwitchError::Unsettled(max_passes))?;

    let mut diagnostics = Vec::new();
    for sw in &net.switches {
        let logic = state[sw.gate].logic();
        if matches!(logic, Logic::HiZ | Logic::Conflict) {
            diagnostics.push(SwitchDiagnostic {
                severity: Severity::Warning,
                message: format!(
                    "{}: gate net '{}' is {:?}; device treated as OFF",
                    sw.name, net.names[sw.gate], logic
                ),
            });
        }
    }
    let states: BTreeMap<String, SignalState> = net
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let b = state[i];
            let logic = b.logic();
            let (vmax, vmin) = match b.level() {
                Some(l) => (volts(l), volts(l)),
                None => (p.vdd, 0.0),
            };
            let strength = if fixed_bounds[i].is_some() {
                Strength::Driven
            } else {
                Strength::Passed
            };
            (
                name.clone(),
                SignalState {
                    logic,
                    vmax,
                    vmin,
                    strength,
                },
            )
        })
        .collect();
    for out in &c.ports.outputs {
        if states.get(out).map(|s| s.logic) == Some(Logic::Conflict) {
            diagnostics.push(SwitchDiagnostic {
                severity: Severity::Error,
                message: format!("output '{out}' is driven to both 0 and 1"),
            });
        }
    }
    Ok(Evaluation {
        states,
        diagnostics,
    })
}

/// Evaluates the circuit with every input port driven to a full-rail bit.
pub fn evaluate(
    c: &Circuit,
    inputs: &BTreeMap<String, bool>,
    p: SwitchParams,
) -> Result<Evaluation, SwitchError> {
    let vdd = c.ports.vdd.as_ref().ok_or(SwitchError::NoSupply)?;
    let mut fixed = BTreeMap::new();
    fixed.insert(vdd.clone(), SignalState::driven(true, p.vdd));
    for port in &c.ports.inputs {
        let bit = inputs
            .get(port)
            .ok_or_else(|| SwitchError::MissingInput(port.clone()))?;
        fixed.insert(port.clone(), SignalState::driven(*bit, p.vdd));
    }
    for name in inputs.keys() {
        if !c.ports.inputs.contains(name) {
            return Err(SwitchError::UnknownNet(name.clone()));
        }
    }
    evaluate_states(c, &fixed, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub inputs: Vec<bool>,
    pub outputs: BTreeMap<String, SignalState>,
    /// Outputs whose level risks static current or weak drive downstream.
    pub degraded: Vec<String>,
    /// Outputs that are floating or in conflict.
    pub invalid: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTableReport {
    pub inputs: Vec<String>,
    pub params: SwitchParams,
    pub outputs: BTreeMap<String, TruthFunction>,
    pub rows: Vec<RowReport>,
    pub diagnostics: Vec<String>,
}

impl TruthTableReport {
    pub fn has_invalid_rows(&self) -> bool {
        self.rows.iter().any(|r| !r.invalid.is_empty())
    }

    /// Rows whose logic differs from the reference, or `None` when the cell
    /// has no reference for some output.
    pub fn mismatches(&self, spec: &CellSpec) -> Option<Vec<usize>> {
        let mut rows = Vec::new();
        for (out, table) in &self.outputs {
            let golden = spec.golden.get(out)?;
            for r in 0..table.rows() {
                if golden.row(r) != table.row(r) || !self.rows[r].invalid.is_empty() {
                    rows.push(r);
                }
            }
        }
        rows.sort_unstable();
        rows.dedup();
        Some(rows)
    }
}

/// Evaluates every input row of a cell.
pub fn truth_table(spec: &CellSpec, p: SwitchParams) -> Result<TruthTableReport, SwitchError> {
    let c = &spec.circuit;
    let inputs = c.ports.inputs.clone();
    let arity = inputs.len();
    let evaluations: Vec<Result<(Vec<bool>, Evaluation), SwitchError>> = (0..1usize << arity)
        .into_par_iter()
        .map(|r| {
            let bits = row_bits(arity, r);
            let assignment = inputs.iter().cloned().zip(bits.iter().copied()).collect();
            evaluate(c, &assignment, p).map(|e| (bits, e))
        })
        .collect();

    let mut rows = Vec::with_capacity(evaluations.len());
    let mut diagnostics = Vec::new();
    let degrade_one = quantize(p.vdd - p.vtp_abs);
    let degrade_zero = quantize(p.vtn);
    for (r, result) in evaluations.into_iter().enumerate() {
        let (bits, eval) = result?;
        let mut row = RowReport {
            inputs: bits,
            outputs: BTreeMap::new(),
            degraded: Vec::new(),
            invalid: Vec::new(),
        };
        for out in &c.ports.outputs {
            let s = eval.states[out];
            match s.logic {
                Logic::One if quantize(s.vmax) < degrade_one => row.degraded.push(out.clone()),
                Logic::Zero if quantize(s.vmin) > degrade_zero => row.degraded.push(out.clone()),
                Logic::HiZ | Logic::Conflict => row.invalid.push(out.clone()),
                _ => {}
            }
            row.outputs.insert(out.clone(), s);
        }
        for d in eval.diagnostics {
            diagnostics.push(format!("row {r}: {}", d.message));
        }
        rows.push(row);
    }
    let outputs = c
        .ports
        .outputs
        .iter()
        .map(|out| {
            let table = rows
                .iter()
                .map(|row| row.outputs[out].logic == Logic::One)
                .collect();
            (
                out.clone(),
                TruthFunction::from_table(arity, table).expect("one row per assignment"),
            )
        })
        .collect();
    Ok(TruthTableReport {
        inputs,
        params: p,
        outputs,
        rows,
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operability {
    pub operable: bool,
    pub reason: String,
}

/// Applies the `Vdd >= 2 Vt` supply rule and checks logic against the
/// cell's reference functions.
pub fn operability(spec: &CellSpec, p: SwitchParams) -> Result<Operability, SwitchError> {
    let vt = p.vtn.max(p.vtp_abs);
    let table = truth_table(spec, p)?;
    let mut reasons = Vec::new();
    if quantize(p.vdd) < 2 * quantize(vt) {
        reasons.push(format!("vdd < 2·Vt ({} V < {} V)", p.vdd, 2.0 * vt));
    }
    match table.mismatches(spec) {
        Some(rows) if !rows.is_empty() => {
            reasons.push(format!("truth table differs from reference at rows {rows:?}"))
        }
        Some(_) => {}
        None if table.has_invalid_rows() => reasons.push("floating or conflicting outputs".into()),
        None => {}
    }
    Ok(if reasons.is_empty() {
        Operability {
            operable: true,
            reason: if spec.golden.is_empty() {
                "supply rule satisfied; no reference function to compare".into()
            } else {
                "supply rule satisfied and logic matches reference".into()
            },
        }
    } else {
        Operability {
            operable: false,
            reason: reasons.join("; "),
        }
    })
}
