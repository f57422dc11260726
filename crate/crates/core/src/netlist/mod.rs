//! Circuit data model and the SPICE-subset netlist format.
//!
//! A [`Circuit`] is a flat list of MOSFETs, capacitors and independent
//! voltage sources over named nets. Net `"0"` is ground and always exists.

mod corpus;
mod parse;
pub mod units;
mod write;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use corpus::random_circuit;
pub use parse::{parse, parse_with_diagnostics, Diagnostic};
pub use write::serialize;

/// Name of the ground net.
pub const GROUND: &str = "0";

/// Default minimum drawn transistor width (2 µm).
pub const MIN_FEATURE_WIDTH: f64 = 2e-6;

pub fn is_ground(net: &str) -> bool {
    net == GROUND
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown device letter '{letter}'")]
    UnknownDevice { line: usize, letter: char },
    #[error("duplicate device name '{0}'")]
    DuplicateDevice(String),
    #[error("no devices")]
    NoDevices,
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Nmos,
    Pmos,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::Nmos => "NMOS",
            Polarity::Pmos => "PMOS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mosfet {
    pub name: String,
    pub polarity: Polarity,
    pub drain: String,
    pub gate: String,
    pub source: String,
    pub bulk: String,
    /// Channel width in meters.
    pub width: f64,
    /// Channel length in meters.
    pub length: f64,
}

impl Mosfet {
    pub fn terminals(&self) -> [&str; 4] {
        [&self.drain, &self.gate, &self.source, &self.bulk]
    }
}

/// SPICE `PULSE(v1 v2 td tr tf pw per)` waveform, all values SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub v_low: f64,
    pub v_high: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    pub period: f64,
}

impl Pulse {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rise > 0.0 && self.fall > 0.0) {
            return Err("PULSE rise and fall must be positive".into());
        }
        if self.width < 0.0 || self.delay < 0.0 {
            return Err("PULSE delay and width must be non-negative".into());
        }
        if !(self.period > self.width + self.rise + self.fall) {
            return Err("PULSE period must exceed width + rise + fall".into());
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.delay {
            return self.v_low;
        }
        let tt = (t - self.delay) % self.period;
        if tt < self.rise {
            self.v_low + (self.v_high - self.v_low) * tt / self.rise
        } else if tt < self.rise + self.width {
            self.v_high
        } else if tt < self.rise + self.width + self.fall {
            self.v_high + (self.v_low - self.v_high) * (tt - self.rise - self.width) / self.fall
        } else {
            self.v_low
        }
    }

    /// Corner times of the waveform in `[0, tstop]`, ascending.
    pub fn breakpoints(&self, tstop: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut start = self.delay;
        while start <= tstop {
            for offset in [
                0.0,
                self.rise,
                self.rise + self.width,
                self.rise + self.width + self.fall,
            ] {
                let t = start + offset;
                if t <= tstop {
                    out.push(t);
                }
            }
            start += self.period;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceKind {
    Dc(f64),
    Pulse(Pulse),
}

impl SourceKind {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            SourceKind::Dc(v) => *v,
            SourceKind::Pulse(p) => p.value_at(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentSource {
    pub name: String,
    pub positive: String,
    pub negative: String,
    pub kind: SourceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacitor {
    pub name: String,
    pub positive: String,
    pub negative: String,
    /// Farads.
    pub value: f64,
}

/// Named interface nets of a cell. Ground is implicit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ports {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub vdd: Option<String>,
}

impl Ports {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty() && self.vdd.is_none()
    }

    fn all(&self) -> impl Iterator<Item = &String> {
        self.inputs.iter().chain(&self.outputs).chain(&self.vdd)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransistorCount {
    pub nmos: usize,
    pub pmos: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    nets: BTreeSet<String>,
    pub mosfets: Vec<Mosfet>,
    pub sources: Vec<IndependentSource>,
    pub capacitors: Vec<Capacitor>,
    pub ports: Ports,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        Circuit {
            nets: BTreeSet::from([GROUND.to_string()]),
            mosfets: Vec::new(),
            sources: Vec::new(),
            capacitors: Vec::new(),
            ports: Ports::default(),
        }
    }

    pub fn nets(&self) -> &BTreeSet<String> {
        &self.nets
    }

    pub fn has_net(&self, name: &str) -> bool {
        self.nets.contains(name)
    }

    pub fn device_count(&self) -> usize {
        self.mosfets.len() + self.sources.len() + self.capacitors.len()
    }

    fn device_names(&self) -> impl Iterator<Item = &str> {
        self.mosfets
            .iter()
            .map(|m| m.name.as_str())
            .chain(self.sources.iter().map(|s| s.name.as_str()))
            .chain(self.capacitors.iter().map(|c| c.name.as_str()))
    }

    fn check_name(&self, name: &str) -> Result<(), NetlistError> {
        if name.is_empty() {
            return Err(NetlistError::Invalid("empty device name".into()));
        }
        if self.device_names().any(|n| n.eq_ignore_ascii_case(name)) {
            return Err(NetlistError::DuplicateDevice(name.to_string()));
        }
        Ok(())
    }

    fn touch(&mut self, nets: &[&str]) -> Result<(), NetlistError> {
        for net in nets {
            if net.is_empty() {
                return Err(NetlistError::Invalid("empty net name".into()));
            }
            if !self.nets.contains(*net) {
                self.nets.insert(net.to_string());
            }
        }
        Ok(())
    }

    pub fn add_mosfet(&mut self, m: Mosfet) -> Result<(), NetlistError> {
        self.check_name(&m.name)?;
        if !(m.width > 0.0 && m.length > 0.0) {
            return Err(NetlistError::Invalid(format!(
                "{}: width and length must be positive",
                m.name
            )));
        }
        self.touch(&m.terminals())?;
        self.mosfets.push(m);
        Ok(())
    }

    pub fn add_capacitor(&mut self, c: Capacitor) -> Result<(), NetlistError> {
        self.check_name(&c.name)?;
        if !(c.value > 0.0) {
            return Err(NetlistError::Invalid(format!(
                "{}: capacitance must be positive",
                c.name
            )));
        }
        self.touch(&[&c.positive, &c.negative])?;
        self.capacitors.push(c);
        Ok(())
    }

    pub fn add_source(&mut self, s: IndependentSource) -> Result<(), NetlistError> {
        self.check_name(&s.name)?;
        if let SourceKind::Pulse(p) = &s.kind {
            p.validate()
                .map_err(|e| NetlistError::Invalid(format!("{}: {e}", s.name)))?;
        }
        self.touch(&[&s.positive, &s.negative])?;
        self.sources.push(s);
        Ok(())
    }

    /// Declares the cell ports. Port nets are created if no device has
    /// referenced them yet.
    pub fn set_ports(&mut self, ports: Ports) -> Result<(), NetlistError> {
        let mut seen = BTreeSet::new();
        for p in ports.all() {
            if !seen.insert(p.as_str()) {
                return Err(NetlistError::Invalid(format!("duplicate port '{p}'")));
            }
            if is_ground(p) {
                return Err(NetlistError::Invalid("ground cannot be a port".into()));
            }
        }
        let names: Vec<String> = ports.all().cloned().collect();
        for n in &names {
            self.touch(&[n])?;
        }
        self.ports = ports;
        Ok(())
    }

    pub fn mosfet(&self, name: &str) -> Option<&Mosfet> {
        self.mosfets.iter().find(|m| m.name == name)
    }

    pub fn mosfet_mut(&mut self, name: &str) -> Option<&mut Mosfet> {
        self.mosfets.iter_mut().find(|m| m.name == name)
    }

    /// The source that drives the `vdd` port against ground, if any.
    pub fn supply_source(&self) -> Option<&IndependentSource> {
        let vdd = self.ports.vdd.as_ref()?;
        self.sources
            .iter()
            .find(|s| &s.positive == vdd && is_ground(&s.negative))
    }

    /// Number of terminal references per net (ports count once each).
    pub fn net_references(&self) -> BTreeMap<&str, usize> {
        let mut refs: BTreeMap<&str, usize> = self.nets.iter().map(|n| (n.as_str(), 0)).collect();
        let terminals = self
            .mosfets
            .iter()
            .flat_map(|m| m.terminals())
            .chain(
                self.sources
                    .iter()
                    .flat_map(|s| [s.positive.as_str(), s.negative.as_str()]),
            )
            .chain(
                self.capacitors
                    .iter()
                    .flat_map(|c| [c.positive.as_str(), c.negative.as_str()]),
            )
            .chain(self.ports.all().map(String::as_str));
        for t in terminals {
            *refs.entry(t).or_default() += 1;
        }
        refs
    }

    /// Renames every occurrence of a net. Ground cannot be renamed.
    pub fn rename_net(&mut self, from: &str, to: &str) -> Result<(), NetlistError> {
        if is_ground(from) || is_ground(to) {
            return Err(NetlistError::Invalid("cannot rename ground".into()));
        }
        if !self.nets.contains(from) {
            return Err(NetlistError::Invalid(format!("unknown net '{from}'")));
        }
        if self.nets.contains(to) {
            return Err(NetlistError::Invalid(format!("net '{to}' already exists")));
        }
        let fix = |s: &mut String| {
            if s == from {
                *s = to.to_string();
            }
        };
        for m in &mut self.mosfets {
            fix(&mut m.drain);
            fix(&mut m.gate);
            fix(&mut m.source);
            fix(&mut m.bulk);
        }
        for s in &mut self.sources {
            fix(&mut s.positive);
            fix(&mut s.negative);
        }
        for c in &mut self.capacitors {
            fix(&mut c.positive);
            fix(&mut c.negative);
        }
        self.ports.inputs.iter_mut().for_each(fix);
        self.ports.outputs.iter_mut().for_each(fix);
        self.ports.vdd.iter_mut().for_each(fix);
        self.nets.remove(from);
        self.nets.insert(to.to_string());
        Ok(())
    }
}

pub fn count_transistors(c: &Circuit) -> TransistorCount {
    let nmos = c
        .mosfets
        .iter()
        .filter(|m| m.polarity == Polarity::Nmos)
        .count();
    let pmos = c.mosfets.len() - nmos;
    TransistorCount {
        nmos,
        pmos,
        total: nmos + pmos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nmos(name: &str, d: &str, g: &str, s: &str) -> Mosfet {
        Mosfet {
            name: name.into(),
            polarity: Polarity::Nmos,
            drain: d.into(),
            gate: g.into(),
            source: s.into(),
            bulk: GROUND.into(),
            width: 2e-6,
            length: 0.18e-6,
        }
    }

    #[test]
    fn ground_always_exists() {
        let c = Circuit::new();
        assert!(c.has_net("0"));
        assert_eq!(count_transistors(&c), TransistorCount::default());
    }

    #[test]
    fn duplicate_device_rejected() {
        let mut c = Circuit::new();
        c.add_mosfet(nmos("M1", "a", "b", "0")).unwrap();
        assert_eq!(
            c.add_mosfet(nmos("m1", "a", "b", "0")),
            Err(NetlistError::DuplicateDevice("m1".into()))
        );
    }

    #[test]
    fn pulse_shape() {
        let p = Pulse {
            v_low: 0.0,
            v_high: 1.0,
            delay: 1.0,
            rise: 1.0,
            fall: 1.0,
            width: 2.0,
            period: 10.0,
        };
        assert!(p.validate().is_ok());
        assert_eq!(p.value_at(0.5), 0.0);
        assert_eq!(p.value_at(1.5), 0.5);
        assert_eq!(p.value_at(3.0), 1.0);
        assert_eq!(p.value_at(4.5), 0.5);
        assert_eq!(p.value_at(8.0), 0.0);
        assert_eq!(p.value_at(11.5), 0.5);
        assert_eq!(p.breakpoints(12.0), vec![1.0, 2.0, 4.0, 5.0, 11.0, 12.0]);
        let bad = Pulse { period: 4.0, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rename_keeps_counts() {
        let mut c = Circuit::new();
        c.add_mosfet(nmos("M1", "a", "b", "0")).unwrap();
        c.set_ports(Ports {
            inputs: vec!["b".into()],
            outputs: vec!["a".into()],
            vdd: None,
        })
        .unwrap();
        c.rename_net("a", "z").unwrap();
        assert_eq!(c.mosfets[0].drain, "z");
        assert_eq!(c.ports.outputs, vec!["z".to_string()]);
        assert!(!c.has_net("a"));
        assert!(c.rename_net("0", "gnd").is_err());
    }
}
