//! Generators for GDI and pass-transistor primitives, the two 10-transistor
//! hybrid full adders, a 28-transistor static CMOS reference adder, and the
//! Boolean reference functions they are checked against.
//!
//! The internal wiring of the adders follows the stage budgets: a 4T XOR
//! producing `H = A ^ B`, a 4T stage producing `SUM = H ^ Cin`, and a 2T GDI
//! carry cell with gate `H`, PMOS source `A` and NMOS source `Cin`, so that
//! `CARRY = H ? Cin : A`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Circuit, Mosfet, Polarity, Ports, GROUND};

#[derive(Debug, Error, PartialEq)]
pub enum CellError {
    #[error("GDI configuration needs at least one variable input")]
    NoVariable,
    #[error("unknown cell '{0}'")]
    UnknownCell(String),
}

/// Boolean function over `arity` inputs, stored as a full table.
///
/// Row `r` assigns input `i` the bit `(r >> (arity - 1 - i)) & 1`, so the
/// first input is the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthFunction {
    arity: usize,
    table: Vec<bool>,
}

impl TruthFunction {
    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Self {
        let table = (0..1usize << arity)
            .map(|r| f(&row_bits(arity, r)))
            .collect();
        TruthFunction { arity, table }
    }

    pub fn from_table(arity: usize, table: Vec<bool>) -> Option<Self> {
        (table.len() == 1 << arity).then_some(TruthFunction { arity, table })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rows(&self) -> usize {
        self.table.len()
    }

    pub fn row(&self, r: usize) -> bool {
        self.table[r]
    }

    pub fn eval(&self, bits: &[bool]) -> bool {
        assert_eq!(bits.len(), self.arity, "wrong number of inputs");
        let r = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.table[r]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }
}

/// Input assignment for row `r` of an `arity`-input table.
pub fn row_bits(arity: usize, r: usize) -> Vec<bool> {
    (0..arity).map(|i| (r >> (arity - 1 - i)) & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    A,
    B,
    C,
}

impl Var {
    fn net(self) -> &'static str {
        match self {
            Var::A => "a",
            Var::B => "b",
            Var::C => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GdiInput {
    Var(Var),
    Zero,
    One,
}

impl GdiInput {
    fn net(self) -> &'static str {
        match self {
            GdiInput::Var(v) => v.net(),
            GdiInput::Zero => GROUND,
            GdiInput::One => "vdd",
        }
    }
}

impl fmt::Display for GdiInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GdiInput::Var(v) => write!(f, "{v:?}"),
            GdiInput::Zero => f.write_str("'0'"),
            GdiInput::One => f.write_str("'1'"),
        }
    }
}

/// Input assignment of a basic GDI cell: common gate `g`, PMOS source `p`,
/// NMOS source `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdiConfig {
    pub g: GdiInput,
    pub p: GdiInput,
    pub n: GdiInput,
}

impl GdiConfig {
    pub fn new(g: GdiInput, p: GdiInput, n: GdiInput) -> Result<Self, CellError> {
        let cfg = GdiConfig { g, p, n };
        if cfg.variables().is_empty() {
            return Err(CellError::NoVariable);
        }
        Ok(cfg)
    }

    /// Variables used, in A, B, C order.
    pub fn variables(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = [self.g, self.p, self.n]
            .into_iter()
            .filter_map(|i| match i {
                GdiInput::Var(v) => Some(v),
                _ => None,
            })
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn f1() -> Self {
        Self::table_row(GdiInput::Zero, GdiInput::Var(Var::B))
    }
    pub fn f2() -> Self {
        Self::table_row(GdiInput::Var(Var::B), GdiInput::One)
    }
    pub fn or() -> Self {
        Self::table_row(GdiInput::One, GdiInput::Var(Var::B))
    }
    pub fn and() -> Self {
        Self::table_row(GdiInput::Var(Var::B), GdiInput::Zero)
    }
    pub fn mux() -> Self {
        Self::table_row(GdiInput::Var(Var::C), GdiInput::Var(Var::B))
    }

    fn table_row(n: GdiInput, p: GdiInput) -> Self {
        GdiConfig {
            g: GdiInput::Var(Var::A),
            p,
            n,
        }
    }
}

/// Transistor dimensions used by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sizing {
    pub nmos_width: f64,
    pub pmos_width: f64,
    pub length: f64,
}

impl Default for Sizing {
    fn default() -> Self {
        Sizing {
            nmos_width: 2e-6,
            pmos_width: 4e-6,
            length: 0.18e-6,
        }
    }
}

/// A generated cell: circuit, declared ports, and the reference function of
/// every output port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub name: String,
    pub circuit: Circuit,
    pub golden: BTreeMap<String, TruthFunction>,
}

impl CellSpec {
    pub fn inputs(&self) -> &[String] {
        &self.circuit.ports.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.circuit.ports.outputs
    }

    /// Wraps an arbitrary circuit with no reference functions.
    pub fn from_circuit(name: impl Into<String>, circuit: Circuit) -> Self {
        CellSpec {
            name: name.into(),
            circuit,
            golden: BTreeMap::new(),
        }
    }
}

struct Builder {
    circuit: Circuit,
    sizing: Sizing,
}

impl Builder {
    fn new(sizing: Sizing) -> Self {
        Builder {
            circuit: Circuit::new(),
            sizing,
        }
    }

    fn fet(&mut self, name: &str, polarity: Polarity, d: &str, g: &str, s: &str, b: &str) {
        let width = match polarity {
            Polarity::Nmos => self.sizing.nmos_width,
            Polarity::Pmos => self.sizing.pmos_width,
        };
        self.circuit
            .add_mosfet(Mosfet {
                name: name.into(),
                polarity,
                drain: d.into(),
                gate: g.into(),
                source: s.into(),
                bulk: b.into(),
                width,
                length: self.sizing.length,
            })
            .expect("generator device names are unique");
    }

    fn pmos(&mut self, name: &str, d: &str, g: &str, s: &str, b: &str) {
        self.fet(name, Polarity::Pmos, d, g, s, b);
    }

    fn nmos(&mut self, name: &str, d: &str, g: &str, s: &str, b: &str) {
        self.fet(name, Polarity::Nmos, d, g, s, b);
    }

    fn inverter(&mut self, tag: &str, input: &str, output: &str) {
        self.pmos(&format!("MP{tag}"), output, input, "vdd", "vdd");
        self.nmos(&format!("MN{tag}"), output, input, GROUND, GROUND);
    }

    /// GDI cell: PMOS source/bulk on `p`, NMOS source/bulk on `n`.
    fn gdi(&mut self, tag: &str, out: &str, g: &str, p: &str, n: &str) {
        self.pmos(&format!("MP{tag}"), out, g, p, p);
        self.nmos(&format!("MN{tag}"), out, g, n, n);
    }

    /// 4T pass-transistor XOR: two PMOS pass each input under control of
    /// the other, a series NMOS pair pulls the output low when both are 1.
    fn ptl_xor(&mut self, tags: [&str; 2], x: &str, y: &str, out: &str, mid: &str) {
        self.pmos(&format!("MP{}", tags[0]), out, y, x, "vdd");
        self.pmos(&format!("MP{}", tags[1]), out, x, y, "vdd");
        self.nmos(&format!("MN{}", tags[0]), out, x, mid, GROUND);
        self.nmos(&format!("MN{}", tags[1]), mid, y, GROUND, GROUND);
    }

    fn finish(
        mut self,
        name: &str,
        inputs: &[&str],
        outputs: &[(&str, TruthFunction)],
    ) -> CellSpec {
        self.circuit
            .set_ports(Ports {
                inputs: inputs.iter().map(|s| s.to_string()).collect(),
                outputs: outputs.iter().map(|(s, _)| s.to_string()).collect(),
                vdd: Some("vdd".into()),
            })
            .expect("generator ports are distinct");
        CellSpec {
            name: name.into(),
            circuit: self.circuit,
            golden: outputs
                .iter()
                .map(|(s, f)| (s.to_string(), f.clone()))
                .collect(),
        }
    }
}

/// Basic GDI cell for any input configuration.
pub fn gdi_cell(cfg: GdiConfig) -> CellSpec {
    gdi_cell_sized(cfg, Sizing::default())
}

pub fn gdi_cell_sized(cfg: GdiConfig, sizing: Sizing) -> CellSpec {
    let vars = cfg.variables();
    let mut b = Builder::new(sizing);
    b.gdi("1", "out", cfg.g.net(), cfg.p.net(), cfg.n.net());
    let golden = TruthFunction::from_fn(vars.len(), |bits| {
        let value = |i: GdiInput| match i {
            GdiInput::Zero => false,
            GdiInput::One => true,
            GdiInput::Var(v) => bits[vars.iter().position(|x| *x == v).expect("used var")],
        };
        if value(cfg.g) {
            value(cfg.n)
        } else {
            value(cfg.p)
        }
    });
    let inputs: Vec<&str> = vars.iter().map(|v| v.net()).collect();
    b.finish(
        &format!("gdi(G={},P={},N={})", cfg.g, cfg.p, cfg.n),
        &inputs,
        &[("out", golden)],
    )
}

pub fn ptl_xor2() -> CellSpec {
    ptl_xor2_sized(Sizing::default())
}

pub fn ptl_xor2_sized(sizing: Sizing) -> CellSpec {
    let mut b = Builder::new(sizing);
    b.ptl_xor(["1", "2"], "a", "b", "h", "x1");
    b.finish(
        "ptl-xor2",
        &["a", "b"],
        &[("h", TruthFunction::from_fn(2, |x| x[0] ^ x[1]))],
    )
}

fn adder_golden() -> [(&'static str, TruthFunction); 2] {
    [
        (
            "sum",
            TruthFunction::from_fn(3, |x| golden_full_adder(x[0], x[1], x[2]).sum),
        ),
        (
            "carry",
            TruthFunction::from_fn(3, |x| golden_full_adder(x[0], x[1], x[2]).carry),
        ),
    ]
}

/// PTL SUM (two cascaded 4T pass XORs) plus a 2T GDI carry.
pub fn proposed_ptl_gdi_adder() -> CellSpec {
    proposed_ptl_gdi_adder_sized(Sizing::default())
}

pub fn proposed_ptl_gdi_adder_sized(sizing: Sizing) -> CellSpec {
    let mut b = Builder::new(sizing);
    b.ptl_xor(["1", "2"], "a", "b", "h", "x1");
    b.ptl_xor(["3", "4"], "h", "cin", "sum", "x2");
    b.gdi("5", "carry", "h", "a", "cin");
    b.finish("proposed-ptl-gdi", &["a", "b", "cin"], &adder_golden())
}

/// All-GDI adder: each XOR is an inverter feeding a GDI multiplexer
/// (`H = B ? !A : A`, `SUM = H ? !Cin : Cin`), plus the 2T GDI carry.
pub fn proposed_gdi_adder() -> CellSpec {
    proposed_gdi_adder_sized(Sizing::default())
}

pub fn proposed_gdi_adder_sized(sizing: Sizing) -> CellSpec {
    let mut b = Builder::new(sizing);
    b.inverter("1", "a", "an");
    b.gdi("2", "h", "b", "a", "an");
    b.inverter("3", "cin", "cinb");
    b.gdi("4", "sum", "h", "cin", "cinb");
    b.gdi("5", "carry", "h", "a", "cin");
    b.finish("proposed-gdi", &["a", "b", "cin"], &adder_golden())
}

/// Conventional 28T static CMOS full adder: complex gates for `!Cout` and
/// `!Sum` followed by output inverters.
pub fn cmos28_reference_adder() -> CellSpec {
    cmos28_reference_adder_sized(Sizing::default())
}

pub fn cmos28_reference_adder_sized(sizing: Sizing) -> CellSpec {
    let mut b = Builder::new(sizing);
    let (vdd, gnd) = ("vdd", GROUND);
    // !Cout pull-down: (A.B) + C.(A+B)
    b.nmos("MN1", "coutb", "a", "n1", gnd);
    b.nmos("MN2", "n1", "b", gnd, gnd);
    b.nmos("MN3", "coutb", "cin", "n2", gnd);
    b.nmos("MN4", "n2", "a", gnd, gnd);
    b.nmos("MN5", "n2", "b", gnd, gnd);
    // !Cout pull-up: (A+B) in series with (C + A.B)
    b.pmos("MP1", "p1", "a", vdd, vdd);
    b.pmos("MP2", "p1", "b", vdd, vdd);
    b.pmos("MP3", "coutb", "cin", "p1", vdd);
    b.pmos("MP4", "coutb", "a", "p2", vdd);
    b.pmos("MP5", "p2", "b", "p1", vdd);
    // !Sum pull-down: A.B.C + !Cout.(A+B+C)
    b.nmos("MN6", "sumb", "a", "n3", gnd);
    b.nmos("MN7", "n3", "b", "n4", gnd);
    b.nmos("MN8", "n4", "cin", gnd, gnd);
    b.nmos("MN9", "sumb", "coutb", "n5", gnd);
    b.nmos("MN10", "n5", "a", gnd, gnd);
    b.nmos("MN11", "n5", "b", gnd, gnd);
    b.nmos("MN12", "n5", "cin", gnd, gnd);
    // !Sum pull-up: (A+B+C) in series with (!Cout + A.B.C)
    b.pmos("MP6", "p3", "a", vdd, vdd);
    b.pmos("MP7", "p3", "b", vdd, vdd);
    b.pmos("MP8", "p3", "cin", vdd, vdd);
    b.pmos("MP9", "sumb", "coutb", "p3", vdd);
    b.pmos("MP10", "sumb", "a", "p4", vdd);
    b.pmos("MP11", "p4", "b", "p5", vdd);
    b.pmos("MP12", "p5", "cin", "p3", vdd);
    b.inverter("13", "coutb", "carry");
    b.inverter("14", "sumb", "sum");
    b.finish("cmos28", &["a", "b", "cin"], &adder_golden())
}

/// Static CMOS inverter, used as a calibration fixture.
pub fn inverter() -> CellSpec {
    inverter_sized(Sizing::default())
}

pub fn inverter_sized(sizing: Sizing) -> CellSpec {
    let mut b = Builder::new(sizing);
    b.inverter("1", "a", "y");
    b.finish("inverter", &["a"], &[("y", TruthFunction::from_fn(1, |x| !x[0]))])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderBits {
    pub sum: bool,
    pub carry: bool,
}

/// Reference adder built from the XOR-XOR decomposition:
/// `H = A ^ B`, `SUM = H ^ Cin`, `CARRY = !H.A + H.Cin`.
pub fn golden_full_adder(a: bool, b: bool, cin: bool) -> AdderBits {
    let h = a ^ b;
    AdderBits {
        sum: h ^ cin,
        carry: if h { cin } else { a },
    }
}

/// Attaches the full-adder reference to a parsed cell with three inputs and
/// `sum` / `carry` outputs. Other cells are returned unchanged.
pub fn with_inferred_golden(mut spec: CellSpec) -> CellSpec {
    if spec.inputs().len() != 3 || !spec.golden.is_empty() {
        return spec;
    }
    let outputs = spec.outputs().to_vec();
    if !outputs.iter().all(|o| o == "sum" || o == "carry") {
        return spec;
    }
    for (name, f) in adder_golden() {
        if outputs.iter().any(|o| o == name) {
            spec.golden.insert(name.to_string(), f);
        }
    }
    spec
}

/// Names accepted by [`by_name`].
pub const CELL_NAMES: [&str; 10] = [
    "proposed-gdi",
    "proposed-ptl-gdi",
    "cmos28",
    "ptl-xor2",
    "inverter",
    "gdi-f1",
    "gdi-f2",
    "gdi-or",
    "gdi-and",
    "gdi-mux",
];

pub fn by_name(name: &str) -> Result<CellSpec, CellError> {
    by_name_sized(name, Sizing::default())
}

pub fn by_name_sized(name: &str, sizing: Sizing) -> Result<CellSpec, CellError> {
    let mut spec = match name {
        "proposed-gdi" => proposed_gdi_adder_sized(sizing),
        "proposed-ptl-gdi" => proposed_ptl_gdi_adder_sized(sizing),
        "cmos28" => cmos28_reference_adder_sized(sizing),
        "ptl-xor2" => ptl_xor2_sized(sizing),
        "inverter" => inverter_sized(sizing),
        "gdi-f1" => gdi_cell_sized(GdiConfig::f1(), sizing),
        "gdi-f2" => gdi_cell_sized(GdiConfig::f2(), sizing),
        "gdi-or" => gdi_cell_sized(GdiConfig::or(), sizing),
        "gdi-and" => gdi_cell_sized(GdiConfig::and(), sizing),
        "gdi-mux" => gdi_cell_sized(GdiConfig::mux(), sizing),
        other => return Err(CellError::UnknownCell(other.to_string())),
    };
    spec.name = name.to_string();
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{count_transistors, parse, serialize, TransistorCount};

    fn majority(a: bool, b: bool, c: bool) -> bool {
        (a as u8 + b as u8 + c as u8) >= 2
    }

    #[test]
    fn gdi_function_rows() {
        let or = gdi_cell(GdiConfig::or()).golden["out"].clone();
        let and = gdi_cell(GdiConfig::and()).golden["out"].clone();
        let f1 = gdi_cell(GdiConfig::f1()).golden["out"].clone();
        let f2 = gdi_cell(GdiConfig::f2()).golden["out"].clone();
        let mux = gdi_cell(GdiConfig::mux()).golden["out"].clone();
        for r in 0..4 {
            let x = row_bits(2, r);
            let (a, b) = (x[0], x[1]);
            assert_eq!(or.row(r), a || b);
            assert_eq!(and.row(r), a && b);
            assert_eq!(f1.row(r), !a && b);
            assert_eq!(f2.row(r), !a || b);
        }
        for r in 0..8 {
            let x = row_bits(3, r);
            assert_eq!(mux.row(r), (!x[0] && x[1]) || (x[0] && x[2]));
        }
    }

    #[test]
    fn gdi_needs_a_variable() {
        assert_eq!(
            GdiConfig::new(GdiInput::One, GdiInput::Zero, GdiInput::One),
            Err(CellError::NoVariable)
        );
    }

    #[test]
    fn gdi_bulks_follow_diffusion_inputs() {
        let c = gdi_cell(GdiConfig::mux()).circuit;
        let p = c.mosfets.iter().find(|m| m.polarity == Polarity::Pmos).unwrap();
        let n = c.mosfets.iter().find(|m| m.polarity == Polarity::Nmos).unwrap();
        assert_eq!((p.source.as_str(), p.bulk.as_str(), p.gate.as_str()), ("b", "b", "a"));
        assert_eq!((n.source.as_str(), n.bulk.as_str(), n.gate.as_str()), ("c", "c", "a"));
        assert_eq!(p.drain, n.drain);
    }

    #[test]
    fn golden_examples() {
        assert_eq!(golden_full_adder(true, false, true), AdderBits { sum: false, carry: true });
        assert_eq!(golden_full_adder(false, true, true), AdderBits { sum: false, carry: true });
        assert_eq!(golden_full_adder(false, false, true), AdderBits { sum: true, carry: false });
    }

    #[test]
    fn xor_decomposition_is_a_full_adder() {
        for r in 0..8 {
            let x = row_bits(3, r);
            let g = golden_full_adder(x[0], x[1], x[2]);
            assert_eq!(g.carry, majority(x[0], x[1], x[2]));
            assert_eq!(g.sum, x[0] ^ x[1] ^ x[2]);
        }
    }

    #[test]
    fn transistor_budgets() {
        let ten = TransistorCount { nmos: 5, pmos: 5, total: 10 };
        assert_eq!(count_transistors(&proposed_gdi_adder().circuit), ten);
        assert_eq!(count_transistors(&proposed_ptl_gdi_adder().circuit), ten);
        assert_eq!(count_transistors(&cmos28_reference_adder().circuit).total, 28);
        assert_eq!(
            count_transistors(&ptl_xor2().circuit),
            TransistorCount { nmos: 2, pmos: 2, total: 4 }
        );
    }

    #[test]
    fn carry_cell_wiring() {
        for cell in [proposed_gdi_adder(), proposed_ptl_gdi_adder()] {
            let c = &cell.circuit;
            let p = c.mosfet("MP5").unwrap();
            let n = c.mosfet("MN5").unwrap();
            assert_eq!((p.gate.as_str(), p.source.as_str(), p.drain.as_str()), ("h", "a", "carry"));
            assert_eq!((n.gate.as_str(), n.source.as_str(), n.drain.as_str()), ("h", "cin", "carry"));
        }
    }

    #[test]
    fn golden_arity_matches_inputs() {
        for name in CELL_NAMES {
            let cell = by_name(name).unwrap();
            for f in cell.golden.values() {
                assert_eq!(f.arity(), cell.inputs().len(), "{name}");
            }
            assert_eq!(cell.golden.len(), cell.outputs().len());
        }
    }

    #[test]
    fn generated_cells_round_trip() {
        for name in CELL_NAMES {
            let cell = by_name(name).unwrap();
            assert_eq!(parse(&serialize(&cell.circuit)).unwrap(), cell.circuit, "{name}");
        }
        assert!(by_name("agarwal").is_err());
    }
}
