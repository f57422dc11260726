//! Modified nodal analysis with Newton-Raphson per time point and
//! trapezoidal companion models for capacitors.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{mos_eval, ModelSet};
use crate::netlist::{is_ground, Circuit, Polarity, SourceKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("Newton iteration did not converge after {iterations} iterations (worst node '{worst_node}') at t = {time:e} s")]
    NonConvergence {
        iterations: usize,
        worst_node: String,
        time: f64,
    },
    #[error("singular circuit matrix; suspect nodes: {}", .nodes.join(", "))]
    Singular { nodes: Vec<String> },
    #[error("invalid simulation setup: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    pub tstep: f64,
    pub tstop: f64,
    pub newton_tol_v: f64,
    pub newton_tol_i: f64,
    pub max_newton_iters: usize,
    pub gmin: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tstep: 5e-12,
            tstop: 160e-9,
            newton_tol_v: 1e-6,
            newton_tol_i: 1e-9,
            max_newton_iters: 60,
            gmin: 1e-12,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tstep > 0.0 && self.tstep < self.tstop) {
            return Err(SimError::Invalid("need 0 < tstep < tstop".into()));
        }
        if !(self.newton_tol_v > 0.0 && self.newton_tol_i > 0.0 && self.gmin >= 0.0) {
            return Err(SimError::Invalid("tolerances must be positive".into()));
        }
        if self.max_newton_iters == 0 {
            return Err(SimError::Invalid("max_newton_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Node voltages and supply current sampled at every accepted time point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub times: Vec<f64>,
    /// Net names, ground excluded, in the order of `node_volts`.
    pub nets: Vec<String>,
    pub node_volts: Vec<Vec<f64>>,
    /// Current delivered by the supply source, amperes.
    pub supply_current: Vec<f64>,
}

impl Waveform {
    pub fn voltage(&self, net: &str) -> Option<&[f64]> {
        let i = self.nets.iter().position(|n| n == net)?;
        Some(&self.node_volts[i])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Linearly interpolated value of `series` at time `t`.
    pub fn interpolate(&self, series: &[f64], t: f64) -> f64 {
        let times = &self.times;
        if t <= times[0] {
            return series[0];
        }
        let k = times.partition_point(|&x| x < t);
        if k >= times.len() {
            return *series.last().expect("non-empty waveform");
        }
        let (t0, t1) = (times[k - 1], times[k]);
        let frac = (t - t0) / (t1 - t0);
        series[k - 1] + frac * (series[k] - series[k - 1])
    }

    pub fn voltage_at(&self, net: &str, t: f64) -> Option<f64> {
        if is_ground(net) {
            return Some(0.0);
        }
        self.voltage(net).map(|s| self.interpolate(s, t))
    }
}

type Node = Option<usize>;

#[derive(Debug, Clone)]
struct Fet {
    polarity: Polarity,
    d: Node,
    g: Node,
    s: Node,
    w: f64,
    l: f64,
}

#[derive(Debug, Clone)]
struct Cap {
    a: Node,
    b: Node,
    c: f64,
}

#[derive(Debug, Clone)]
struct Source {
    p: Node,
    n: Node,
    kind: SourceKind,
}

#[derive(Debug, Clone)]
struct Conductance {
    a: Node,
    b: Node,
    g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Integration {
    BackwardEuler,
    Trapezoidal,
}

/// Capacitor companion state for one time step.
struct Companion<'a> {
    h: f64,
    method: Integration,
    v_prev: &'a [f64],
    i_prev: &'a [f64],
}

/// A circuit compiled for analog simulation.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    models: ModelSet,
    fets: Vec<Fet>,
    caps: Vec<Cap>,
    sources: Vec<Source>,
    conductances: Vec<Conductance>,
    supply: Option<usize>,
}

fn v_of(x: &[f64], n: Node) -> f64 {
    n.map_or(0.0, |i| x[i])
}

impl Network {
    /// Compiles a circuit. MOSFET gate capacitance and terminal junction
    /// capacitance are lumped to ground.
    pub fn new(c: &Circuit, models: &ModelSet) -> Result<Self, SimError> {
        models.nmos.validate().map_err(SimError::Invalid)?;
        models.pmos.validate().map_err(SimError::Invalid)?;
        let names: Vec<String> = c.nets().iter().filter(|n| !is_ground(n)).cloned().collect();
        let node = |n: &str| -> Node {
            if is_ground(n) {
                None
            } else {
                Some(names.binary_search_by(|x| x.as_str().cmp(n)).expect("net exists"))
            }
        };
        let mut caps: Vec<Cap> = c
            .capacitors
            .iter()
            .map(|cap| Cap {
                a: node(&cap.positive),
                b: node(&cap.negative),
                c: cap.value,
            })
            .collect();
        let mut fets = Vec::with_capacity(c.mosfets.len());
        for m in &c.mosfets {
            let model = models.get(m.polarity);
            let f = Fet {
                polarity: m.polarity,
                d: node(&m.drain),
                g: node(&m.gate),
                s: node(&m.source),
                w: m.width,
                l: m.length,
            };
            let cg = model.gate_capacitance(m.width, m.length);
            for (n, value) in [(f.g, cg), (f.d, model.cj_term), (f.s, model.cj_term)] {
                if value > 0.0 && n.is_some() {
                    caps.push(Cap { a: n, b: None, c: value });
                }
            }
            fets.push(f);
        }
        let sources = c
            .sources
            .iter()
            .map(|s| Source {
                p: node(&s.positive),
                n: node(&s.negative),
                kind: s.kind,
            })
            .collect();
        let supply = c.supply_source().and_then(|s| c.sources.iter().position(|x| x.name == s.name));
        Ok(Network {
            names,
            models: *models,
            fets,
            caps,
            sources,
            conductances: Vec::new(),
            supply,
        })
    }

    /// Adds a linear conductance between two nets. Used by calibration
    /// fixtures; the netlist format has no resistor element.
    pub fn add_conductance(&mut self, a: &str, b: &str, g: f64) -> Result<(), SimError> {
        let a = self.lookup(a)?;
        let b = self.lookup(b)?;
        self.conductances.push(Conductance { a, b, g });
        Ok(())
    }

    fn lookup(&self, n: &str) -> Result<Node, SimError> {
        if is_ground(n) {
            return Ok(None);
        }
        self.names
            .binary_search_by(|x| x.as_str().cmp(n))
            .map(Some)
            .map_err(|_| SimError::Invalid(format!("unknown net '{n}'")))
    }

    pub fn net_names(&self) -> &[String] {
        &self.names
    }

    fn size(&self) -> usize {
        self.names.len() + self.sources.len()
    }

    fn breakpoints(&self, tstop: f64) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .sources
            .iter()
            .filter_map(|s| match s.kind {
                SourceKind::Pulse(p) => Some(p.breakpoints(tstop)),
                SourceKind::Dc(_) => None,
            })
            .flatten()
            .filter(|&t| t > 0.0)
            .collect();
        bps.push(tstop);
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
        bps
    }

    /// Assembles residual and Jacobian at `x` with sources evaluated at
    /// `t` and scaled by `source_scale`.
    fn assemble(
        &self,
        x: &[f64],
        t: f64,
        source_scale: f64,
        gmin: f64,
        companion: Option<&Companion<'_>>,
        jac: &mut DMatrix<f64>,
        res: &mut DVector<f64>,
    ) {
        jac.fill(0.0);
        res.fill(0.0);
        let n_nodes = self.names.len();

        for i in 0..n_nodes {
            jac[(i, i)] += gmin;
            res[i] += gmin * x[i];
        }

        let stamp_g = |jac: &mut DMatrix<f64>, res: &mut DVector<f64>, a: Node, b: Node, g: f64, i: f64| {
            if let Some(a) = a {
                res[a] += i;
                jac[(a, a)] += g;
                if let Some(b) = b {
                    jac[(a, b)] -= g;
                }
            }
            if let Some(b) = b {
                res[b] -= i;
                jac[(b, b)] += g;
                if let Some(a) = a {
                    jac[(b, a)] -= g;
                }
            }
        };

        for c in &self.conductances {
            let i = c.g * (v_of(x, c.a) - v_of(x, c.b));
            stamp_g(jac, res, c.a, c.b, c.g, i);
        }

        if let Some(comp) = companion {
            for (k, cap) in self.caps.iter().enumerate() {
                let v = v_of(x, cap.a) - v_of(x, cap.b);
                let (geq, i) = match comp.method {
                    Integration::BackwardEuler => {
                        let geq = cap.c / comp.h;
                        (geq, geq * (v - comp.v_prev[k]))
                    }
                    Integration::Trapezoidal => {
                        let geq = 2.0 * cap.c / comp.h;
                        (geq, geq * (v - comp.v_prev[k]) - comp.i_prev[k])
                    }
                };
                stamp_g(jac, res, cap.a, cap.b, geq, i);
            }
        }

        for f in &self.fets {
            let model = self.models.get(f.polarity);
            let e = mos_eval(model, f.polarity, f.w, f.l, v_of(x, f.d), v_of(x, f.g), v_of(x, f.s));
            let partials = [(f.d, e.d_vd), (f.g, e.d_vg), (f.s, e.d_vs)];
            if let Some(d) = f.d {
                res[d] += e.id;
                for (n, g) in partials {
                    if let Some(n) = n {
                        jac[(d, n)] += g;
                    }
                }
            }
            if let Some(s) = f.s {
                res[s] -= e.id;
                for (n, g) in partials {
                    if let Some(n) = n {
                        jac[(s, n)] -= g;
                    }
                }
            }
        }

        for (k, s) in self.sources.iter().enumerate() {
            let row = n_nodes + k;
            let current = x[row];
            if let Some(p) = s.p {
                res[p] += current;
                jac[(p, row)] += 1.0;
                jac[(row, p)] += 1.0;
            }
            if let Some(n) = s.n {
                res[n] -= current;
                jac[(n, row)] -= 1.0;
                jac[(row, n)] -= 1.0;
            }
            res[row] = v_of(x, s.p) - v_of(x, s.n) - source_scale * s.kind.value_at(t);
        }
    }

    fn newton(
        &self,
        x: &mut Vec<f64>,
        t: f64,
        source_scale: f64,
        opts: &SimOptions,
        companion: Option<&Companion<'_>>,
        max_iters: usize,
    ) -> Result<usize, SimError> {
        const MAX_STEP: f64 = 0.5;
        let n = self.size();
        let n_nodes = self.names.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut res = DVector::zeros(n);
        let mut last_dv = f64::INFINITY;
        let mut worst = 0;
        for iter in 0..=max_iters {
            self.assemble(x, t, source_scale, opts.gmin, companion, &mut jac, &mut res);
            let (mut worst_i, mut max_i) = (0, 0.0f64);
            for i in 0..n_nodes {
                if res[i].abs() > max_i {
                    max_i = res[i].abs();
                    worst_i = i;
                }
            }
            let max_branch = (n_nodes..n).map(|i| res[i].abs()).fold(0.0, f64::max);
            if iter > 0 && last_dv < opts.newton_tol_v && max_i < opts.newton_tol_i && max_branch < opts.newton_tol_v {
                return Ok(iter);
            }
            if iter == max_iters {
                worst = worst_i;
                break;
            }
            let lu = jac.clone().lu();
            let Some(delta) = lu.solve(&(-&res)) else {
                return Err(self.singular(&jac));
            };
            last_dv = 0.0;
            for i in 0..n {
                let mut d = delta[i];
                if !d.is_finite() {
                    return Err(self.singular(&jac));
                }
                if i < n_nodes {
                    d = d.clamp(-MAX_STEP, MAX_STEP);
                    last_dv = last_dv.max(d.abs());
                }
                x[i] += d;
            }
        }
        Err(SimError::NonConvergence {
            iterations: max_iters,
            worst_node: self.names.get(worst).cloned().unwrap_or_default(),
            time: t,
        })
    }

    fn singular(&self, jac: &DMatrix<f64>) -> SimError {
        let n_nodes = self.names.len();
        let mut nodes: Vec<String> = (0..n_nodes)
            .filter(|&i| jac.row(i).iter().all(|v| v.abs() < 1e-30))
            .map(|i| self.names[i].clone())
            .collect();
        if nodes.is_empty() {
            nodes = self
                .sources
                .iter()
                .filter(|s| s.p == s.n)
                .map(|_| "<shorted source>".to_string())
                .collect();
        }
        if nodes.is_empty() {
            nodes.push("<source loop>".into());
        }
        SimError::Singular { nodes }
    }

    fn solve_dc(&self, opts: &SimOptions, t: f64) -> Result<Vec<f64>, SimError> {
        let mut x = vec![0.0; self.size()];
        match self.newton(&mut x, t, 1.0, opts, None, opts.max_newton_iters) {
            Ok(_) => return Ok(x),
            Err(e @ SimError::Singular { .. }) => return Err(e),
            Err(_) => {}
        }
        // Source stepping.
        let mut x = vec![0.0; self.size()];
        let steps = 20;
        let mut last_err = None;
        for k in 1..=steps {
            let scale = k as f64 / steps as f64;
            if let Err(e) = self.newton(&mut x, t, scale, opts, None, opts.max_newton_iters) {
                last_err = Some(e);
                break;
            }
        }
        match last_err {
            None => Ok(x),
            Some(e) => Err(e),
        }
    }

    /// DC operating point with sources at their `t = 0` values.
    pub fn dc_operating_point(&self, opts: &SimOptions) -> Result<BTreeMap<String, f64>, SimError> {
        let x = self.solve_dc(opts, 0.0)?;
        Ok(self.names.iter().cloned().zip(x).collect())
    }

    fn supply_current(&self, x: &[f64]) -> f64 {
        self.supply
            .map_or(0.0, |k| -x[self.names.len() + k])
    }

    /// Transient analysis starting from the DC operating point.
    pub fn transient(&self, opts: &SimOptions) -> Result<Waveform, SimError> {
        opts.validate()?;
        let x0 = self.solve_dc(opts, 0.0)?;
        self.run(x0, opts)
    }

    /// Transient analysis from explicit initial node voltages; nets not
    /// listed start at 0 V. Source branch currents are solved at `t = 0`.
    pub fn transient_from(
        &self,
        initial: &BTreeMap<String, f64>,
        opts: &SimOptions,
    ) -> Result<Waveform, SimError> {
        opts.validate()?;
        let mut x = vec![0.0; self.size()];
        for (name, v) in initial {
            if let Some(i) = self.lookup(name)? {
                x[i] = *v;
            }
        }
        self.run(x, opts)
    }

    fn run(&self, mut x: Vec<f64>, opts: &SimOptions) -> Result<Waveform, SimError> {
        let n_nodes = self.names.len();
        let bps = self.breakpoints(opts.tstop);
        let mut v_prev: Vec<f64> = self.caps.iter().map(|c| v_of(&x, c.a) - v_of(&x, c.b)).collect();
        let mut i_prev = vec![0.0; self.caps.len()];

        let mut wave = Waveform {
            times: Vec::new(),
            nets: self.names.clone(),
            node_volts: vec![Vec::new(); n_nodes],
            supply_current: Vec::new(),
        };
        let record = |wave: &mut Waveform, t: f64, x: &[f64]| {
            wave.times.push(t);
            for (i, series) in wave.node_volts.iter_mut().enumerate() {
                series.push(x[i]);
            }
            wave.supply_current.push(self.supply_current(x));
        };

        // Consistent start: capacitor voltages frozen by a tiny step, source
        // nodes and branch currents solved.
        {
            let comp = Companion {
                h: opts.tstep * 1e-6,
                method: Integration::BackwardEuler,
                v_prev: &v_prev,
                i_prev: &i_prev,
            };
            let mut probe = x.clone();
            if self.newton(&mut probe, 0.0, 1.0, opts, Some(&comp), opts.max_newton_iters).is_ok() {
                x = probe;
                v_prev = self.caps.iter().map(|c| v_of(&x, c.a) - v_of(&x, c.b)).collect();
            }
        }
        record(&mut wave, 0.0, &x);

        let min_step = opts.tstep / 64.0;
        let mut t = 0.0;
        let mut h_nominal = opts.tstep;
        let mut after_break = true;
        let mut bp_idx = 0;
        while t < opts.tstop * (1.0 - 1e-12) {
            while bp_idx < bps.len() && bps[bp_idx] <= t + min_step * 1e-3 {
                bp_idx += 1;
            }
            let next_bp = bps.get(bp_idx).copied().unwrap_or(opts.tstop);
            let gap = next_bp - t;
            let mut h = h_nominal.min(gap);
            if gap > h_nominal && gap < 2.0 * h_nominal {
                h = gap / 2.0;
            }
            let method = if after_break {
                Integration::BackwardEuler
            } else {
                Integration::Trapezoidal
            };
            let comp = Companion {
                h,
                method,
                v_prev: &v_prev,
                i_prev: &i_prev,
            };
            let mut trial = x.clone();
            match self.newton(&mut trial, t + h, 1.0, opts, Some(&comp), opts.max_newton_iters.min(40)) {
                Ok(_) => {
                    for (k, cap) in self.caps.iter().enumerate() {
                        let v = v_of(&trial, cap.a) - v_of(&trial, cap.b);
                        i_prev[k] = match method {
                            Integration::BackwardEuler => cap.c / h * (v - v_prev[k]),
                            Integration::Trapezoidal => 2.0 * cap.c / h * (v - v_prev[k]) - i_prev[k],
                        };
                        v_prev[k] = v;
                    }
                    x = trial;
                    t += h;
                    after_break = (next_bp - t).abs() <= min_step * 1e-3;
                    record(&mut wave, t, &x);
                    h_nominal = (h_nominal * 2.0).min(opts.tstep);
                }
                Err(e @ SimError::Singular { .. }) => return Err(e),
                Err(e) => {
                    h_nominal /= 2.0;
                    if h_nominal < min_step * (1.0 - 1e-9) {
                        return Err(e);
                    }
                }
            }
        }
        Ok(wave)
    }
}

pub fn dc_operating_point(
    c: &Circuit,
    models: &ModelSet,
    opts: &SimOptions,
) -> Result<BTreeMap<String, f64>, SimError> {
    Network::new(c, models)?.dc_operating_point(opts)
}

pub fn transient(c: &Circuit, models: &ModelSet, opts: &SimOptions) -> Result<Waveform, SimError> {
    Network::new(c, models)?.transient(opts)
}
