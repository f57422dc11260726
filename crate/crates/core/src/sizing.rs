//! Coordinate-descent transistor sizing.
//!
//! Each tunable group of devices is scaled by 1.25 up or down in turn; a
//! move is kept only if it improves the objective.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::CellSpec;
use crate::netlist::MIN_FEATURE_WIDTH;
use crate::transient::{pdp, simulate_cell, MeasureError, ModelSet, SimError, SimOptions, Stimulus};

pub const STEP: f64 = 1.25;
/// A full cycle improving less than this fraction stops the search.
pub const MIN_CYCLE_GAIN: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SizingError {
    #[error("invalid sizing problem: {0}")]
    Invalid(String),
    #[error("initial widths do not yield a finite objective: {0}")]
    InfeasibleStart(String),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Pdp,
    Delay,
    Power,
}

impl std::str::FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pdp" => Ok(Objective::Pdp),
            "delay" => Ok(Objective::Delay),
            "power" => Ok(Objective::Power),
            other => Err(format!("unknown objective '{other}' (pdp, delay, power)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingProblem {
    pub cell: CellSpec,
    /// Devices moved together; each group is one coordinate.
    pub groups: Vec<Vec<String>>,
    pub w_min: f64,
    pub w_max: f64,
    pub vdd: f64,
    pub objective: Objective,
}

impl SizingProblem {
    /// Every transistor tuned on its own, in netlist order.
    pub fn all_devices(cell: CellSpec, vdd: f64, objective: Objective) -> Self {
        let groups = cell.circuit.mosfets.iter().map(|m| vec![m.name.clone()]).collect();
        SizingProblem {
            cell,
            groups,
            w_min: MIN_FEATURE_WIDTH,
            w_max: 20e-6,
            vdd,
            objective,
        }
    }

    /// Gangs NMOS/PMOS devices whose names differ only in the polarity
    /// letter after the leading `M` (`MN3` with `MP3`). Others stay single.
    pub fn paired(mut self) -> Self {
        let devices: Vec<String> = self.groups.iter().flatten().cloned().collect();
        let key = |name: &str| -> Option<String> {
            let upper = name.to_ascii_uppercase();
            let mut chars = upper.chars();
            match (chars.next(), chars.next()) {
                (Some('M'), Some('N' | 'P')) => Some(chars.as_str().to_string()),
                _ => None,
            }
        };
        let mut groups: Vec<Vec<String>> = Vec::new();
        let mut slot: BTreeMap<String, usize> = BTreeMap::new();
        for d in devices {
            match key(&d) {
                Some(k) => match slot.get(&k) {
                    Some(&i) => groups[i].push(d),
                    None => {
                        slot.insert(k, groups.len());
                        groups.push(vec![d]);
                    }
                },
                None => groups.push(vec![d]),
            }
        }
        self.groups = groups;
        self
    }

    pub fn tunable(&self) -> impl Iterator<Item = &String> {
        self.groups.iter().flatten()
    }

    pub fn validate(&self) -> Result<(), SizingError> {
        let bad = |m: &str| Err(SizingError::Invalid(m.to_string()));
        if self.w_min < MIN_FEATURE_WIDTH * (1.0 - 1e-9) {
            return bad("w_min is below the 2 µm minimum feature width");
        }
        if !(self.w_min < self.w_max) {
            return bad("w_min must be below w_max");
        }
        if self.groups.is_empty() || self.groups.iter().any(Vec::is_empty) {
            return bad("no tunable devices");
        }
        if !(self.vdd > 0.0) {
            return bad("vdd must be positive");
        }
        for d in self.tunable() {
            if self.cell.circuit.mosfet(d).is_none() {
                return Err(SizingError::Invalid(format!("unknown device '{d}'")));
            }
        }
        Ok(())
    }

    /// Widths of the tunable devices, clamped into bounds.
    pub fn initial_widths(&self) -> BTreeMap<String, f64> {
        self.tunable()
            .filter_map(|d| {
                self.cell
                    .circuit
                    .mosfet(d)
                    .map(|m| (d.clone(), m.width.clamp(self.w_min, self.w_max)))
            })
            .collect()
    }
}

/// Objective value at the given widths. Distorted outputs score `+inf`.
pub fn objective_eval(
    cell: &CellSpec,
    widths: &BTreeMap<String, f64>,
    vdd: f64,
    objective: Objective,
    models: &ModelSet,
    stim: &Stimulus,
    opts: &SimOptions,
) -> Result<f64, SizingError> {
    let mut patched = cell.clone();
    for (name, &w) in widths {
        let m = patched
            .circuit
            .mosfet_mut(name)
            .ok_or_else(|| SizingError::Invalid(format!("unknown device '{name}'")))?;
        if !(w > 0.0) {
            return Err(SizingError::Invalid(format!("width of '{name}' must be positive")));
        }
        m.width = w;
    }
    let run = simulate_cell(&patched, models, &Stimulus { vdd, ..*stim }, opts)?;
    let sampled = run.sampled_table();
    let logic_ok = patched.golden.iter().all(|(out, f)| {
        sampled
            .get(out)
            .is_none_or(|bits| bits.iter().enumerate().all(|(r, &b)| f.row(r) == b))
    });
    let delay = match run.delay(&patched) {
        Ok(d) if logic_ok => d,
        Ok(_) | Err(MeasureError::NoTransition { .. }) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    if objective == Objective::Delay {
        return Ok(delay);
    }
    let power = run.power()?;
    Ok(match objective {
        Objective::Power if delay.is_finite() => power,
        Objective::Pdp if delay.is_finite() => pdp(delay, power),
        _ => f64::INFINITY,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub widths: BTreeMap<String, f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Initial,
    Accepted,
    Rejected,
    Failed,
}

/// Every evaluated point, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub widths: BTreeMap<String, f64>,
    pub objective: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingResult {
    pub widths: BTreeMap<String, f64>,
    pub objective: f64,
    /// Accepted points only; objectives never increase.
    pub history: Vec<HistoryEntry>,
    pub evaluations: Vec<Evaluation>,
}

/// Widths live on a 1 nm drawing grid.
fn snap(w: f64) -> f64 {
    (w * 1e9).round() / 1e9
}

fn scaled(
    widths: &BTreeMap<String, f64>,
    group: &[String],
    factor: f64,
    lo: f64,
    hi: f64,
) -> Option<BTreeMap<String, f64>> {
    let mut next = widths.clone();
    let mut moved = false;
    for d in group {
        let w = next.get_mut(d)?;
        let v = snap(*w * factor).clamp(lo, hi);
        if (v - *w).abs() > 1e-15 {
            moved = true;
        }
        *w = v;
    }
    moved.then_some(next)
}

/// Minimizes the objective within `budget` evaluations, the initial point
/// included. Candidates of one coordinate are simulated in parallel.
pub fn optimize(
    p: &SizingProblem,
    models: &ModelSet,
    stim: &Stimulus,
    opts: &SimOptions,
    budget: usize,
) -> Result<SizingResult, SizingError> {
    p.validate()?;
    if budget == 0 {
        return Err(SizingError::Invalid("budget must be at least 1".into()));
    }
    let eval = |w: &BTreeMap<String, f64>| objective_eval(&p.cell, w, p.vdd, p.objective, models, stim, opts);

    let mut best_w = p.initial_widths();
    let mut best = match eval(&best_w) {
        Ok(v) if v.is_finite() => v,
        Ok(_) => return Err(SizingError::InfeasibleStart("output distorted".into())),
        Err(e) => return Err(SizingError::InfeasibleStart(e.to_string())),
    };
    let mut used = 1;
    let mut history = vec![HistoryEntry {
        widths: best_w.clone(),
        objective: best,
    }];
    let mut evaluations = vec![Evaluation {
        widths: best_w.clone(),
        objective: Some(best),
        verdict: Verdict::Initial,
        note: String::new(),
    }];

    'search: while used < budget {
        let cycle_start = best;
        for group in &p.groups {
            if used >= budget {
                break 'search;
            }
            let mut candidates: Vec<BTreeMap<String, f64>> = [STEP, 1.0 / STEP]
                .iter()
                .filter_map(|&f| scaled(&best_w, group, f, p.w_min, p.w_max))
                .collect();
            candidates.truncate(budget - used);
            used += candidates.len();
            let results: Vec<Result<f64, SizingError>> = candidates.par_iter().map(&eval).collect();

            let mut pick: Option<usize> = None;
            for (i, r) in results.iter().enumerate() {
                if let Ok(v) = r {
                    if *v < best && pick.is_none_or(|j| *v < *results[j].as_ref().expect("picked ok")) {
                        pick = Some(i);
                    }
                }
            }
            for (i, (w, r)) in candidates.iter().zip(&results).enumerate() {
                let (objective, verdict, note) = match r {
                    Ok(v) if Some(i) == pick => (Some(*v), Verdict::Accepted, String::new()),
                    Ok(v) if v.is_finite() => (Some(*v), Verdict::Rejected, String::new()),
                    Ok(v) => (Some(*v), Verdict::Rejected, "distorted output".into()),
                    Err(e) => (None, Verdict::Failed, e.to_string()),
                };
                evaluations.push(Evaluation {
                    widths: w.clone(),
                    objective,
                    verdict,
                    note,
                });
            }
            if let Some(i) = pick {
                best = *results[i].as_ref().expect("picked ok");
                best_w = candidates.swap_remove(i);
                history.push(HistoryEntry {
                    widths: best_w.clone(),
                    objective: best,
                });
            }
        }
        if cycle_start - best < MIN_CYCLE_GAIN * cycle_start.abs() {
            break;
        }
    }
    Ok(SizingResult {
        widths: best_w,
        objective: best,
        history,
        evaluations,
    })
}

/// One CSV row per evaluation: index, verdict, objective, then widths.
pub fn evaluations_csv(r: &SizingResult) -> String {
    let devices: Vec<&String> = r.widths.keys().collect();
    let mut out = String::from("eval,verdict,objective");
    for d in &devices {
        let _ = write!(out, ",{d}");
    }
    out.push_str(",note\n");
    for (i, e) in r.evaluations.iter().enumerate() {
        let verdict = match e.verdict {
            Verdict::Initial => "initial",
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::Failed => "failed",
        };
        let obj = e.objective.map_or(String::new(), |v| format!("{v:e}"));
        let _ = write!(out, "{i},{verdict},{obj}");
        for d in &devices {
            let _ = write!(out, ",{:e}", e.widths.get(*d).copied().unwrap_or(f64::NAN));
        }
        let _ = writeln!(out, ",\"{}\"", e.note.replace('"', "\"\""));
    }
    out
}

/// Copy of the cell with the given widths applied.
pub fn apply_widths(cell: &CellSpec, widths: &BTreeMap<String, f64>) -> CellSpec {
    let mut out = cell.clone();
    for (name, &w) in widths {
        if let Some(m) = out.circuit.mosfet_mut(name) {
            m.width = w;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells;

    fn fast() -> (ModelSet, Stimulus, SimOptions) {
        (
            ModelSet::default(),
            Stimulus {
                period: 2e-9,
                ..Default::default()
            },
            SimOptions {
                tstep: 10e-12,
                ..Default::default()
            },
        )
    }

    #[test]
    fn pairing_groups_by_suffix() {
        let p = SizingProblem::all_devices(cells::proposed_gdi_adder(), 1.8, Objective::Pdp).paired();
        assert!(p.groups.iter().all(|g| g.len() == 2), "{:?}", p.groups);
        assert_eq!(p.groups.len(), 5);
    }

    #[test]
    fn problem_validation() {
        let base = SizingProblem::all_devices(cells::inverter(), 1.8, Objective::Delay);
        assert!(base.validate().is_ok());
        let p = SizingProblem { w_min: 1e-6, ..base.clone() };
        assert!(matches!(p.validate(), Err(SizingError::Invalid(_))));
        let p = SizingProblem { w_max: 2e-6, ..base.clone() };
        assert!(p.validate().is_err());
        let p = SizingProblem { groups: vec![], ..base.clone() };
        assert!(p.validate().is_err());
        let p = SizingProblem {
            groups: vec![vec!["MX".into()]],
            ..base
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn budget_one_returns_start() {
        let (m, s, o) = fast();
        let p = SizingProblem::all_devices(cells::inverter(), 1.8, Objective::Delay);
        let r = optimize(&p, &m, &s, &o, 1).unwrap();
        assert_eq!(r.widths, p.initial_widths());
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn delay_objective_widens_inverter() {
        let (m, s, o) = fast();
        let p = SizingProblem::all_devices(cells::inverter(), 1.8, Objective::Delay);
        let start = p.initial_widths();
        let r = optimize(&p, &m, &s, &o, 40).unwrap();
        assert!(r.objective < r.history[0].objective);
        assert!(r.history.windows(2).all(|h| h[1].objective <= h[0].objective));
        let grown = r.widths.iter().filter(|(d, w)| **w > start[*d]).count();
        assert!(grown >= 1, "{:?}", r.widths);
        assert!(r.widths.values().all(|w| *w >= p.w_min && *w <= p.w_max));
    }

    #[test]
    fn objectives_are_consistent() {
        let (m, s, o) = fast();
        let cell = cells::inverter();
        let w = SizingProblem::all_devices(cell.clone(), 1.8, Objective::Pdp).initial_widths();
        let d = objective_eval(&cell, &w, 1.8, Objective::Delay, &m, &s, &o).unwrap();
        let pw = objective_eval(&cell, &w, 1.8, Objective::Power, &m, &s, &o).unwrap();
        let e = objective_eval(&cell, &w, 1.8, Objective::Pdp, &m, &s, &o).unwrap();
        assert_eq!(e, d * pw);
        assert_eq!(e, objective_eval(&cell, &w, 1.8, Objective::Pdp, &m, &s, &o).unwrap());
    }

    #[test]
    fn distorted_start_is_infeasible() {
        let (m, s, o) = fast();
        let p = SizingProblem::all_devices(cells::proposed_gdi_adder(), 0.8, Objective::Pdp);
        let w = p.initial_widths();
        let v = objective_eval(&p.cell, &w, 0.8, Objective::Pdp, &m, &s, &o).unwrap();
        assert_eq!(v, f64::INFINITY);
        assert!(matches!(optimize(&p, &m, &s, &o, 5), Err(SizingError::InfeasibleStart(_))));
    }

    #[test]
    fn csv_lists_every_evaluation() {
        let (m, s, o) = fast();
        let p = SizingProblem::all_devices(cells::inverter(), 1.8, Objective::Power);
        let r = optimize(&p, &m, &s, &o, 5).unwrap();
        let text = evaluations_csv(&r);
        assert_eq!(text.lines().count(), r.evaluations.len() + 1);
        assert!(text.starts_with("eval,verdict,objective,MN1,MP1,note"), "{text}");
    }
}
