//! Supply-voltage sweep harness: per (cell, Vdd) switch-level verdicts and
//! transient measurements, rendered as markdown, CSV or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cells::{self, CellSpec};
use crate::netlist::{self, count_transistors, TransistorCount};
use crate::switchlevel::{operability, SwitchParams};
use crate::transient::{pdp, simulate_cell, DeviceModel, MeasureError, ModelSet, SimOptions, Stimulus};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("suite needs at least one cell and one supply voltage")]
    Empty,
    #[error("invalid suite config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Netlist { path: PathBuf, message: String },
    #[error(transparent)]
    Cell(#[from] cells::CellError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "seconds", rename_all = "lowercase")]
pub enum Delay {
    Measured(f64),
    /// No clean output transition where one was due, or the sampled logic
    /// disagrees with the reference.
    Distorted,
    /// Simulation or measurement failed for another reason.
    Unavailable,
}

impl Delay {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            Delay::Measured(s) => Some(*s),
            _ => None,
        }
    }

    /// Ordering key: distorted counts as infinitely slow.
    fn rank(&self) -> Option<f64> {
        match self {
            Delay::Measured(s) => Some(*s),
            Delay::Distorted => Some(f64::INFINITY),
            Delay::Unavailable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Distorted,
    Failed,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Distorted => "distorted",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub cell: String,
    pub vdd: f64,
    pub counts: TransistorCount,
    pub operable: bool,
    pub delay: Delay,
    pub power: Option<f64>,
    pub pdp: Option<f64>,
    pub status: Status,
    pub notes: Vec<String>,
}

fn measure_one(spec: &CellSpec, vdd: f64, models: &ModelSet, stim: &Stimulus, opts: &SimOptions) -> MeasurementReport {
    let mut notes = Vec::new();
    let params = SwitchParams::new(vdd, models.vtn(), models.vtp_abs());
    let operable = match operability(spec, params) {
        Ok(o) => {
            if !o.operable {
                notes.push(format!("inoperable: {}", o.reason));
            }
            o.operable
        }
        Err(e) => {
            notes.push(format!("switch-level: {e}"));
            false
        }
    };
    let mut report = MeasurementReport {
        cell: spec.name.clone(),
        vdd,
        counts: count_transistors(&spec.circuit),
        operable,
        delay: Delay::Unavailable,
        power: None,
        pdp: None,
        status: Status::Failed,
        notes,
    };
    let stim = Stimulus { vdd, ..*stim };
    let run = match simulate_cell(spec, models, &stim, opts) {
        Ok(r) => r,
        Err(e) => {
            report.notes.push(format!("simulation: {e}"));
            return report;
        }
    };
    match run.power() {
        Ok(p) => report.power = Some(p),
        Err(e) => report.notes.push(format!("power: {e}")),
    }

    let sampled = run.sampled_table();
    let logic_ok = spec.golden.iter().all(|(out, f)| {
        sampled
            .get(out)
            .is_none_or(|bits| bits.iter().enumerate().all(|(r, &b)| f.row(r) == b))
    });
    if !logic_ok {
        report.notes.push("sampled logic differs from reference".into());
    }
    match run.delay(spec) {
        Ok(d) if logic_ok => {
            report.delay = Delay::Measured(d);
            report.status = Status::Ok;
        }
        Ok(d) => {
            report.delay = Delay::Distorted;
            report.status = Status::Distorted;
            report.notes.push(format!("raw delay {}", format_delay(d)));
        }
        Err(e @ MeasureError::NoTransition { .. }) => {
            report.delay = Delay::Distorted;
            report.status = Status::Distorted;
            report.notes.push(e.to_string());
        }
        Err(e) => report.notes.push(format!("delay: {e}")),
    }
    if report.status == Status::Distorted {
        if let Some(p) = report.power {
            report.notes.push(format!("raw power {}", format_power(p)));
        }
    }
    if report.status != Status::Failed && report.power.is_none() {
        report.status = Status::Failed;
    }
    if let (Some(d), Some(p)) = (report.delay.seconds(), report.power) {
        report.pdp = Some(pdp(d, p));
    }
    report
}

/// One report per (cell, vdd) in cell-major order. Jobs run in parallel on
/// the current rayon pool; failures are recorded in notes.
pub fn run_suite(
    cells: &[CellSpec],
    vdds: &[f64],
    models: &ModelSet,
    stim: &Stimulus,
    opts: &SimOptions,
) -> Result<Vec<MeasurementReport>, BenchError> {
    if cells.is_empty() || vdds.is_empty() {
        return Err(BenchError::Empty);
    }
    let jobs: Vec<(&CellSpec, f64)> = cells
        .iter()
        .flat_map(|c| vdds.iter().map(move |&v| (c, v)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(c, v)| measure_one(c, v, models, stim, opts))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Md,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(Format::Md),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (md, csv, json)")),
        }
    }
}

/// `x` with `sig` significant figures in fixed notation.
fn fixed_sig(x: f64, sig: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (sig - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new digit (9.9996 -> 10.000).
    let back: f64 = s.parse().unwrap_or(x);
    if back != 0.0 && (back.abs().log10().floor() as i32) > mag && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

pub fn format_delay(seconds: f64) -> String {
    format!("{} ps", fixed_sig(seconds * 1e12, 4))
}

pub fn format_power(watts: f64) -> String {
    let a = watts.abs();
    let (scale, unit) = if a >= 1e-6 {
        (1e6, "µW")
    } else if a >= 1e-9 {
        (1e9, "nW")
    } else {
        (1e12, "pW")
    };
    format!("{} {unit}", fixed_sig(watts * scale, 4))
}

/// Femtojoules with at least three decimals, or zeptojoules below 0.001 fJ.
pub fn format_energy(joules: f64) -> String {
    let fj = joules * 1e15;
    if fj != 0.0 && fj.abs() < 0.001 {
        return format!("{} zJ", fixed_sig(joules * 1e21, 3));
    }
    let mag = if fj == 0.0 { 0 } else { fj.abs().log10().floor() as i32 };
    let decimals = (2 - mag).max(3) as usize;
    let mut s = format!("{fj:.decimals$}");
    let dot = s.find('.').expect("decimals >= 3");
    while s.len() > dot + 4 && s.ends_with('0') {
        s.pop();
    }
    format!("{s} fJ")
}

/// Parses a rendered quantity such as `"24.30 ps"` back to SI units.
pub fn parse_quantity(text: &str) -> Option<f64> {
    let (num, unit) = text.trim().split_once(' ')?;
    let scale = match unit {
        "ps" => 1e-12,
        "µW" => 1e-6,
        "nW" => 1e-9,
        "pW" => 1e-12,
        "fJ" => 1e-15,
        "zJ" => 1e-21,
        _ => return None,
    };
    num.parse::<f64>().ok().map(|v| v * scale)
}

fn ordered_axes(reports: &[MeasurementReport]) -> (Vec<String>, Vec<f64>) {
    let mut cells: Vec<String> = Vec::new();
    let mut vdds: Vec<f64> = Vec::new();
    for r in reports {
        if !cells.contains(&r.cell) {
            cells.push(r.cell.clone());
        }
        if !vdds.contains(&r.vdd) {
            vdds.push(r.vdd);
        }
    }
    (cells, vdds)
}

fn md_table(
    out: &mut String,
    title: &str,
    reports: &[MeasurementReport],
    cell: impl Fn(&MeasurementReport) -> String,
) {
    let (cells, vdds) = ordered_axes(reports);
    let index: BTreeMap<(&str, u64), &MeasurementReport> =
        reports.iter().map(|r| ((r.cell.as_str(), r.vdd.to_bits()), r)).collect();
    let _ = writeln!(out, "## {title}\n");
    let _ = write!(out, "| cell |");
    for v in &vdds {
        let _ = write!(out, " {v} V |");
    }
    let _ = write!(out, "\n|---|");
    for _ in &vdds {
        let _ = write!(out, "---|");
    }
    out.push('\n');
    for c in &cells {
        let _ = write!(out, "| {c} |");
        for v in &vdds {
            let text = index.get(&(c.as_str(), v.to_bits())).map_or("-".to_string(), |r| cell(r));
            let _ = write!(out, " {text} |");
        }
        out.push('\n');
    }
    out.push('\n');
}

fn render_md(reports: &[MeasurementReport]) -> String {
    let mut out = String::from("# Cell comparison\n\n## Transistor count\n\n| cell | nmos | pmos | total |\n|---|---|---|---|\n");
    let (cells, _) = ordered_axes(reports);
    for c in &cells {
        if let Some(r) = reports.iter().find(|r| &r.cell == c) {
            let _ = writeln!(out, "| {c} | {} | {} | {} |", r.counts.nmos, r.counts.pmos, r.counts.total);
        }
    }
    out.push('\n');
    md_table(&mut out, "Operable", reports, |r| if r.operable { "yes".into() } else { "no".into() });
    md_table(&mut out, "Delay", reports, |r| match r.delay {
        Delay::Measured(d) => format_delay(d),
        Delay::Distorted => "distorted".into(),
        Delay::Unavailable => "n/a".into(),
    });
    md_table(&mut out, "Power", reports, |r| r.power.map_or("n/a".into(), format_power));
    md_table(&mut out, "PDP", reports, |r| r.pdp.map_or("-".into(), format_energy));
    let noted: Vec<&MeasurementReport> = reports.iter().filter(|r| !r.notes.is_empty()).collect();
    if !noted.is_empty() {
        out.push_str("## Notes\n\n");
        for r in noted {
            let _ = writeln!(out, "- {} @ {} V: {}", r.cell, r.vdd, r.notes.join("; "));
        }
    }
    out
}

fn render_csv(reports: &[MeasurementReport]) -> String {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
    wr.write_record([
        "cell", "vdd", "nmos", "pmos", "total", "operable", "delay_s", "power_w", "pdp_j", "status", "notes",
    ])
    .expect("in-memory write");
    for r in reports {
        wr.write_record([
            r.cell.clone(),
            format!("{}", r.vdd),
            r.counts.nmos.to_string(),
            r.counts.pmos.to_string(),
            r.counts.total.to_string(),
            r.operable.to_string(),
            opt(r.delay.seconds()),
            opt(r.power),
            opt(r.pdp),
            r.status.as_str().to_string(),
            r.notes.join("; "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn render(reports: &[MeasurementReport], format: Format) -> String {
    match format {
        Format::Md => render_md(reports),
        Format::Csv => render_csv(reports),
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize") + "\n",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub claim: String,
    pub pass: bool,
}

/// Qualitative claims over a sweep. Empty when any cell has fewer than two
/// supply points.
pub fn trend_check(reports: &[MeasurementReport], reference: &str) -> Vec<TrendResult> {
    let (cells, _) = ordered_axes(reports);
    let mut by_cell: BTreeMap<&str, Vec<&MeasurementReport>> = BTreeMap::new();
    for r in reports {
        by_cell.entry(r.cell.as_str()).or_default().push(r);
    }
    for rows in by_cell.values_mut() {
        rows.sort_by(|a, b| b.vdd.total_cmp(&a.vdd));
        rows.dedup_by(|a, b| a.vdd == b.vdd);
    }
    if by_cell.values().any(|rows| rows.len() < 2) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for c in &cells {
        let rows = &by_cell[c.as_str()];
        let volts: Vec<String> = rows.iter().map(|r| r.vdd.to_string()).collect();
        let delay_ok = rows.windows(2).all(|p| match (p[0].delay.rank(), p[1].delay.rank()) {
            (Some(hi), Some(lo)) => hi.is_finite() && lo > hi,
            _ => false,
        });
        out.push(TrendResult {
            claim: format!("{c}: delay increases as Vdd falls ({} V)", volts.join(" > ")),
            pass: delay_ok,
        });
        let power_ok = rows.windows(2).all(|p| match (p[0].power, p[1].power) {
            (Some(hi), Some(lo)) => lo < hi,
            _ => false,
        });
        out.push(TrendResult {
            claim: format!("{c}: power decreases with Vdd ({} V)", volts.join(" > ")),
            pass: power_ok,
        });
    }
    if let Some(refs) = by_cell.get(reference) {
        for c in &cells {
            let rows = &by_cell[c.as_str()];
            if c == reference || rows[0].counts.total != 10 {
                continue;
            }
            for r in rows {
                let Some(base) = refs.iter().find(|x| x.vdd == r.vdd) else {
                    continue;
                };
                let pass = match (r.delay.rank(), base.delay.rank()) {
                    (Some(d), Some(b)) => d <= b,
                    _ => false,
                };
                out.push(TrendResult {
                    claim: format!("{c}: not slower than {reference} at {} V", r.vdd),
                    pass,
                });
            }
        }
    }
    out
}

pub fn render_trends(trends: &[TrendResult]) -> String {
    let mut out = String::from("## Trend checks\n\n");
    if trends.is_empty() {
        out.push_str("- not enough supply points\n");
    }
    for t in trends {
        let _ = writeln!(out, "- [{}] {}", if t.pass { "pass" } else { "FAIL" }, t.claim);
    }
    out
}

/// Optional per-field overrides of a device model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverride {
    pub vt0: Option<f64>,
    pub kprime: Option<f64>,
    pub lambda: Option<f64>,
    pub cox_area: Option<f64>,
    pub cj_term: Option<f64>,
}

impl DeviceOverride {
    pub fn apply(&self, base: DeviceModel) -> DeviceModel {
        DeviceModel {
            vt0: self.vt0.unwrap_or(base.vt0),
            kprime: self.kprime.unwrap_or(base.kprime),
            lambda: self.lambda.unwrap_or(base.lambda),
            cox_area: self.cox_area.unwrap_or(base.cox_area),
            cj_term: self.cj_term.unwrap_or(base.cj_term),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    #[serde(default)]
    pub nmos: DeviceOverride,
    #[serde(default)]
    pub pmos: DeviceOverride,
}

impl ModelOverrides {
    pub fn apply(&self, base: ModelSet) -> ModelSet {
        ModelSet {
            nmos: self.nmos.apply(base.nmos),
            pmos: self.pmos.apply(base.pmos),
        }
    }
}

fn default_cells() -> Vec<String> {
    vec!["proposed-gdi".into(), "proposed-ptl-gdi".into(), "cmos28".into()]
}

fn default_vdds() -> Vec<f64> {
    vec![3.0, 1.8, 0.8]
}

fn default_reference() -> String {
    "cmos28".into()
}

/// Suite description, read from TOML.
///
/// ```toml
/// cells = ["proposed-gdi", "cmos28"]
/// vdds = [3.0, 1.8]
/// netlists = ["my_adder.sp"]
/// tstep = 5e-12
/// load = 10e-15
/// [models.nmos]
/// vt0 = 0.5
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_cells")]
    pub cells: Vec<String>,
    #[serde(default = "default_vdds")]
    pub vdds: Vec<f64>,
    #[serde(default = "default_reference")]
    pub reference: String,
    /// Extra cells from netlist files, relative to the config file.
    #[serde(default)]
    pub netlists: Vec<PathBuf>,
    #[serde(default)]
    pub models: ModelOverrides,
    pub tstep: Option<f64>,
    pub load: Option<f64>,
    pub period: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cells: default_cells(),
            vdds: default_vdds(),
            reference: default_reference(),
            netlists: Vec::new(),
            models: ModelOverrides::default(),
            tstep: None,
            load: None,
            period: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.vdds.iter().any(|v| !(*v > 0.0)) {
            return Err(BenchError::Config("vdds must be positive".into()));
        }
        for (key, v) in [("tstep", self.tstep), ("period", self.period)] {
            if v.is_some_and(|v| !(v > 0.0)) {
                return Err(BenchError::Config(format!("{key} must be positive")));
            }
        }
        if self.load.is_some_and(|v| !(v >= 0.0)) {
            return Err(BenchError::Config("load must be non-negative".into()));
        }
        let models = self.models();
        models.nmos.validate().map_err(BenchError::Config)?;
        models.pmos.validate().map_err(BenchError::Config)?;
        Ok(())
    }

    pub fn models(&self) -> ModelSet {
        self.models.apply(ModelSet::default())
    }

    pub fn stimulus(&self) -> Stimulus {
        let d = Stimulus::default();
        Stimulus {
            load: self.load.unwrap_or(d.load),
            period: self.period.unwrap_or(d.period),
            ..d
        }
    }

    pub fn sim_options(&self) -> SimOptions {
        let d = SimOptions::default();
        SimOptions {
            tstep: self.tstep.unwrap_or(d.tstep),
            ..d
        }
    }

    /// Built-in cells followed by netlist cells. A netlist cell with three
    /// inputs and `sum`/`carry` outputs gets the full-adder reference.
    pub fn load_cells(&self, base: &Path) -> Result<Vec<CellSpec>, BenchError> {
        let mut out = self
            .cells
            .iter()
            .map(|n| cells::by_name(n))
            .collect::<Result<Vec<_>, _>>()?;
        for rel in &self.netlists {
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| BenchError::Netlist {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let circuit = netlist::parse(&text).map_err(|e| BenchError::Netlist {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let name = path.file_stem().map_or("netlist".into(), |s| s.to_string_lossy().into_owned());
            out.push(cells::with_inferred_golden(CellSpec::from_circuit(name, circuit)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(cell: &str, vdd: f64, delay: Delay, power: f64) -> MeasurementReport {
        MeasurementReport {
            cell: cell.into(),
            vdd,
            counts: TransistorCount {
                nmos: 5,
                pmos: 5,
                total: 10,
            },
            operable: true,
            delay,
            power: Some(power),
            pdp: delay.seconds().map(|d| d * power),
            status: Status::Ok,
            notes: vec![],
        }
    }

    #[test]
    fn energy_units() {
        assert_eq!(format_energy(2e-17), "0.020 fJ");
        assert_eq!(format_energy(2.1e-20), "21.0 zJ");
        assert_eq!(format_energy(1.2345e-15), "1.235 fJ");
        assert_eq!(format_energy(3.7e-18), "0.0037 fJ");
        assert_eq!(format_energy(0.0), "0.000 fJ");
    }

    #[test]
    fn delay_and_power_units() {
        assert_eq!(format_delay(13.8e-12), "13.80 ps");
        assert_eq!(format_delay(88.35e-12), "88.35 ps");
        assert_eq!(format_delay(1.2346e-9), "1235 ps");
        assert_eq!(format_power(3.19e-6), "3.190 µW");
        assert_eq!(format_power(4.5e-10), "450.0 pW");
        assert_eq!(format_power(2.5e-8), "25.00 nW");
        assert_eq!(fixed_sig(9.9996, 4), "10.00");
    }

    #[test]
    fn renderings_parse_back_to_three_figures() {
        let mut x = 1.0e-22;
        while x < 1e-9 {
            for (text, value) in [
                (format_energy(x), x),
                (format_power(x * 1e6), x * 1e6),
                (format_delay(x * 1e8), x * 1e8),
            ] {
                let back = parse_quantity(&text).unwrap();
                assert!((back - value).abs() <= 5e-3 * value, "{text} vs {value:e}");
            }
            x *= 1.37;
        }
    }

    #[test]
    fn trends_on_fixture() {
        let rs = vec![
            report("a", 3.0, Delay::Measured(10e-12), 3e-6),
            report("a", 1.8, Delay::Measured(20e-12), 1e-6),
            report("a", 0.8, Delay::Distorted, 1e-7),
            report("cmos28", 3.0, Delay::Measured(15e-12), 5e-6),
            report("cmos28", 1.8, Delay::Measured(18e-12), 2e-6),
            report("cmos28", 0.8, Delay::Measured(90e-12), 1e-7),
        ];
        let t = trend_check(&rs, "cmos28");
        let get = |s: &str| t.iter().find(|x| x.claim.contains(s)).unwrap().pass;
        assert!(get("a: delay increases"));
        assert!(get("a: power decreases"));
        assert!(get("not slower than cmos28 at 3 V"));
        assert!(!get("not slower than cmos28 at 1.8 V"));
        assert!(!get("not slower than cmos28 at 0.8 V"));
        assert!(trend_check(&rs[..1], "cmos28").is_empty());
    }

    #[test]
    fn markdown_shape() {
        let rs = vec![
            report("a", 3.0, Delay::Measured(10e-12), 3e-6),
            report("a", 1.8, Delay::Distorted, 1e-6),
        ];
        let md = render(&rs, Format::Md);
        assert!(md.contains("| a | 10.00 ps | distorted |"), "{md}");
        assert!(md.contains("| a | 0.030 fJ | - |"), "{md}");
    }

    #[test]
    fn csv_is_si() {
        let rs = vec![report("a", 3.0, Delay::Measured(10e-12), 3e-6)];
        let text = render(&rs, Format::Csv);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let row = rd.records().next().unwrap().unwrap();
        assert_eq!(row[6].parse::<f64>().unwrap(), 1e-11);
        assert_eq!(row[9].to_string(), "ok");
    }

    #[test]
    fn config_parsing() {
        let cfg = SuiteConfig::from_toml("vdds = [1.8]\n[models.pmos]\nvt0 = -0.5\n").unwrap();
        assert_eq!(cfg.cells, default_cells());
        assert_eq!(cfg.models().pmos.vt0, -0.5);
        assert_eq!(cfg.models().pmos.kprime, 60e-6);
        assert!(SuiteConfig::from_toml("colour = 1").is_err());
        assert!(SuiteConfig::from_toml("vdds = [-1.0]").is_err());
        assert!(matches!(
            run_suite(&[], &[1.8], &ModelSet::default(), &Stimulus::default(), &SimOptions::default()),
            Err(BenchError::Empty)
        ));
    }
}
