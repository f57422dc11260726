//! `cellforge`: build, verify and measure GDI / pass-transistor adder cells.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cellforge_core::bench::{render, render_trends, run_suite, trend_check, Format, SuiteConfig};
use cellforge_core::cells::{self, CellSpec, Sizing, CELL_NAMES};
use cellforge_core::netlist::{parse_with_diagnostics, random_circuit, serialize, units};
use cellforge_core::sizing::{self, evaluations_csv, optimize, Objective, SizingError, SizingProblem};
use cellforge_core::switchlevel::{operability, truth_table, SwitchError, SwitchParams, TruthTableReport};
use cellforge_core::transient::{self, export, simulate_cell, MeasureError, ModelSet, SimError, SimOptions, Stimulus};
use cellforge_core::count_transistors;

#[derive(Parser, Debug)]
#[command(name = "cellforge", version, about = "GDI / PTL full-adder analysis toolkit")]
struct Cli {
    /// Worker threads for parallel simulation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// More log output on standard error (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the netlist of a built-in cell or of a random test circuit.
    Emit(EmitArgs),
    /// Parse a netlist, count devices, and check logic and operability.
    Check(CheckArgs),
    /// Switch-level truth table with per-row output levels.
    Truthtable(CheckArgs),
    /// Transient simulation to a CSV (and optionally VCD) waveform.
    Sim(SimArgs),
    /// Supply-voltage sweep over a suite of cells.
    Bench(BenchArgs),
    /// Coordinate-descent transistor sizing.
    Size(SizeArgs),
}

#[derive(Args, Debug)]
struct EmitArgs {
    /// Built-in cell name (see --list).
    cell: Option<String>,
    /// List the built-in cells.
    #[arg(long)]
    list: bool,
    /// Emit a random valid circuit instead (test corpus).
    #[arg(long, conflicts_with = "cell")]
    random: bool,
    /// Seed for --random.
    #[arg(long, requires = "random", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    widths: WidthArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
struct WidthArgs {
    /// NMOS width for generated cells, e.g. 2u.
    #[arg(long, value_parser = parse_si)]
    nmos_width: Option<f64>,
    /// PMOS width for generated cells, e.g. 4u.
    #[arg(long, value_parser = parse_si)]
    pmos_width: Option<f64>,
}

impl WidthArgs {
    fn sizing(&self) -> Sizing {
        let d = Sizing::default();
        Sizing {
            nmos_width: self.nmos_width.unwrap_or(d.nmos_width),
            pmos_width: self.pmos_width.unwrap_or(d.pmos_width),
            ..d
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct ModelArgs {
    /// NMOS threshold voltage, volts.
    #[arg(long)]
    vtn: Option<f64>,
    /// PMOS threshold magnitude, volts.
    #[arg(long)]
    vtp: Option<f64>,
}

impl ModelArgs {
    fn models(&self) -> Result<ModelSet> {
        let mut m = ModelSet::default();
        if let Some(v) = self.vtn {
            if v < 0.0 {
                bail!("--vtn must be non-negative");
            }
            m.nmos.vt0 = v;
        }
        if let Some(v) = self.vtp {
            if v < 0.0 {
                bail!("--vtp takes the magnitude and must be non-negative");
            }
            m.pmos.vt0 = -v;
        }
        Ok(m)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TextFormat {
    Md,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Golden {
    /// Full-adder reference when the ports are a,b,cin -> sum,carry.
    Auto,
    /// Compare nothing; report logic only.
    None,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Netlist file, or a built-in cell name.
    input: String,
    #[arg(long, default_value_t = 1.8)]
    vdd: f64,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long, value_enum, default_value_t = Golden::Auto)]
    golden: Golden,
    #[arg(long, value_enum, default_value_t = TextFormat::Md)]
    format: TextFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Netlist file, or a built-in cell name. Circuits without sources get
    /// the standard count stimulus.
    input: String,
    #[arg(long, default_value_t = 1.8)]
    vdd: f64,
    /// Stop time (e.g. 160n). Defaults to two laps of the count stimulus.
    #[arg(long, value_parser = parse_si)]
    tstop: Option<f64>,
    #[arg(long, value_parser = parse_si)]
    tstep: Option<f64>,
    #[command(flatten)]
    models: ModelArgs,
    /// Waveform CSV (standard output when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a VCD file.
    #[arg(long)]
    vcd: Option<PathBuf>,
    /// Nets exported as real-valued VCD variables (default: outputs).
    #[arg(long, value_delimiter = ',')]
    probe: Vec<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Suite description (TOML). Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "md", value_parser = parse_format)]
    format: Format,
    /// Exit with status 1 when a trend check fails.
    #[arg(long)]
    strict: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SizeArgs {
    /// Netlist file, or a built-in cell name.
    input: String,
    #[arg(long, default_value = "pdp", value_parser = parse_objective)]
    objective: Objective,
    #[arg(long, default_value_t = 1.8)]
    vdd: f64,
    /// Simulation budget, the starting point included.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, value_parser = parse_si, default_value = "2u")]
    w_min: f64,
    #[arg(long, value_parser = parse_si, default_value = "20u")]
    w_max: f64,
    /// Devices to tune (default: all).
    #[arg(long, value_delimiter = ',')]
    devices: Vec<String>,
    /// Move MNk/MPk pairs together.
    #[arg(long)]
    pair: bool,
    #[command(flatten)]
    models: ModelArgs,
    /// Sized netlist (standard output when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV log of every evaluation.
    #[arg(long)]
    history: Option<PathBuf>,
}

fn parse_si(s: &str) -> Result<f64, String> {
    units::parse_value(s).ok_or_else(|| format!("'{s}' is not a number"))
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse()
}

/// Failure inside a simulation engine rather than in the user's input.
#[derive(Debug)]
struct EngineFailure(anyhow::Error);

impl std::fmt::Display for EngineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for EngineFailure {}

fn engine(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(EngineFailure(e.into()))
}

/// Sim errors caused by bad input (invalid setup) stay user errors.
fn sim_error(e: SimError) -> anyhow::Error {
    match e {
        SimError::Invalid(_) => anyhow::Error::new(e),
        other => engine(other),
    }
}

fn write_output(path: Option<&Path>, data: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data)?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .with_context(|| format!("cannot write to {}", dir.display()))?;
            tmp.write_all(data)?;
            tmp.persist(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    Ok(())
}

/// A loaded cell plus parser warnings.
struct Loaded {
    spec: CellSpec,
    warnings: Vec<String>,
}

fn load_cell(input: &str, golden: Golden) -> Result<Loaded> {
    let path = Path::new(input);
    if !path.exists() {
        if CELL_NAMES.contains(&input) {
            let mut spec = cells::by_name(input)?;
            if golden == Golden::None {
                spec.golden.clear();
            }
            return Ok(Loaded {
                spec,
                warnings: Vec::new(),
            });
        }
        bail!("file not found: {input}");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {input}"))?;
    let (circuit, diags) = parse_with_diagnostics(&text).with_context(|| format!("in {input}"))?;
    let warnings = diags
        .into_iter()
        .map(|d| match d.line {
            Some(l) => format!("{input}:{l}: {}", d.message),
            None => format!("{input}: {}", d.message),
        })
        .collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w}");
    }
    let name = path
        .file_stem()
        .map_or_else(|| "netlist".to_string(), |s| s.to_string_lossy().into_owned());
    let spec = CellSpec::from_circuit(name, circuit);
    let spec = match golden {
        Golden::Auto => cells::with_inferred_golden(spec),
        Golden::None => spec,
    };
    Ok(Loaded { spec, warnings })
}

fn cmd_emit(a: &EmitArgs) -> Result<()> {
    if a.list {
        let mut s = String::new();
        for n in CELL_NAMES {
            let _ = writeln!(s, "{n}");
        }
        return write_output(a.output.as_deref(), s.as_bytes());
    }
    let circuit = if a.random {
        random_circuit(a.seed)
    } else {
        let name = a
            .cell
            .as_deref()
            .ok_or_else(|| anyhow!("name a cell to emit, or pass --random (see --list)"))?;
        cells::by_name_sized(name, a.widths.sizing())?.circuit
    };
    write_output(a.output.as_deref(), serialize(&circuit).as_bytes())
}

fn switch_params(vdd: f64, models: &ModelSet) -> SwitchParams {
    SwitchParams::new(vdd, models.vtn(), models.vtp_abs())
}

fn level_text(report: &TruthTableReport, row: usize, out: &str) -> String {
    let r = &report.rows[row];
    let s = &r.outputs[out];
    let bit = match s.level() {
        Some(v) => format!("{} ({v:.3} V)", u8::from(s.logic == cellforge_core::switchlevel::Logic::One)),
        None => format!("{:?}", s.logic),
    };
    if r.degraded.iter().any(|d| d == out) {
        format!("{bit} weak")
    } else {
        bit
    }
}

fn table_md(report: &TruthTableReport) -> String {
    let mut s = String::from("|");
    for i in &report.inputs {
        let _ = write!(s, " {i} |");
    }
    let outs: Vec<&String> = report.outputs.keys().collect();
    for o in &outs {
        let _ = write!(s, " {o} |");
    }
    s.push_str("\n|");
    for _ in 0..report.inputs.len() + outs.len() {
        s.push_str("---|");
    }
    s.push('\n');
    for (r, row) in report.rows.iter().enumerate() {
        s.push('|');
        for b in &row.inputs {
            let _ = write!(s, " {} |", u8::from(*b));
        }
        for o in &outs {
            let _ = write!(s, " {} |", level_text(report, r, o));
        }
        s.push('\n');
    }
    s
}

fn switch_failure(e: SwitchError) -> anyhow::Error {
    match e {
        SwitchError::Unsettled(_) => engine(e),
        other => anyhow::Error::new(other),
    }
}

fn cmd_check(a: &CheckArgs, full: bool) -> Result<()> {
    let loaded = load_cell(&a.input, a.golden)?;
    let spec = &loaded.spec;
    let models = a.models.models()?;
    let p = switch_params(a.vdd, &models);
    let report = truth_table(spec, p).map_err(switch_failure)?;
    let verdict = if full {
        Some(operability(spec, p).map_err(switch_failure)?)
    } else {
        None
    };
    let counts = count_transistors(&spec.circuit);
    let text = match a.format {
        TextFormat::Json => {
            let value = serde_json::json!({
                "cell": spec.name,
                "counts": counts,
                "operability": verdict,
                "truth_table": report,
                "warnings": loaded.warnings,
            });
            serde_json::to_string_pretty(&value)? + "\n"
        }
        TextFormat::Md => {
            let mut s = String::new();
            let _ = writeln!(s, "# {}\n", spec.name);
            let _ = writeln!(
                s,
                "Vdd {} V, Vtn {} V, |Vtp| {} V\n",
                a.vdd,
                models.vtn(),
                models.vtp_abs()
            );
            if let Some(v) = &verdict {
                let _ = writeln!(
                    s,
                    "transistors: {} nmos, {} pmos, {} total\n",
                    counts.nmos, counts.pmos, counts.total
                );
                let _ = writeln!(
                    s,
                    "operable: {} ({})\n",
                    if v.operable { "yes" } else { "no" },
                    v.reason
                );
            }
            s.push_str(&table_md(&report));
            let notes: Vec<&String> = loaded.warnings.iter().chain(&report.diagnostics).collect();
            if !notes.is_empty() {
                s.push_str("\n## Diagnostics\n\n");
                for n in notes {
                    let _ = writeln!(s, "- {n}");
                }
            }
            s
        }
    };
    write_output(a.output.as_deref(), text.as_bytes())
}

fn cmd_sim(a: &SimArgs) -> Result<()> {
    let loaded = load_cell(&a.input, Golden::Auto)?;
    let models = a.models.models()?;
    let mut opts = SimOptions::default();
    if let Some(h) = a.tstep {
        opts.tstep = h;
    }
    let stim = Stimulus::at_vdd(a.vdd);
    let spec = &loaded.spec;
    for p in &a.probe {
        if !spec.circuit.has_net(p) {
            bail!("probe net '{p}' is not in the circuit");
        }
    }
    let wave = if spec.circuit.sources.is_empty() {
        if let Some(t) = a.tstop {
            opts.tstop = t;
            let bench = transient::testbench(spec, &stim).map_err(sim_error)?;
            opts.validate().map_err(sim_error)?;
            transient::transient(&bench, &models, &opts).map_err(sim_error)?
        } else {
            simulate_cell(spec, &models, &stim, &opts).map_err(sim_error)?.waveform
        }
    } else {
        opts.tstop = a.tstop.ok_or_else(|| anyhow!("--tstop is required for netlists with their own sources"))?;
        opts.validate().map_err(sim_error)?;
        transient::transient(&spec.circuit, &models, &opts).map_err(sim_error)?
    };
    log::info!("{} accepted time points", wave.len());

    let mut csv = Vec::new();
    export::write_csv(&wave, &mut csv)?;
    write_output(a.output.as_deref(), &csv)?;
    if let Some(path) = &a.vcd {
        let probes = if a.probe.is_empty() {
            spec.outputs().to_vec()
        } else {
            a.probe.clone()
        };
        let mut vcd = Vec::new();
        export::write_vcd(&wave, a.vdd, &probes, &mut vcd)?;
        write_output(Some(path), &vcd)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<bool> {
    let (cfg, base) = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("file not found: {}", path.display()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (SuiteConfig::from_toml(&text)?, base)
        }
        None => (SuiteConfig::default(), PathBuf::from(".")),
    };
    let cells = cfg.load_cells(&base)?;
    let reports = run_suite(&cells, &cfg.vdds, &cfg.models(), &cfg.stimulus(), &cfg.sim_options())?;
    let trends = trend_check(&reports, &cfg.reference);
    for t in trends.iter().filter(|t| !t.pass) {
        log::warn!("trend check failed: {}", t.claim);
    }
    let text = match a.format {
        Format::Md => format!("{}\n{}", render(&reports, Format::Md), render_trends(&trends)),
        Format::Csv => render(&reports, Format::Csv),
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({ "reports": reports, "trends": trends }))? + "\n"
        }
    };
    write_output(a.output.as_deref(), text.as_bytes())?;
    Ok(trends.iter().all(|t| t.pass))
}

fn cmd_size(a: &SizeArgs) -> Result<()> {
    let loaded = load_cell(&a.input, Golden::Auto)?;
    let models = a.models.models()?;
    let mut p = SizingProblem::all_devices(loaded.spec, a.vdd, a.objective);
    p.w_min = a.w_min;
    p.w_max = a.w_max;
    if !a.devices.is_empty() {
        p.groups = a.devices.iter().map(|d| vec![d.clone()]).collect();
    }
    if a.pair {
        p = p.paired();
    }
    let result = optimize(&p, &models, &Stimulus::default(), &SimOptions::default(), a.budget).map_err(|e| match e {
        SizingError::Invalid(_) => anyhow::Error::new(e),
        other => engine(other),
    })?;
    log::info!(
        "objective {:e} -> {:e} after {} evaluations",
        result.history[0].objective,
        result.objective,
        result.evaluations.len()
    );
    let sized = sizing::apply_widths(&p.cell, &result.widths);
    if let Some(h) = &a.history {
        write_output(Some(h), evaluations_csv(&result).as_bytes())?;
    }
    write_output(a.output.as_deref(), serialize(&sized.circuit).as_bytes())
}

/// Exit status for a failed run: 2 for engine failures, 1 otherwise.
fn failure_code(e: &anyhow::Error) -> u8 {
    let engine = e.chain().any(|c| {
        c.is::<EngineFailure>() || c.is::<MeasureError>() || matches!(c.downcast_ref::<SimError>(), Some(s) if !matches!(s, SimError::Invalid(_)))
    });
    if engine {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot size the worker pool")?;
    }
    match &cli.command {
        Command::Emit(a) => cmd_emit(a)?,
        Command::Check(a) => cmd_check(a, true)?,
        Command::Truthtable(a) => cmd_check(a, false)?,
        Command::Sim(a) => cmd_sim(a)?,
        Command::Bench(a) => {
            let all_pass = cmd_bench(a)?;
            if a.strict && !all_pass {
                eprintln!("error: trend checks failed (--strict)");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Size(a) => cmd_size(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(failure_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let user = anyhow!("file not found: x.sp");
        assert_eq!(failure_code(&user), 1);
        assert_eq!(failure_code(&sim_error(SimError::Invalid("tstep".into()))), 1);
        let singular = sim_error(SimError::Singular { nodes: vec!["n1".into()] }).context("simulating inverter");
        assert_eq!(failure_code(&singular), 2);
        let measure = anyhow::Error::new(MeasureError::NoInputTransition("sum".into())).context("delay");
        assert_eq!(failure_code(&measure), 2);
        assert_eq!(failure_code(&switch_failure(SwitchError::Unsettled(64))), 2);
        assert_eq!(failure_code(&switch_failure(SwitchError::NoSupply)), 1);
    }
}
