use std::path::Path;
use std::process::{Command, Output};

fn cellforge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellforge"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn emit_prints_a_parseable_netlist() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(&["emit", "proposed-gdi"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(".ports in=a,b,cin out=sum,carry"));
    let c = cellforge_core::netlist::parse(&text).unwrap();
    assert_eq!(cellforge_core::count_transistors(&c).total, 10);
}

#[test]
fn emit_then_check_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(&["emit", "proposed-ptl-gdi", "-o", "fa.sp"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = cellforge(&["check", "fa.sp", "--vdd", "1.8", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\"operable\": true"), "{text}");
}

#[test]
fn missing_file_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(&["check", "missing.sp"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("file not found"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cellforge(&["--no-such-flag"], dir.path()).status.code(), Some(1));
    assert_eq!(cellforge(&["bench", "--format", "xml"], dir.path()).status.code(), Some(1));
    assert_eq!(cellforge(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn malformed_netlist_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.sp"), "MN1 y a 0 0 NMOS W=2u L=180n\nMP1 y a\n").unwrap();
    let o = cellforge(&["check", "bad.sp"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn sim_writes_csv_and_vcd() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(
        &["sim", "inverter", "--tstop", "20n", "-o", "w.csv", "--vcd", "w.vcd", "--probe", "y"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(csv.starts_with("time,a,vdd,y,idd\n"));
    assert!(csv.lines().count() > 100);
    let vcd = std::fs::read_to_string(dir.path().join("w.vcd")).unwrap();
    assert!(vcd.contains("$var real 64") && vcd.contains("y_v"));
}

#[test]
fn unknown_probe_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(
        &["sim", "inverter", "--tstop", "2n", "-o", "w.csv", "--vcd", "w.vcd", "--probe", "nope"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("w.csv").exists());
}

#[test]
fn strict_bench_fails_on_a_broken_trend() {
    let dir = tempfile::tempdir().unwrap();
    // At 1.8 V the GDI adder's degraded carry makes it slower than the
    // static CMOS reference.
    std::fs::write(
        dir.path().join("suite.toml"),
        "cells = [\"proposed-gdi\", \"cmos28\"]\nvdds = [3.0, 1.8]\nperiod = 2e-9\ntstep = 1e-11\n",
    )
    .unwrap();
    let o = cellforge(&["bench", "--config", "suite.toml", "-o", "r.md"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("r.md")).unwrap();
    assert!(report.contains("[FAIL] proposed-gdi: not slower than cmos28 at 1.8 V"), "{report}");

    let o = cellforge(&["bench", "--config", "suite.toml", "--strict", "--format", "json", "-o", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let json = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert!(json.contains("\"trends\"") && json.contains("\"reports\""));
}

#[test]
fn size_improves_an_inverter() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellforge(
        &["size", "inverter", "--budget", "8", "--history", "h.csv", "-o", "sized.sp", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let hist = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 8);
    let sized = cellforge_core::netlist::parse(&std::fs::read_to_string(dir.path().join("sized.sp")).unwrap()).unwrap();
    assert_ne!(sized, cellforge_core::cells::inverter().circuit);
}
