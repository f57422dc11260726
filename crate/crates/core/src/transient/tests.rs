use std::collections::BTreeMap;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cells;
use crate::netlist::{Capacitor, Circuit, IndependentSource, Mosfet, Polarity, Pulse, SourceKind};

fn source(name: &str, net: &str, kind: SourceKind) -> IndependentSource {
    IndependentSource {
        name: name.into(),
        positive: net.into(),
        negative: "0".into(),
        kind,
    }
}

fn cap(name: &str, net: &str, value: f64) -> Capacitor {
    Capacitor {
        name: name.into(),
        positive: net.into(),
        negative: "0".into(),
        value,
    }
}

fn inverter_bench(vdd: f64, input: SourceKind, load: f64) -> Circuit {
    let mut c = cells::inverter().circuit;
    c.add_source(source("VDD", "vdd", SourceKind::Dc(vdd))).unwrap();
    c.add_source(source("VA", "a", input)).unwrap();
    if load > 0.0 {
        c.add_capacitor(cap("CL", "y", load)).unwrap();
    }
    c
}

fn square_wave(vdd: f64, period: f64) -> SourceKind {
    SourceKind::Pulse(Pulse {
        v_low: 0.0,
        v_high: vdd,
        delay: period / 2.0,
        rise: 50e-12,
        fall: 50e-12,
        width: period / 2.0 - 50e-12,
        period,
    })
}

#[test]
fn inverter_dc_rails() {
    let opts = SimOptions::default();
    let m = ModelSet::default();
    let hi = dc_operating_point(&inverter_bench(1.8, SourceKind::Dc(0.0), 0.0), &m, &opts).unwrap();
    assert!((hi["y"] - 1.8).abs() < 1e-5, "{}", hi["y"]);
    let lo = dc_operating_point(&inverter_bench(1.8, SourceKind::Dc(1.8), 0.0), &m, &opts).unwrap();
    assert!(lo["y"].abs() < 1e-5, "{}", lo["y"]);
}

#[test]
fn inverter_vtc_is_monotone() {
    let opts = SimOptions::default();
    let m = ModelSet::default();
    let mut last = f64::INFINITY;
    for k in 0..=36 {
        let vin = k as f64 * 0.05;
        let op = dc_operating_point(&inverter_bench(1.8, SourceKind::Dc(vin), 0.0), &m, &opts).unwrap();
        assert!(op["y"] <= last + 1e-9, "vin {vin}: {} after {last}", op["y"]);
        last = op["y"];
    }
}

#[test]
fn rc_step_crosses_half_at_ln2_rc() {
    let (r, c) = (10e3, 100e-15);
    let mut ckt = Circuit::new();
    let step = Pulse {
        v_low: 0.0,
        v_high: 1.0,
        delay: 1e-9,
        rise: 1e-12,
        fall: 1e-12,
        width: 50e-9,
        period: 100e-9,
    };
    ckt.add_source(source("V1", "in", SourceKind::Pulse(step))).unwrap();
    ckt.add_capacitor(cap("C1", "out", c)).unwrap();
    let mut net = Network::new(&ckt, &ModelSet::default()).unwrap();
    net.add_conductance("in", "out", 1.0 / r).unwrap();
    let opts = SimOptions {
        tstop: 8e-9,
        ..Default::default()
    };
    let w = net.transient(&opts).unwrap();
    let d = measure_delay(&w, "in", "out", 1.0).unwrap();
    assert_relative_eq!(d, r * c * std::f64::consts::LN_2, max_relative = 0.02);
}

#[test]
fn inverter_swings_rail_to_rail() {
    let vdd = 1.8;
    let ckt = inverter_bench(vdd, square_wave(vdd, 10e-9), 10e-15);
    let opts = SimOptions {
        tstop: 20e-9,
        ..Default::default()
    };
    let w = transient(&ckt, &ModelSet::default(), &opts).unwrap();
    let y = w.voltage("y").unwrap();
    let max = y.iter().cloned().fold(f64::MIN, f64::max);
    let min = y.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max - min >= 0.99 * vdd, "{min}..{max}");
}

#[test]
fn dc_stimulus_holds_equilibrium() {
    let ckt = inverter_bench(1.8, SourceKind::Dc(0.6), 10e-15);
    let opts = SimOptions {
        tstop: 2e-9,
        ..Default::default()
    };
    let w = transient(&ckt, &ModelSet::default(), &opts).unwrap();
    for (net, s) in w.nets.iter().zip(&w.node_volts) {
        for v in s {
            assert!((v - s[0]).abs() < 1e-6, "{net} drifted from {} to {v}", s[0]);
        }
    }
}

#[test]
fn idle_inverter_leaks_under_a_nanowatt() {
    let ckt = inverter_bench(1.8, SourceKind::Dc(0.0), 10e-15);
    let opts = SimOptions {
        tstop: 10e-9,
        ..Default::default()
    };
    let w = transient(&ckt, &ModelSet::default(), &opts).unwrap();
    let p = measure_power(&w, 1.8, 0.0, 5e-9).unwrap();
    assert!(p.abs() < 1e-9, "{p}");
}

#[test]
fn dynamic_power_matches_cv2f() {
    let (vdd, period, load) = (1.8, 10e-9, 10e-15);
    let ckt = inverter_bench(vdd, square_wave(vdd, period), load);
    let opts = SimOptions {
        tstop: 2.0 * period,
        ..Default::default()
    };
    let m = ModelSet::default();
    let w = transient(&ckt, &m, &opts).unwrap();
    let p = measure_power(&w, vdd, period, period).unwrap();
    // Output node: load plus both drain junctions.
    let c = load + 2.0 * m.nmos.cj_term;
    let expect = c * vdd * vdd / period;
    assert!((p - expect).abs() <= 0.15 * expect, "{p} vs {expect}");
}

#[test]
fn delay_is_robust_to_step_halving() {
    let vdd = 1.8;
    let ckt = inverter_bench(vdd, square_wave(vdd, 10e-9), 10e-15);
    let m = ModelSet::default();
    let coarse = SimOptions {
        tstop: 20e-9,
        ..Default::default()
    };
    let fine = SimOptions {
        tstep: coarse.tstep / 2.0,
        ..coarse
    };
    let d1 = measure_delay(&transient(&ckt, &m, &coarse).unwrap(), "a", "y", vdd).unwrap();
    let d2 = measure_delay(&transient(&ckt, &m, &fine).unwrap(), "a", "y", vdd).unwrap();
    assert!((d1 - d2).abs() < 0.01 * d2, "{d1} vs {d2}");
}

#[test]
fn pass_device_conserves_charge() {
    let (c1, c2) = (50e-15, 20e-15);
    let mut ckt = Circuit::new();
    ckt.add_source(source("VG", "g", SourceKind::Dc(1.8))).unwrap();
    ckt.add_capacitor(cap("C1", "a", c1)).unwrap();
    ckt.add_capacitor(cap("C2", "b", c2)).unwrap();
    ckt.add_mosfet(Mosfet {
        name: "M1".into(),
        polarity: Polarity::Nmos,
        drain: "a".into(),
        gate: "g".into(),
        source: "b".into(),
        bulk: "0".into(),
        width: 2e-6,
        length: 0.18e-6,
    })
    .unwrap();
    let bare = DeviceModel {
        cox_area: 0.0,
        cj_term: 0.0,
        ..DeviceModel::nmos_default()
    };
    let models = ModelSet {
        nmos: bare,
        pmos: DeviceModel { vt0: -0.4, ..bare },
    };
    let net = Network::new(&ckt, &models).unwrap();
    let init = BTreeMap::from([("a".to_string(), 1.0), ("g".to_string(), 1.8)]);
    let opts = SimOptions {
        tstop: 5e-9,
        ..Default::default()
    };
    let w = net.transient_from(&init, &opts).unwrap();
    let (a, b) = (w.voltage("a").unwrap(), w.voltage("b").unwrap());
    let q0 = c1 * a[0] + c2 * b[0];
    for k in 0..w.len() {
        let q = c1 * a[k] + c2 * b[k];
        assert!((q - q0).abs() < 1e-6 * q0, "step {k}: {q} vs {q0}");
    }
    // Charge shared to equal voltages.
    let end = w.len() - 1;
    assert!((a[end] - b[end]).abs() < 1e-3);
}

#[test]
fn waveform_invariants() {
    let ckt = inverter_bench(1.8, square_wave(1.8, 2e-9), 10e-15);
    let opts = SimOptions {
        tstop: 4e-9,
        ..Default::default()
    };
    let w = transient(&ckt, &ModelSet::default(), &opts).unwrap();
    assert!(w.times.windows(2).all(|p| p[1] > p[0]));
    assert!(w.node_volts.iter().all(|s| s.len() == w.len()));
    assert_eq!(w.supply_current.len(), w.len());
    assert_relative_eq!(w.end_time(), 4e-9, max_relative = 1e-12);
}

#[test]
fn bad_setup_is_rejected() {
    let ckt = inverter_bench(1.8, SourceKind::Dc(0.0), 0.0);
    let opts = SimOptions {
        tstep: 1e-9,
        tstop: 1e-9,
        ..Default::default()
    };
    assert!(matches!(
        transient(&ckt, &ModelSet::default(), &opts),
        Err(SimError::Invalid(_))
    ));
    // Two sources fighting over one node.
    let mut c = Circuit::new();
    c.add_source(source("V1", "x", SourceKind::Dc(1.0))).unwrap();
    c.add_source(source("V2", "x", SourceKind::Dc(2.0))).unwrap();
    assert!(matches!(
        dc_operating_point(&c, &ModelSet::default(), &SimOptions::default()),
        Err(SimError::Singular { .. })
    ));
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    Cutoff,
    Triode,
    Saturation,
}

fn region(vt: f64, vgs: f64, vds: f64) -> Region {
    if vgs <= vt {
        Region::Cutoff
    } else if vds < vgs - vt {
        Region::Triode
    } else {
        Region::Saturation
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let models = ModelSet::default();
    let (w, l, h) = (2e-6, 0.18e-6, 1e-6);
    for polarity in [Polarity::Nmos, Polarity::Pmos] {
        let m = models.get(polarity);
        let vt = m.vt0.abs();
        let sign = if polarity == Polarity::Nmos { 1.0 } else { -1.0 };
        let mut seen = BTreeMap::new();
        while seen.values().copied().min().unwrap_or(0) < 100 || seen.len() < 3 {
            let vs: f64 = rng.random_range(-0.5..0.5);
            let vgs: f64 = rng.random_range(-0.5..3.0);
            let vds: f64 = rng.random_range(-3.0..3.0);
            // Classify in the device's own frame.
            let (g_eff, d_eff) = if vds >= 0.0 { (vgs, vds) } else { (vgs - vds, -vds) };
            let r = region(vt, g_eff, d_eff);
            let margin = (g_eff - vt).abs().min((d_eff - (g_eff - vt)).abs()).min(d_eff.abs());
            if margin < 1e-3 {
                continue;
            }
            let count = seen.entry(format!("{r:?}")).or_insert(0usize);
            if *count >= 100 {
                continue;
            }
            *count += 1;
            let (vd, vg) = (sign * (vds) + sign * vs, sign * vgs + sign * vs);
            let vs = sign * vs;
            let e = mos_eval(m, polarity, w, l, vd, vg, vs);
            let f = |vd: f64, vg: f64, vs: f64| mos_eval(m, polarity, w, l, vd, vg, vs).id;
            let fd = [
                (f(vd + h, vg, vs) - f(vd - h, vg, vs)) / (2.0 * h),
                (f(vd, vg + h, vs) - f(vd, vg - h, vs)) / (2.0 * h),
                (f(vd, vg, vs + h) - f(vd, vg, vs - h)) / (2.0 * h),
            ];
            for (analytic, numeric) in [e.d_vd, e.d_vg, e.d_vs].into_iter().zip(fd) {
                assert!(
                    (analytic - numeric).abs() <= 1e-6 * analytic.abs() + 1e-15,
                    "{polarity:?} {r:?} vd={vd} vg={vg} vs={vs}: {analytic} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn current_is_continuous_at_saturation_edge() {
    let m = DeviceModel::nmos_default();
    for wl in [1.0, 5.0, 20.0] {
        for k in 1..=20 {
            let vgs = m.vt0 + 0.1 * k as f64;
            let edge = vgs - m.vt0;
            let below = device_current(&m, wl * 1e-6, 1e-6, vgs, edge * (1.0 - 1e-12));
            let above = device_current(&m, wl * 1e-6, 1e-6, vgs, edge * (1.0 + 1e-12));
            assert!((below - above).abs() < 1e-12, "vgs {vgs}: {below} vs {above}");
        }
    }
}
