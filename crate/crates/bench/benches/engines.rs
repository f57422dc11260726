use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cellforge_core::cells;
use cellforge_core::netlist::{parse, random_circuit, serialize};
use cellforge_core::switchlevel::{truth_table, SwitchParams};
use cellforge_core::transient::{simulate_cell, ModelSet, SimOptions, Stimulus};

fn netlist(c: &mut Criterion) {
    let text = serialize(&cells::cmos28_reference_adder().circuit);
    c.bench_function("parse/cmos28", |b| b.iter(|| parse(black_box(&text)).unwrap()));
    c.bench_function("random_circuit", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            random_circuit(black_box(seed))
        })
    });
}

fn switch_level(c: &mut Criterion) {
    let p = SwitchParams::new(1.8, 0.4, 0.4);
    for name in ["proposed-gdi", "proposed-ptl-gdi", "cmos28"] {
        let cell = cells::by_name(name).unwrap();
        c.bench_function(&format!("truth_table/{name}"), |b| {
            b.iter(|| truth_table(black_box(&cell), p).unwrap())
        });
    }
}

fn transient(c: &mut Criterion) {
    let models = ModelSet::default();
    let stim = Stimulus {
        period: 2e-9,
        ..Stimulus::at_vdd(1.8)
    };
    let opts = SimOptions {
        tstep: 1e-11,
        ..SimOptions::default()
    };
    let mut g = c.benchmark_group("transient");
    g.sample_size(10);
    for name in ["inverter", "proposed-gdi"] {
        let cell = cells::by_name(name).unwrap();
        g.bench_function(name, |b| {
            b.iter(|| simulate_cell(black_box(&cell), &models, &stim, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, netlist, switch_level, transient);
criterion_main!(benches);
