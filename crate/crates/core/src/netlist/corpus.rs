//! Random valid netlists for round-trip fuzzing.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Capacitor, Circuit, IndependentSource, Mosfet, Polarity, Ports, Pulse, SourceKind, GROUND,
};

const NET_POOL: [&str; 10] = ["a", "b", "cin", "h", "x1", "n_2", "sum", "carry", "vdd", GROUND];

fn pick_net(rng: &mut impl Rng) -> String {
    NET_POOL.choose(rng).expect("non-empty pool").to_string()
}

/// Builds a random but structurally valid circuit from `seed`.
pub fn random_circuit(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new();
    let n_mos = rng.random_range(0..12);
    let n_cap = rng.random_range(0..4);
    let n_src = rng.random_range(if n_mos + n_cap == 0 { 1 } else { 0 }..4);
    for i in 0..n_mos {
        let polarity = if rng.random_bool(0.5) {
            Polarity::Nmos
        } else {
            Polarity::Pmos
        };
        c.add_mosfet(Mosfet {
            name: format!("M{i}"),
            polarity,
            drain: pick_net(&mut rng),
            gate: pick_net(&mut rng),
            source: pick_net(&mut rng),
            bulk: pick_net(&mut rng),
            width: rng.random_range(2e-6..40e-6),
            length: rng.random_range(0.18e-6..1e-6),
        })
        .expect("generated names are unique");
    }
    for i in 0..n_cap {
        c.add_capacitor(Capacitor {
            name: format!("C{i}"),
            positive: pick_net(&mut rng),
            negative: pick_net(&mut rng),
            value: rng.random_range(1e-16..1e-12),
        })
        .expect("generated names are unique");
    }
    for i in 0..n_src {
        let kind = if rng.random_bool(0.5) {
            SourceKind::Dc(rng.random_range(-5.0..5.0))
        } else {
            let rise = rng.random_range(1e-12..1e-10);
            let fall = rng.random_range(1e-12..1e-10);
            let width = rng.random_range(0.0..1e-8);
            Pulse {
                v_low: rng.random_range(-1.0..1.0),
                v_high: rng.random_range(0.5..3.3),
                delay: rng.random_range(0.0..1e-8),
                rise,
                fall,
                width,
                period: (width + rise + fall) * rng.random_range(1.01..4.0),
            }
            .into()
        };
        c.add_source(IndependentSource {
            name: format!("V{i}"),
            positive: pick_net(&mut rng),
            negative: pick_net(&mut rng),
            kind,
        })
        .expect("generated names are unique");
    }
    let mut candidates: Vec<String> = c.nets().iter().filter(|n| *n != GROUND).cloned().collect();
    candidates.sort();
    let mut ports = Ports::default();
    for net in candidates {
        match rng.random_range(0..4) {
            0 => ports.inputs.push(net),
            1 => ports.outputs.push(net),
            2 if ports.vdd.is_none() => ports.vdd = Some(net),
            _ => {}
        }
    }
    c.set_ports(ports).expect("ports are distinct non-ground nets");
    c
}

impl From<Pulse> for SourceKind {
    fn from(p: Pulse) -> Self {
        SourceKind::Pulse(p)
    }
}
