#![allow(dead_code)]

use cluster_compiler::circuit::{Gate, GateCircuit};
use proptest::prelude::*;
use rand::Rng;

pub const WORKED: &str = "qubits 2\nrot 0 0.3 0.2 0.1\nrot 1 0.4 0.5 0.6\ncpswap 0 1 pi/2\ncnot 0 1\n";

fn angle() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), (-4i32..=4).prop_map(|k| k as f64 * std::f64::consts::FRAC_PI_4), -3.0f64..3.0,]
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let one = (0..n).prop_flat_map(|q| {
        prop_oneof![
            Just(Gate::H { qubit: q }),
            (angle(), angle(), angle()).prop_map(move |(alpha, beta, gamma)| Gate::Rot {
                qubit: q,
                alpha,
                beta,
                gamma
            }),
        ]
    });
    if n < 2 {
        return one.boxed();
    }
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    let two = (pair, angle(), any::<bool>()).prop_map(|((control, target), phi, cp)| {
        if cp {
            Gate::CpSwap { control, target, phi }
        } else {
            Gate::Cnot { control, target }
        }
    });
    prop_oneof![one, two].boxed()
}

/// Circuits of up to `max_q` qubits and `max_g` gates.
pub fn circuit(max_q: usize, max_g: usize) -> impl Strategy<Value = GateCircuit> {
    (1..=max_q).prop_flat_map(move |n| {
        prop::collection::vec(gate(n), 0..=max_g)
            .prop_map(move |gates| GateCircuit::new(n, gates).expect("valid operands"))
    })
}

/// Seeded generator for the fixed random suites.
pub fn random_circuit(rng: &mut impl Rng, max_q: usize, max_g: usize) -> GateCircuit {
    let n = rng.gen_range(1..=max_q);
    let count = rng.gen_range(1..=max_g);
    let mut gates = Vec::new();
    for _ in 0..count {
        let kind = if n > 1 { rng.gen_range(0..4) } else { rng.gen_range(0..2) };
        let q = rng.gen_range(0..n);
        let g = match kind {
            0 => Gate::H { qubit: q },
            1 => Gate::Rot {
                qubit: q,
                alpha: rng.gen_range(-3.0..3.0),
                beta: rng.gen_range(-3.0..3.0),
                gamma: rng.gen_range(-3.0..3.0),
            },
            k => {
                let target = (q + rng.gen_range(1..n)) % n;
                if k == 2 {
                    Gate::Cnot { control: q, target }
                } else {
                    Gate::CpSwap { control: q, target, phi: rng.gen_range(-3.0..3.0) }
                }
            }
        };
        gates.push(g);
    }
    GateCircuit::new(n, gates).expect("valid operands")
}

pub mod differential {
    use super::random_circuit;
    use cluster_compiler::compiler::{compile, CompileConfig};
    use cluster_compiler::placement::{validate_grid, Catalog, PartialCircuit};
    use cluster_compiler::verify::audit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mutate(pc: &PartialCircuit, cat: &Catalog, rng: &mut impl Rng) -> PartialCircuit {
        let mut out = pc.clone();
        let cells: Vec<_> = pc.occupied().collect();
        match rng.gen_range(0..10) {
            // unchanged
            0 => {}
            // swap two photons. Equal bases would leave the grid as it was while the tags
            // disagree, which only the tag-based check can see.
            1..=3 => {
                for _ in 0..100 {
                    let (a, b) = (cells[rng.gen_range(0..cells.len())], cells[rng.gen_range(0..cells.len())]);
                    if !cat.basis(a.1).same(cat.basis(b.1)) {
                        out.set_raw(a.0, b.1);
                        out.set_raw(b.0, a.1);
                        break;
                    }
                }
            }
            // move one photon to an empty cell near the board
            _ => {
                let (p, t) = cells[rng.gen_range(0..cells.len())];
                let (h, d) = (pc.width() as i32, pc.depth() as i32);
                let q = loop {
                    let q = (rng.gen_range(0..h + 1), rng.gen_range(0..d + 1));
                    if pc.get(q).is_empty() {
                        break q;
                    }
                };
                out.set_raw(p, Default::default());
                out.set_raw(q, t);
            }
        }
        out
    }

    pub struct Outcome {
        pub cases: usize,
        pub valid: usize,
        /// Circuit and grid JSON of each case where the two checks disagree.
        pub disagreements: Vec<(String, String)>,
    }

    /// Mutates baseline and compiled boards of random circuits and compares
    /// `validate_grid` with the audit of the rendered grid.
    pub fn run(seed: u64, cases: usize) -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Outcome { cases: 0, valid: 0, disagreements: Vec::new() };
        while out.cases < cases {
            let c = random_circuit(&mut rng, 3, 5);
            let w = 2 * c.num_qubits + rng.gen_range(0..3);
            let r = compile(&c, &CompileConfig::new(w).with_m(4)).expect("random circuits compile");
            let cat = &r.catalog;
            let mut boards = vec![PartialCircuit::from_baseline(cat)];
            boards.extend(r.finals.iter().filter(|pc| pc.placed().len() == cat.num_components()).cloned());
            for board in &boards {
                for _ in 0..10 {
                    if out.cases == cases {
                        return out;
                    }
                    let pc = mutate(board, cat, &mut rng);
                    let tagged = validate_grid(&pc, cat, w).is_empty();
                    let grid = pc.to_grid(cat, w, None);
                    out.valid += tagged as usize;
                    if tagged != audit(&grid, w).ok() {
                        out.disagreements.push((format!("{c:?}"), grid.to_json()));
                    }
                    out.cases += 1;
                }
            }
        }
        out
    }
}

pub mod fidelity {
    use cluster_compiler::circuit::Gate;
    use cluster_compiler::pattern::{pattern_for, wire_pattern};
    use cluster_compiler::sim::{apply_unitary, fidelity, gate_unitary, simulate_pattern_postselected};
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const STATES: usize = 20;

    fn random_state(rng: &mut impl Rng, dim: usize) -> Vec<C> {
        let v: Vec<C> = (0..dim).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    /// Fixed gates at edge angles plus seeded random ones.
    pub fn gates(seed: u64) -> Vec<Gate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gates = vec![
            Gate::H { qubit: 0 },
            Gate::Rot { qubit: 0, alpha: 0.0, beta: 0.0, gamma: 0.0 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 1, target: 0 },
            Gate::CpSwap { control: 0, target: 1, phi: 0.0 },
            Gate::CpSwap { control: 0, target: 1, phi: std::f64::consts::PI },
        ];
        for _ in 0..6 {
            let mut a = || rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            gates.push(Gate::Rot { qubit: 0, alpha: a(), beta: a(), gamma: a() });
            gates.push(Gate::CpSwap { control: 0, target: 1, phi: a() });
            gates.push(Gate::CpSwap { control: 1, target: 0, phi: a() });
        }
        gates
    }

    /// Lowest fidelity of a gate pattern against its unitary over random inputs.
    pub fn gate_min_fidelity(g: &Gate, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, u) = (pattern_for(g), gate_unitary(g));
        (0..STATES)
            .map(|_| {
                let psi = random_state(&mut rng, u.len());
                let out = simulate_pattern_postselected(&p, &psi).expect("pattern within simulator bounds");
                fidelity(&out, &apply_unitary(&u, &psi))
            })
            .fold(1.0, f64::min)
    }

    /// Lowest fidelity of an `n`-photon wire against the identity.
    pub fn wire_min_fidelity(n: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..STATES)
            .map(|_| {
                let psi = random_state(&mut rng, 2);
                fidelity(&simulate_pattern_postselected(&wire_pattern(n), &psi).expect("short wire"), &psi)
            })
            .fold(1.0, f64::min)
    }
}
