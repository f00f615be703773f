//! Seeded generators for the five benchmark families.
//!
//! The constructions are fixed here so depth numbers are reproducible:
//!
//! * `bv`: ancilla on wire `n/2`, prepared with X then H; a CNOT from every data qubit whose
//!   hidden bit is set; H on every wire at the end. Seed 0 selects the all-ones string.
//! * `qft`: the nearest-neighbour swap network. Each controlled phase is a `CpSwap`, so the
//!   active qubit walks down the register and the output order comes out reversed.
//! * `iqp`: H layer, odd-even brick network of `CpSwap` gates with seeded phases (every pair
//!   interacts exactly once), H layer.
//! * `hwea`: two repetitions of (seeded rotations on all wires, CNOT ladder), then a final
//!   rotation layer.
//! * `hc`: half-filling X preparation, then one brick layer of YY-type Pauli gadgets
//!   (`Rx(π/2)` basis change, CNOT, `Rz(θ)`, CNOT, undo) with seeded θ.

use crate::circuit::{Gate, GateCircuit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Bv,
    Iqp,
    Hwea,
    Qft,
    Hc,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [Benchmark::Bv, Benchmark::Iqp, Benchmark::Hwea, Benchmark::Qft, Benchmark::Hc];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Bv => "bv",
            Benchmark::Iqp => "iqp",
            Benchmark::Hwea => "hwea",
            Benchmark::Qft => "qft",
            Benchmark::Hc => "hc",
        }
    }
}

impl FromStr for Benchmark {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("unknown benchmark `{0}`")]
    Unknown(String),
    #[error("{0} needs at least 2 qubits")]
    TooFewQubits(&'static str),
    #[error("hc needs an even number of qubits, got {0}")]
    OddQubitCount(usize),
}

pub fn generate_benchmark(b: Benchmark, n: usize, seed: u64) -> Result<GateCircuit, BenchError> {
    if n < 2 {
        return Err(BenchError::TooFewQubits(b.name()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = match b {
        Benchmark::Bv => bv(n, seed),
        Benchmark::Qft => qft(n),
        Benchmark::Iqp => iqp(n, &mut rng),
        Benchmark::Hwea => hwea(n, &mut rng),
        Benchmark::Hc => {
            if n % 2 == 1 {
                return Err(BenchError::OddQubitCount(n));
            }
            hc(n, &mut rng)
        }
    };
    Ok(GateCircuit { num_qubits: n, gates })
}

/// Hidden string used by `bv` for the data qubits, in wire order.
pub fn bv_hidden_string(n: usize, seed: u64) -> Vec<bool> {
    if seed == 0 {
        return vec![true; n - 1];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits: Vec<bool> = (0..n - 1).map(|_| rng.gen()).collect();
    if !bits.iter().any(|&b| b) {
        bits[0] = true;
    }
    bits
}

fn bv(n: usize, seed: u64) -> Vec<Gate> {
    let anc = n / 2;
    let data: Vec<usize> = (0..n).filter(|&q| q != anc).collect();
    let bits = bv_hidden_string(n, seed);
    let mut g = vec![Gate::Rot { qubit: anc, alpha: PI, beta: 0.0, gamma: 0.0 }];
    g.extend((0..n).map(|q| Gate::H { qubit: q }));
    for (&q, &b) in data.iter().zip(&bits) {
        if b {
            g.push(Gate::Cnot { control: q, target: anc });
        }
    }
    g.extend((0..n).map(|q| Gate::H { qubit: q }));
    g
}

fn qft(n: usize) -> Vec<Gate> {
    let mut g = Vec::new();
    for j in 0..n {
        g.push(Gate::H { qubit: 0 });
        for k in 0..n - 1 - j {
            let phi = PI / f64::powi(2.0, k as i32 + 1);
            g.push(Gate::CpSwap { control: k, target: k + 1, phi });
        }
    }
    g
}

fn iqp(n: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut g: Vec<Gate> = (0..n).map(|q| Gate::H { qubit: q }).collect();
    for layer in 0..n {
        for i in (layer % 2..n - 1).step_by(2) {
            g.push(Gate::CpSwap { control: i, target: i + 1, phi: rng.gen_range(0.0..2.0 * PI) });
        }
    }
    g.extend((0..n).map(|q| Gate::H { qubit: q }));
    g
}

fn random_rot(q: usize, rng: &mut ChaCha8Rng) -> Gate {
    Gate::Rot { qubit: q, alpha: rng.gen_range(-PI..PI), beta: rng.gen_range(-PI..PI), gamma: rng.gen_range(-PI..PI) }
}

fn hwea(n: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let mut g = Vec::new();
    for _ in 0..2 {
        g.extend((0..n).map(|q| random_rot(q, rng)));
        g.extend((0..n - 1).map(|i| Gate::Cnot { control: i, target: i + 1 }));
    }
    g.extend((0..n).map(|q| random_rot(q, rng)));
    g
}

fn hc(n: usize, rng: &mut ChaCha8Rng) -> Vec<Gate> {
    let rx = |q: usize, a: f64| Gate::Rot { qubit: q, alpha: a, beta: 0.0, gamma: 0.0 };
    let mut g: Vec<Gate> = (0..n / 2).map(|q| rx(q, PI)).collect();
    for start in [0, 1] {
        for i in (start..n - 1).step_by(2) {
            let theta = rng.gen_range(-PI..PI);
            g.extend([
                rx(i, PI / 2.0),
                rx(i + 1, PI / 2.0),
                Gate::Cnot { control: i, target: i + 1 },
                Gate::Rot { qubit: i + 1, alpha: 0.0, beta: theta, gamma: 0.0 },
                Gate::Cnot { control: i, target: i + 1 },
                rx(i, -PI / 2.0),
                rx(i + 1, -PI / 2.0),
            ]);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::two_qubit_layer_count;

    #[test]
    fn hc_rejects_odd_counts() {
        assert_eq!(generate_benchmark(Benchmark::Hc, 5, 0), Err(BenchError::OddQubitCount(5)));
    }

    #[test]
    fn bv_layer_structure() {
        let c3 = generate_benchmark(Benchmark::Bv, 3, 0).unwrap();
        assert_eq!(two_qubit_layer_count(&c3), 2);
        let c5 = generate_benchmark(Benchmark::Bv, 5, 0).unwrap();
        assert_eq!(two_qubit_layer_count(&c5), 4);
    }

    #[test]
    fn generators_are_pure() {
        for b in Benchmark::ALL {
            let a = generate_benchmark(b, 6, 7).unwrap();
            assert_eq!(a, generate_benchmark(b, 6, 7).unwrap());
            assert!(GateCircuit::new(a.num_qubits, a.gates.clone()).is_ok());
        }
    }

    #[test]
    fn qft_swap_network_is_nearest_neighbour() {
        let c = generate_benchmark(Benchmark::Qft, 5, 0).unwrap();
        assert_eq!(c.two_qubit_gate_count(), 10);
        for g in &c.gates {
            if let Gate::CpSwap { control, target, .. } = g {
                assert_eq!(control.abs_diff(*target), 1);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for b in Benchmark::ALL {
            assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        }
        assert!("ghz".parse::<Benchmark>().is_err());
    }
}
