//! Post-selected statevector simulation of small patterns.
//!
//! Qubits are added lazily in measurement order, so a 3×8 pattern never holds more than a
//! handful of photons at once. State vectors use big-endian operand order: the first
//! in/out point is the most significant bit.

use crate::circuit::Gate;
use crate::grid::MeasurementBasis;
use crate::pattern::{Pattern, Pauli};
use num_complex::Complex64 as C;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("post-selected branch has zero probability at cell {0:?}")]
    ZeroProbability((usize, usize)),
    #[error("input state has length {got}, expected {expected}")]
    BadInput { got: usize, expected: usize },
    #[error("pattern exceeds the simulator's desk-scale bounds (3 rows × 8 columns)")]
    TooLarge,
    #[error("readout cell {0:?} is not an output point")]
    StrayReadout((usize, usize)),
}

const EPS: f64 = 1e-12;

struct State {
    amps: Vec<C>,
    /// `live[k]` is the cell stored at bit `k` (little-endian).
    live: Vec<usize>,
}

impl State {
    fn add_plus(&mut self, node: usize) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let n = self.amps.len();
        let mut next = Vec::with_capacity(2 * n);
        next.extend(self.amps.iter().map(|a| a * s));
        next.extend(self.amps.iter().map(|a| a * s));
        self.amps = next;
        self.live.push(node);
    }

    fn pos(&self, node: usize) -> usize {
        self.live.iter().position(|&x| x == node).expect("live node")
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << self.pos(a)) | (1usize << self.pos(b));
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Contracts `node` with the bra `(b0, b1)` and renormalizes.
    fn project(&mut self, node: usize, b0: C, b1: C) -> bool {
        let p = self.pos(node);
        let low = (1usize << p) - 1;
        let half = self.amps.len() / 2;
        let mut next = vec![C::new(0.0, 0.0); half];
        for (j, out) in next.iter_mut().enumerate() {
            let i0 = (j & low) | ((j & !low) << 1);
            *out = b0 * self.amps[i0] + b1 * self.amps[i0 | (1 << p)];
        }
        let norm: f64 = next.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < EPS {
            return false;
        }
        for a in &mut next {
            *a /= norm;
        }
        self.amps = next;
        self.live.remove(p);
        true
    }
}

fn bra(b: MeasurementBasis) -> (C, C) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let theta = match b {
        MeasurementBasis::X => 0.0,
        MeasurementBasis::Y => std::f64::consts::FRAC_PI_2,
        MeasurementBasis::Theta(t) => t,
        _ => unreachable!("only X, Y and θ cells are projected"),
    };
    (C::new(s, 0.0), C::from_polar(s, -theta))
}

/// Builds the cluster on the pattern's non-Z cells, projects every non-output photon onto
/// its +1 outcome, applies the pattern's Pauli frame and returns the output state.
pub fn simulate_pattern_postselected(pattern: &Pattern, input: &[C]) -> Result<Vec<C>, SimError> {
    if pattern.rows() > 3 || pattern.cols() > 8 {
        return Err(SimError::TooLarge);
    }
    let k = pattern.in_points.len();
    if input.len() != 1 << k {
        return Err(SimError::BadInput { got: input.len(), expected: 1 << k });
    }
    let cells: Vec<_> = pattern.cells.iter().filter(|c| !c.basis.is_z()).collect();
    let index: HashMap<(usize, usize), usize> = cells.iter().enumerate().map(|(i, c)| ((c.row, c.col), i)).collect();
    let node = |p: &(usize, usize)| index[p];
    let outputs: Vec<usize> = pattern.out_points.iter().map(node).collect();
    let neighbours = |i: usize| -> Vec<usize> {
        let (r, c) = (cells[i].row as i64, cells[i].col as i64);
        [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter(|&(a, b)| a >= 0 && b >= 0)
            .filter_map(|(a, b)| index.get(&(a as usize, b as usize)).copied())
            .collect()
    };

    // Inputs enter as the given joint state; in_point k moves to little-endian bit k.
    let mut amps = vec![C::new(0.0, 0.0); input.len()];
    for (i, a) in input.iter().enumerate() {
        let mut j = 0;
        for b in 0..k {
            if i >> (k - 1 - b) & 1 == 1 {
                j |= 1 << b;
            }
        }
        amps[j] = *a;
    }
    let mut st = State { amps, live: pattern.in_points.iter().map(node).collect() };
    let mut added = vec![false; cells.len()];
    for &n in &st.live {
        added[n] = true;
    }
    let mut applied: std::collections::HashSet<(usize, usize)> = Default::default();

    let mut order: Vec<usize> = (0..cells.len()).filter(|i| !outputs.contains(i)).collect();
    order.sort_by_key(|&i| (cells[i].col, cells[i].row));
    for u in order {
        if matches!(cells[u].basis, MeasurementBasis::Readout) {
            return Err(SimError::StrayReadout((cells[u].row, cells[u].col)));
        }
        let nb = neighbours(u);
        for &v in std::iter::once(&u).chain(&nb) {
            if !added[v] {
                st.add_plus(v);
                added[v] = true;
            }
        }
        for &v in &nb {
            let e = (u.min(v), u.max(v));
            if applied.insert(e) {
                st.cz(u, v);
            }
        }
        let (b0, b1) = bra(cells[u].basis);
        if !st.project(u, b0, b1) {
            return Err(SimError::ZeroProbability((cells[u].row, cells[u].col)));
        }
    }
    for &o in &outputs {
        if !added[o] {
            st.add_plus(o);
            added[o] = true;
        }
    }
    for &o in &outputs {
        for v in neighbours(o) {
            let e = (o.min(v), o.max(v));
            if outputs.contains(&v) && applied.insert(e) {
                st.cz(o, v);
            }
        }
    }

    // Reorder to big-endian output order.
    let m = outputs.len();
    let bit_of: Vec<usize> = outputs.iter().map(|&o| st.pos(o)).collect();
    let mut out = vec![C::new(0.0, 0.0); 1 << m];
    for (j, o) in out.iter_mut().enumerate() {
        let mut i = 0;
        for (q, &bit) in bit_of.iter().enumerate() {
            if j >> (m - 1 - q) & 1 == 1 {
                i |= 1 << bit;
            }
        }
        *o = st.amps[i];
    }
    for (q, p) in pattern.frame.iter().enumerate() {
        out = apply_single(&out, m, q, &pauli_matrix(*p));
    }
    Ok(out)
}

type M2 = [[C; 2]; 2];

fn pauli_matrix(p: Pauli) -> M2 {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

fn apply_single(state: &[C], n: usize, q: usize, u: &M2) -> Vec<C> {
    let bit = n - 1 - q;
    let mut out = state.to_vec();
    for i in 0..state.len() {
        if i >> bit & 1 == 0 {
            let j = i | 1 << bit;
            out[i] = u[0][0] * state[i] + u[0][1] * state[j];
            out[j] = u[1][0] * state[i] + u[1][1] * state[j];
        }
    }
    out
}

fn mat_mul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn rx(t: f64) -> Vec<Vec<C>> {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![C::new(c, 0.0), C::new(0.0, -s)], vec![C::new(0.0, -s), C::new(c, 0.0)]]
}

fn rz(t: f64) -> Vec<Vec<C>> {
    let z = C::new(0.0, 0.0);
    vec![vec![C::from_polar(1.0, -t / 2.0), z], vec![z, C::from_polar(1.0, t / 2.0)]]
}

/// Dense unitary of a gate on its own operands (first operand most significant).
pub fn gate_unitary(gate: &Gate) -> Vec<Vec<C>> {
    let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
    match *gate {
        Gate::H { .. } => {
            let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            vec![vec![s, s], vec![s, -s]]
        }
        Gate::Rot { alpha, beta, gamma, .. } => mat_mul(&rx(gamma), &mat_mul(&rz(beta), &rx(alpha))),
        Gate::Cnot { .. } => vec![vec![o, z, z, z], vec![z, o, z, z], vec![z, z, z, o], vec![z, z, o, z]],
        Gate::CpSwap { phi, .. } => {
            vec![vec![o, z, z, z], vec![z, z, o, z], vec![z, o, z, z], vec![z, z, z, C::from_polar(1.0, phi)]]
        }
    }
}

pub fn apply_unitary(u: &[Vec<C>], state: &[C]) -> Vec<C> {
    u.iter().map(|row| row.iter().zip(state).map(|(a, b)| a * b).sum()).collect()
}

/// `|⟨a|b⟩|²` for normalized vectors.
pub fn fidelity(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>().norm_sqr()
}
