//! Baseline lowering: one straight channel per wire on even rows, patterns concatenated in
//! gate order.
//!
//! Scheduling rules:
//!
//! * A channel starts at its first gate; photons before that are Z.
//! * Two-qubit couplers sit at odd columns. Every pattern row has even length, so channel
//!   cursors stay even and any wait is an even run of X photons (a wire).
//! * Wait wires go right after the previous coupler's tail, which keeps single-qubit gates
//!   adjacent to the next coupler.
//! * Two-qubit gates on non-adjacent wires are routed by physical swaps (`CpSwap` with φ = 0)
//!   that move the second operand toward the first.

use crate::circuit::{Gate, GateCircuit};
use crate::grid::{MbqcGrid, MeasurementBasis as B};
use crate::pattern::{pattern_for, Pattern, COUPLER_COL, HEAD_LEN};

#[derive(Default)]
struct Lane {
    cells: Vec<B>,
    start: Option<usize>,
    seg_start: usize,
}

impl Lane {
    fn cursor(&self) -> usize {
        self.start.unwrap_or(0) + self.cells.len()
    }
}

/// Extra facts about a lowering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoweringInfo {
    /// Physical wire holding each logical qubit at the end of the circuit.
    pub output_wire: Vec<usize>,
    /// Number of routing swaps inserted.
    pub routing_swaps: usize,
}

pub fn lower_baseline(circuit: &GateCircuit) -> MbqcGrid {
    lower_baseline_with_info(circuit).0
}

pub fn lower_baseline_with_info(circuit: &GateCircuit) -> (MbqcGrid, LoweringInfo) {
    let n = circuit.num_qubits;
    let mut lanes: Vec<Lane> = (0..n).map(|_| Lane::default()).collect();
    let mut bridges: Vec<((usize, usize), B)> = Vec::new();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut swaps = 0;

    for gate in &circuit.gates {
        match *gate {
            Gate::H { qubit } | Gate::Rot { qubit, .. } => {
                let p = pattern_for(gate);
                let lane = &mut lanes[pos[qubit]];
                lane.cells.extend(row_cells(&p, 0).into_iter().map(|(_, b)| b));
            }
            Gate::Cnot { control: a, target: b } | Gate::CpSwap { control: a, target: b, .. } => {
                while pos[a].abs_diff(pos[b]) > 1 {
                    let w = pos[b];
                    let w2 = if pos[a] < w { w - 1 } else { w + 1 };
                    let swap = pattern_for(&Gate::CpSwap { control: 0, target: 1, phi: 0.0 });
                    place_two(&mut lanes, &mut bridges, w.min(w2), &swap);
                    let other = pos.iter().position(|&x| x == w2).expect("wire occupied");
                    pos.swap(b, other);
                    swaps += 1;
                }
                let p = pattern_for(gate);
                let (upper, p) = if pos[a] < pos[b] { (pos[a], p) } else { (pos[b], p.mirrored()) };
                place_two(&mut lanes, &mut bridges, upper, &p);
            }
        }
    }

    let width = 2 * n - 1;
    let mut grid = MbqcGrid::new(width);
    grid.set_meta(n, 1);
    let mut channels = Vec::with_capacity(n);
    for (w, lane) in lanes.iter_mut().enumerate() {
        lane.cells.push(B::Readout);
        let start = lane.start.unwrap_or(0);
        let mut ch = Vec::with_capacity(lane.cells.len());
        for (i, &b) in lane.cells.iter().enumerate() {
            grid.set(2 * w, start + i, b).expect("row in range");
            ch.push((2 * w, start + i));
        }
        channels.push(ch);
    }
    for ((r, c), b) in bridges {
        grid.set(r, c, b).expect("row in range");
    }
    grid.set_channels(channels);
    (grid, LoweringInfo { output_wire: pos, routing_swaps: swaps })
}

/// Measured cells of one pattern row in column order (the output photon excluded).
fn row_cells(p: &Pattern, r: usize) -> Vec<(usize, B)> {
    let mut v: Vec<(usize, B)> =
        p.cells.iter().filter(|c| c.row == r && !matches!(c.basis, B::Readout)).map(|c| (c.col, c.basis)).collect();
    v.sort_by_key(|&(c, _)| c);
    v
}

/// Places a 3-row pattern whose row 0 lands on wire `upper` and row 2 on `upper + 1`.
fn place_two(lanes: &mut [Lane], bridges: &mut Vec<((usize, usize), B)>, upper: usize, p: &Pattern) {
    let wires = [upper, upper + 1];
    let g = wires.iter().map(|&w| lanes[w].cursor() + HEAD_LEN).max().expect("two wires");
    debug_assert!(g % 2 == 1, "coupler columns are odd");
    for (k, &w) in wires.iter().enumerate() {
        let lane = &mut lanes[w];
        match lane.start {
            Some(_) => {
                let pad = g - HEAD_LEN - lane.cursor();
                let at = lane.seg_start;
                lane.cells.splice(at..at, std::iter::repeat_n(B::X, pad));
            }
            None => lane.start = Some(g - HEAD_LEN - lane.cells.len()),
        }
        lane.cells.extend(row_cells(p, 2 * k).into_iter().map(|(_, b)| b));
        lane.seg_start = lane.cells.len();
    }
    for c in p.cells.iter().filter(|c| c.row == 1) {
        bridges.push(((2 * upper + 1, g - COUPLER_COL + c.col), c.basis));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn empty_single_qubit_is_one_readout() {
        let g = lower_baseline(&GateCircuit { num_qubits: 1, gates: vec![] });
        assert_eq!((g.width(), g.depth()), (1, 1));
        assert_eq!(g.get(0, 0), B::Readout);
    }

    #[test]
    fn two_qubit_example_depth() {
        let c = parse_circuit("qubits 2\nrot 0 0.3 0.2 0.1\nrot 1 0.4 0.5 0.6\ncpswap 0 1 pi/2\ncnot 0 1\n").unwrap();
        let g = lower_baseline(&c);
        assert_eq!(g.width(), 3);
        assert_eq!(g.depth(), 17);
    }

    #[test]
    fn long_range_gate_is_routed() {
        let c = parse_circuit("qubits 3\ncnot 0 2\n").unwrap();
        let (g, info) = lower_baseline_with_info(&c);
        assert_eq!(info.routing_swaps, 1);
        assert_eq!(info.output_wire, vec![0, 2, 1]);
        // swap coupler on rows 2-4, CNOT coupler on rows 0-2
        assert_eq!(g.get(3, 3), B::X);
        assert_eq!(g.get(1, 9), B::Y);
    }

    #[test]
    fn waits_are_even_wires_after_the_tail() {
        // wire 1 waits for wire 0's second gate
        let c = parse_circuit("qubits 2\ncnot 0 1\nh 0\nh 0\ncnot 0 1\n").unwrap();
        let g = lower_baseline(&c);
        let row2: String = (0..g.depth()).map(|c| g.get(2, c).symbol()).collect();
        assert_eq!(row2, format!("XXXYXX{}XXXYXXO", "X".repeat(8)));
    }
}
