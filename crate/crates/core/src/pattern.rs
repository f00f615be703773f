//! Gate patterns: fixed arrangements of measurements that implement one gate.
//!
//! A measured chain photon with angle θ applies `H·P(-θ)` to the logical state
//! (`P(t) = diag(1, e^{-it})`); X is θ = 0 and Y is θ = π/2. From that:
//!
//! * `X Y Y Y` is H, `X X` is the identity (a wire).
//! * `X θ(-α) θ(-β) θ(-γ)` is `Rx(γ)·Rz(β)·Rx(α)`.
//! * The CNOT layout couples a control row `X Y Y Y Y Y` and a target row `X X X Y X X`
//!   through a Y in the middle row. With every outcome taken as +1 it yields
//!   `(Z ⊗ I)·CNOT`, so the pattern carries a constant Z in its Pauli frame on the control
//!   output.
//! * The CP+SWAP layout uses two rows `X Y Y θ Y Y` with θ = -φ/2, joined by an X hub and a
//!   θ leaf of angle φ/2 + π to the right of the hub. It yields `SWAP·CP(φ)` exactly.
//!
//! Output photons are listed as `Readout` cells; they are where the next pattern starts.

use crate::circuit::Gate;
use crate::grid::MeasurementBasis as B;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternKind {
    H,
    Rot,
    Cnot,
    CpSwap,
    Wire,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternCell {
    pub row: usize,
    pub col: usize,
    pub basis: B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub kind: PatternKind,
    pub cells: Vec<PatternCell>,
    /// One per logical input, in operand order.
    pub in_points: Vec<(usize, usize)>,
    /// One per logical output, in operand order.
    pub out_points: Vec<(usize, usize)>,
    /// Constant Pauli correction applied to each output after all-+1 post-selection.
    pub frame: Vec<Pauli>,
}

/// Column of the coupler cells in the two-qubit layouts.
pub const COUPLER_COL: usize = 3;
/// Cells before the coupler on each row of a two-qubit layout.
pub const HEAD_LEN: usize = 3;
/// Cells after the coupler on each row of a two-qubit layout, before the output photon.
pub const TAIL_LEN: usize = 2;

fn row(cells: &mut Vec<PatternCell>, r: usize, bases: &[B]) {
    for (c, &b) in bases.iter().enumerate() {
        cells.push(PatternCell { row: r, col: c, basis: b });
    }
}

fn single(kind: PatternKind, bases: [B; 4]) -> Pattern {
    let mut cells = Vec::new();
    row(&mut cells, 0, &bases);
    row_out(&mut cells, 0, 4);
    Pattern { kind, cells, in_points: vec![(0, 0)], out_points: vec![(0, 4)], frame: vec![Pauli::I] }
}

fn row_out(cells: &mut Vec<PatternCell>, r: usize, c: usize) {
    cells.push(PatternCell { row: r, col: c, basis: B::Readout });
}

/// The pattern for `gate` with the first operand on row 0.
pub fn pattern_for(gate: &Gate) -> Pattern {
    match *gate {
        Gate::H { .. } => single(PatternKind::H, [B::X, B::Y, B::Y, B::Y]),
        Gate::Rot { alpha, beta, gamma, .. } => {
            single(PatternKind::Rot, [B::X, B::Theta(-alpha), B::Theta(-beta), B::Theta(-gamma)])
        }
        Gate::Cnot { .. } => {
            let mut cells = Vec::new();
            row(&mut cells, 0, &[B::X, B::Y, B::Y, B::Y, B::Y, B::Y]);
            cells.push(PatternCell { row: 1, col: COUPLER_COL, basis: B::Y });
            row(&mut cells, 2, &[B::X, B::X, B::X, B::Y, B::X, B::X]);
            row_out(&mut cells, 0, 6);
            row_out(&mut cells, 2, 6);
            Pattern {
                kind: PatternKind::Cnot,
                cells,
                in_points: vec![(0, 0), (2, 0)],
                out_points: vec![(0, 6), (2, 6)],
                frame: vec![Pauli::Z, Pauli::I],
            }
        }
        Gate::CpSwap { phi, .. } => {
            let t = B::Theta(-phi / 2.0);
            let mut cells = Vec::new();
            row(&mut cells, 0, &[B::X, B::Y, B::Y, t, B::Y, B::Y]);
            cells.push(PatternCell { row: 1, col: COUPLER_COL, basis: B::X });
            cells.push(PatternCell { row: 1, col: COUPLER_COL + 1, basis: B::Theta(phi / 2.0 + PI) });
            row(&mut cells, 2, &[B::X, B::Y, B::Y, t, B::Y, B::Y]);
            row_out(&mut cells, 0, 6);
            row_out(&mut cells, 2, 6);
            Pattern {
                kind: PatternKind::CpSwap,
                cells,
                in_points: vec![(0, 0), (2, 0)],
                out_points: vec![(0, 6), (2, 6)],
                frame: vec![Pauli::I, Pauli::I],
            }
        }
    }
}

/// An identity wire of `n` X photons (n even, ≥ 2).
pub fn wire_pattern(n: usize) -> Pattern {
    assert!(n >= 2 && n.is_multiple_of(2), "wires hold an even number of X photons");
    let mut cells = Vec::new();
    row(&mut cells, 0, &vec![B::X; n]);
    row_out(&mut cells, 0, n);
    Pattern { kind: PatternKind::Wire, cells, in_points: vec![(0, 0)], out_points: vec![(0, n)], frame: vec![Pauli::I] }
}

impl Pattern {
    pub fn rows(&self) -> usize {
        self.cells.iter().map(|c| c.row + 1).max().unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        self.cells.iter().map(|c| c.col + 1).max().unwrap_or(0)
    }

    /// Vertical reflection; operand order (and therefore in/out point order) is kept, so a
    /// mirrored CNOT has its control on the bottom row.
    pub fn mirrored(&self) -> Pattern {
        let h = self.rows() - 1;
        let flip = |(r, c): (usize, usize)| (h - r, c);
        Pattern {
            kind: self.kind,
            cells: self.cells.iter().map(|c| PatternCell { row: h - c.row, ..*c }).collect(),
            in_points: self.in_points.iter().copied().map(flip).collect(),
            out_points: self.out_points.iter().copied().map(flip).collect(),
            frame: self.frame.clone(),
        }
    }

    pub fn basis_at(&self, r: usize, c: usize) -> Option<B> {
        self.cells.iter().find(|x| x.row == r && x.col == c).map(|x| x.basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_is_five_photons_in_one_row() {
        let p = pattern_for(&Gate::H { qubit: 0 });
        let bases: Vec<_> = p.cells.iter().map(|c| c.basis).collect();
        assert_eq!(bases, vec![B::X, B::Y, B::Y, B::Y, B::Readout]);
        assert_eq!((p.rows(), p.cols()), (1, 5));
    }

    #[test]
    fn zero_rotation_has_zero_angles() {
        let p = pattern_for(&Gate::Rot { qubit: 0, alpha: 0.0, beta: 0.0, gamma: 0.0 });
        let angles: Vec<f64> = p.cells.iter().filter_map(|c| c.basis.angle()).collect();
        assert_eq!(angles.len(), 3);
        assert!(angles.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn cnot_has_three_y_column() {
        let p = pattern_for(&Gate::Cnot { control: 0, target: 1 });
        assert_eq!(p.rows(), 3);
        let col: Vec<_> = (0..3).map(|r| p.basis_at(r, COUPLER_COL)).collect();
        assert_eq!(col, vec![Some(B::Y); 3]);
    }

    #[test]
    fn cpswap_middle_structure() {
        let p = pattern_for(&Gate::CpSwap { control: 0, target: 1, phi: 0.7 });
        let coupler: Vec<B> = p.cells.iter().filter(|c| c.row == 1 || c.col == COUPLER_COL).map(|c| c.basis).collect();
        assert_eq!(coupler.iter().filter(|b| matches!(b, B::X)).count(), 1);
        assert_eq!(coupler.iter().filter(|b| matches!(b, B::Theta(_))).count(), 3);
    }

    #[test]
    fn mirror_keeps_operand_order() {
        let p = pattern_for(&Gate::Cnot { control: 0, target: 1 }).mirrored();
        assert_eq!(p.in_points, vec![(2, 0), (0, 0)]);
        assert_eq!(p.basis_at(0, 1), Some(B::X));
    }
}
