//! Measurement bases and the 2-D measurement grid that the compiler emits.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Measurement instruction for one photon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    X,
    Y,
    /// Removes the photon from the cluster.
    Z,
    /// Projection onto `(|0⟩ + e^{iθ}|1⟩)/√2`.
    Theta(f64),
    /// Final photon of a channel; carries the logical output.
    Readout,
}

impl MeasurementBasis {
    pub fn is_z(self) -> bool {
        matches!(self, MeasurementBasis::Z)
    }

    pub fn symbol(self) -> char {
        match self {
            MeasurementBasis::X => 'X',
            MeasurementBasis::Y => 'Y',
            MeasurementBasis::Z => 'Z',
            MeasurementBasis::Theta(_) => 'T',
            MeasurementBasis::Readout => 'O',
        }
    }

    pub fn angle(self) -> Option<f64> {
        match self {
            MeasurementBasis::Theta(a) => Some(a),
            _ => None,
        }
    }

    /// Bitwise equality, so that angles compare exactly (including signed zero).
    pub fn same(self, other: MeasurementBasis) -> bool {
        match (self, other) {
            (MeasurementBasis::Theta(a), MeasurementBasis::Theta(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        }
    }
}

pub type Coord = (usize, usize);

/// Optional per-cell provenance carried through compilation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellNote {
    pub component: Option<String>,
    pub round: Option<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("cell ({0}, {1}) lies outside a grid of width {2}")]
    OutOfRange(usize, usize, usize),
    #[error("target width {target} is smaller than the grid width {width}")]
    Narrowing { width: usize, target: usize },
    #[error("malformed grid file: {0}")]
    Format(String),
}

/// Fixed-width grid of measurements. Cells not stored are Z.
///
/// `depth` is always one past the largest column holding a non-Z cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MbqcGrid {
    width: usize,
    depth: usize,
    cells: BTreeMap<Coord, MeasurementBasis>,
    channels: Vec<Vec<Coord>>,
    notes: BTreeMap<Coord, CellNote>,
    num_qubits: usize,
    rounds: usize,
}

impl MbqcGrid {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            depth: 0,
            cells: BTreeMap::new(),
            channels: Vec::new(),
            notes: BTreeMap::new(),
            num_qubits: 0,
            rounds: 1,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn set_meta(&mut self, num_qubits: usize, rounds: usize) {
        self.num_qubits = num_qubits;
        self.rounds = rounds;
    }

    pub fn get(&self, row: usize, col: usize) -> MeasurementBasis {
        self.cells.get(&(row, col)).copied().unwrap_or(MeasurementBasis::Z)
    }

    /// Writes a cell. Writing Z clears it.
    pub fn set(&mut self, row: usize, col: usize, b: MeasurementBasis) -> Result<(), GridError> {
        if row >= self.width {
            return Err(GridError::OutOfRange(row, col, self.width));
        }
        if b.is_z() {
            self.cells.remove(&(row, col));
            self.notes.remove(&(row, col));
            self.depth = self.cells.keys().map(|&(_, c)| c + 1).max().unwrap_or(0);
        } else {
            self.cells.insert((row, col), b);
            self.depth = self.depth.max(col + 1);
        }
        Ok(())
    }

    /// Non-Z cells in (row, col) order.
    pub fn non_z(&self) -> impl Iterator<Item = (Coord, MeasurementBasis)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    pub fn non_z_count(&self) -> usize {
        self.cells.len()
    }

    pub fn channels(&self) -> &[Vec<Coord>] {
        &self.channels
    }

    pub fn set_channels(&mut self, channels: Vec<Vec<Coord>>) {
        self.channels = channels;
    }

    pub fn note(&self, row: usize, col: usize) -> Option<&CellNote> {
        self.notes.get(&(row, col))
    }

    pub fn set_note(&mut self, row: usize, col: usize, note: CellNote) {
        self.notes.insert((row, col), note);
    }

    pub fn notes(&self) -> &BTreeMap<Coord, CellNote> {
        &self.notes
    }

    /// Rows actually touched by a non-Z cell, plus one: the bounding-box height from row 0.
    pub fn used_height(&self) -> usize {
        self.cells.keys().map(|&(r, _)| r + 1).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GridFile::from(self)).expect("grid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        let f: GridFile = serde_json::from_str(text).map_err(|e| GridError::Format(e.to_string()))?;
        f.try_into()
    }
}

/// Appends Z-filled rows so the grid reaches `target` rows. Channels are untouched.
pub fn pad_to_width(grid: &MbqcGrid, target: usize) -> Result<MbqcGrid, GridError> {
    if target < grid.width {
        return Err(GridError::Narrowing { width: grid.width, target });
    }
    let mut g = grid.clone();
    g.width = target;
    Ok(g)
}

/// On-disk form: header, non-Z cell list, channels as coordinate lists.
#[derive(Serialize, Deserialize)]
struct GridFile {
    width: usize,
    depth: usize,
    num_qubits: usize,
    rounds: usize,
    cells: Vec<CellRecord>,
    channels: Vec<Vec<[usize; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CellRecord {
    row: usize,
    col: usize,
    /// One of `X`, `Y`, `T` (θ), `O` (readout).
    basis: char,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    component: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    round: Option<usize>,
}

impl From<&MbqcGrid> for GridFile {
    fn from(g: &MbqcGrid) -> Self {
        let cells = g
            .non_z()
            .map(|((row, col), b)| {
                let note = g.notes.get(&(row, col));
                CellRecord {
                    row,
                    col,
                    basis: b.symbol(),
                    angle: b.angle(),
                    component: note.and_then(|n| n.component.clone()),
                    round: note.and_then(|n| n.round),
                }
            })
            .collect();
        GridFile {
            width: g.width,
            depth: g.depth,
            num_qubits: g.num_qubits,
            rounds: g.rounds,
            cells,
            channels: g.channels.iter().map(|ch| ch.iter().map(|&(r, c)| [r, c]).collect()).collect(),
        }
    }
}

impl TryFrom<GridFile> for MbqcGrid {
    type Error = GridError;
    fn try_from(f: GridFile) -> Result<Self, GridError> {
        let mut g = MbqcGrid::new(f.width);
        g.set_meta(f.num_qubits, f.rounds);
        for c in f.cells {
            let b = match (c.basis, c.angle) {
                ('X', None) => MeasurementBasis::X,
                ('Y', None) => MeasurementBasis::Y,
                ('O', None) => MeasurementBasis::Readout,
                ('T', Some(a)) if a.is_finite() => MeasurementBasis::Theta(a),
                (b, a) => return Err(GridError::Format(format!("bad cell basis {b:?} / angle {a:?}"))),
            };
            g.set(c.row, c.col, b)?;
            if c.component.is_some() || c.round.is_some() {
                g.set_note(c.row, c.col, CellNote { component: c.component, round: c.round });
            }
        }
        if g.depth != f.depth {
            return Err(GridError::Format(format!(
                "header depth {} disagrees with cells (depth {})",
                f.depth, g.depth
            )));
        }
        g.channels = f.channels.into_iter().map(|ch| ch.into_iter().map(|[r, c]| (r, c)).collect()).collect();
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_tracks_last_non_z_column() {
        let mut g = MbqcGrid::new(2);
        assert_eq!(g.depth(), 0);
        g.set(1, 4, MeasurementBasis::X).unwrap();
        g.set(0, 2, MeasurementBasis::Y).unwrap();
        assert_eq!(g.depth(), 5);
        g.set(1, 4, MeasurementBasis::Z).unwrap();
        assert_eq!(g.depth(), 3);
        assert!(g.set(2, 0, MeasurementBasis::X).is_err());
    }

    #[test]
    fn padding() {
        let mut g = MbqcGrid::new(9);
        g.set(0, 0, MeasurementBasis::Readout).unwrap();
        assert_eq!(pad_to_width(&g, 12).unwrap().width(), 12);
        assert_eq!(pad_to_width(&g, 9).unwrap(), g);
        assert_eq!(pad_to_width(&g, 8), Err(GridError::Narrowing { width: 9, target: 8 }));
    }

    #[test]
    fn json_round_trip() {
        let mut g = MbqcGrid::new(3);
        g.set_meta(2, 1);
        g.set(0, 0, MeasurementBasis::Theta(-0.1234567890123)).unwrap();
        g.set(0, 1, MeasurementBasis::Readout).unwrap();
        g.set(2, 1, MeasurementBasis::Y).unwrap();
        g.set_note(2, 1, CellNote { component: Some("TX0".into()), round: Some(0) });
        g.set_channels(vec![vec![(0, 0), (0, 1)], vec![(2, 1)]]);
        let back = MbqcGrid::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }
}
