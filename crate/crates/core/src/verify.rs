//! Checks on finished grids that use nothing but the grid and its channel annotations.
//!
//! The audit re-derives couplers from bridge photons (cells off every channel) and checks
//! the four layout constraints without looking at component tags, so it is an independent
//! second opinion on the compiler's own bookkeeping. Equivalence compares what each channel
//! measures, in order, against the baseline.

use crate::grid::{Coord, MbqcGrid, MeasurementBasis as B};
use crate::placement::Constraint;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditViolation {
    pub constraint: Constraint,
    pub at: Coord,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A bridge photon joining two channels, with its optional phase leaf.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Hub {
    at: Coord,
    basis: B,
    upper: Coord,
    lower: Coord,
    leaf: Option<Coord>,
}

fn neighbours((r, c): Coord) -> impl Iterator<Item = Coord> {
    [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)]
        .into_iter()
        .filter(|&(a, b)| a != usize::MAX && b != usize::MAX)
}

fn adjacent(a: Coord, b: Coord) -> bool {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1
}

struct Layout {
    /// Channel and index along it, per channel photon.
    on_channel: HashMap<Coord, (usize, usize)>,
    hubs: Vec<Hub>,
    /// Channel photon -> hub index.
    hub_of: HashMap<Coord, usize>,
}

/// Classifies bridges. Anything that is neither a hub nor a hub's leaf is reported.
fn layout(grid: &MbqcGrid, out: &mut Vec<AuditViolation>) -> Layout {
    let mut on_channel = HashMap::new();
    for (k, ch) in grid.channels().iter().enumerate() {
        for (i, &p) in ch.iter().enumerate() {
            if on_channel.insert(p, (k, i)).is_some() {
                out.push(AuditViolation { constraint: Constraint::I, at: p, detail: "photon on two channels".into() });
            }
        }
    }
    let bridges: Vec<(Coord, B)> = grid.non_z().filter(|(p, _)| !on_channel.contains_key(p)).collect();
    let is_bridge: HashSet<Coord> = bridges.iter().map(|x| x.0).collect();
    let mut hubs = Vec::new();
    let mut hub_of = HashMap::new();
    let mut leaf_taken = HashSet::new();
    for &((r, c), b) in &bridges {
        if r == 0 || !matches!(b, B::X | B::Y) {
            continue;
        }
        let (up, down) = ((r - 1, c), (r + 1, c));
        let (Some(&(ku, _)), Some(&(kd, _))) = (on_channel.get(&up), on_channel.get(&down)) else { continue };
        if ku == kd {
            continue;
        }
        let leaves: Vec<Coord> =
            neighbours((r, c)).filter(|q| is_bridge.contains(q) && matches!(grid.get(q.0, q.1), B::Theta(_))).collect();
        let leaf = match (b, leaves.as_slice()) {
            (B::Y, []) => None,
            (B::X, [l]) => Some(*l),
            _ => {
                out.push(AuditViolation {
                    constraint: Constraint::II,
                    at: (r, c),
                    detail: "coupler hub with the wrong leaves".into(),
                });
                continue;
            }
        };
        if let Some(l) = leaf {
            leaf_taken.insert(l);
        }
        hub_of.insert(up, hubs.len());
        hub_of.insert(down, hubs.len());
        hubs.push(Hub { at: (r, c), basis: b, upper: up, lower: down, leaf });
    }
    let hub_cells: HashSet<Coord> = hubs.iter().map(|h| h.at).collect();
    for &(p, _) in &bridges {
        if !hub_cells.contains(&p) && !leaf_taken.contains(&p) {
            out.push(AuditViolation {
                constraint: Constraint::II,
                at: p,
                detail: "photon on no channel and in no coupler".into(),
            });
        }
    }
    Layout { on_channel, hubs, hub_of }
}

/// Checks Constraints I–IV on a finished grid for a cluster of `cluster_width` rows.
pub fn audit(grid: &MbqcGrid, cluster_width: usize) -> AuditReport {
    let mut v = Vec::new();
    let lay = layout(grid, &mut v);
    let channels = grid.channels();
    let mut allowed: HashSet<(Coord, Coord)> = HashSet::new();
    let key = |a: Coord, b: Coord| (a.min(b), a.max(b));
    for ch in channels {
        for (i, &p) in ch.iter().enumerate() {
            if grid.get(p.0, p.1).is_z() {
                v.push(AuditViolation {
                    constraint: Constraint::I,
                    at: p,
                    detail: "channel runs through a removed photon".into(),
                });
            }
            if i > 0 {
                let q = ch[i - 1];
                if !adjacent(p, q) {
                    v.push(AuditViolation {
                        constraint: Constraint::I,
                        at: p,
                        detail: format!("channel gap after {q:?}"),
                    });
                }
                if p.1 < q.1 {
                    v.push(AuditViolation {
                        constraint: Constraint::III,
                        at: p,
                        detail: format!("channel steps left after {q:?}"),
                    });
                }
                allowed.insert(key(p, q));
            }
        }
        match ch.last() {
            Some(&p) if matches!(grid.get(p.0, p.1), B::Readout) => {}
            Some(&p) => v.push(AuditViolation {
                constraint: Constraint::I,
                at: p,
                detail: "channel does not end in a readout".into(),
            }),
            None => v.push(AuditViolation { constraint: Constraint::I, at: (0, 0), detail: "empty channel".into() }),
        }
        for &p in &ch[..ch.len().saturating_sub(1)] {
            if matches!(grid.get(p.0, p.1), B::Readout) {
                v.push(AuditViolation {
                    constraint: Constraint::I,
                    at: p,
                    detail: "readout before the channel end".into(),
                });
            }
        }
    }
    let successor = |p: Coord| {
        let (k, i) = lay.on_channel[&p];
        channels[k].get(i + 1).copied()
    };
    for h in &lay.hubs {
        allowed.insert(key(h.at, h.upper));
        allowed.insert(key(h.at, h.lower));
        if let Some(l) = h.leaf {
            allowed.insert(key(h.at, l));
            for p in [h.upper, h.lower] {
                match successor(p) {
                    Some(s) if adjacent(l, s) => {
                        allowed.insert(key(l, s));
                    }
                    _ => v.push(AuditViolation {
                        constraint: Constraint::II,
                        at: l,
                        detail: format!("phase leaf not joined to the photon after {p:?}"),
                    }),
                }
            }
        }
    }
    for ((r, c), _) in grid.non_z() {
        for q in [(r + 1, c), (r, c + 1)] {
            if q.0 < grid.width() && !grid.get(q.0, q.1).is_z() && !allowed.contains(&key((r, c), q)) {
                v.push(AuditViolation {
                    constraint: Constraint::II,
                    at: q,
                    detail: format!("unexpected edge from {:?}", (r, c)),
                });
            }
        }
    }
    let rows: Vec<usize> = grid.non_z().map(|(p, _)| p.0).collect();
    if let (Some(lo), Some(hi)) = (rows.iter().min(), rows.iter().max()) {
        if hi - lo + 1 > cluster_width || *hi >= cluster_width {
            v.push(AuditViolation {
                constraint: Constraint::IV,
                at: (*hi, 0),
                detail: format!("rows {lo}..={hi} exceed width {cluster_width}"),
            });
        }
    }
    v.sort_by(|a, b| (a.constraint, a.at, &a.detail).cmp(&(b.constraint, b.at, &b.detail)));
    v.dedup();
    AuditReport { violations: v }
}

/// What one channel photon does, independent of where it sits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Token {
    Measure(B),
    /// An odd run of plain X photons, i.e. one Hadamard.
    Flip,
    Coupler {
        own: B,
        hub: B,
        partner: usize,
        leaf: Option<f64>,
    },
}

fn same_token(a: &Token, b: &Token) -> bool {
    match (a, b) {
        (Token::Measure(x), Token::Measure(y)) => x.same(*y),
        (Token::Flip, Token::Flip) => true,
        (
            Token::Coupler { own: o1, hub: h1, partner: p1, leaf: l1 },
            Token::Coupler { own: o2, hub: h2, partner: p2, leaf: l2 },
        ) => {
            o1.same(*o2)
                && h1 == h2
                && p1 == p2
                && match (l1, l2) {
                    (None, None) => true,
                    (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
                    _ => false,
                }
        }
        _ => false,
    }
}

/// Per-channel token sequences. Plain X runs collapse to their parity, since two X
/// measurements in a row teleport the state unchanged.
pub fn channel_tokens(grid: &MbqcGrid) -> Vec<Vec<Token>> {
    let mut sink = Vec::new();
    let lay = layout(grid, &mut sink);
    grid.channels()
        .iter()
        .map(|ch| {
            let mut out = Vec::new();
            let mut xs = 0usize;
            for &p in ch {
                let b = grid.get(p.0, p.1);
                let tok = match lay.hub_of.get(&p) {
                    Some(&h) => {
                        let hub = &lay.hubs[h];
                        let other = if hub.upper == p { hub.lower } else { hub.upper };
                        Some(Token::Coupler {
                            own: b,
                            hub: hub.basis,
                            partner: lay.on_channel[&other].0,
                            leaf: hub.leaf.and_then(|l| grid.get(l.0, l.1).angle()),
                        })
                    }
                    None if matches!(b, B::X) => None,
                    None => Some(Token::Measure(b)),
                };
                match tok {
                    None => xs += 1,
                    Some(t) => {
                        if xs % 2 == 1 {
                            out.push(Token::Flip);
                        }
                        xs = 0;
                        out.push(t);
                    }
                }
            }
            if xs % 2 == 1 {
                out.push(Token::Flip);
            }
            out
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// One line per channel that differs.
    pub mismatches: Vec<String>,
}

/// Compares the per-channel measurement sequences of `compiled` against `baseline`.
/// Together with a clean [`audit`] this certifies that both grids implement the same
/// computation: the graph around every channel is the baseline's, up to identity wires.
pub fn check_equivalence(baseline: &MbqcGrid, compiled: &MbqcGrid) -> EquivalenceReport {
    let (a, b) = (channel_tokens(baseline), channel_tokens(compiled));
    let mut mismatches = Vec::new();
    if a.len() != b.len() {
        mismatches.push(format!("{} channels against {}", b.len(), a.len()));
    }
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        let first = x.iter().zip(y).position(|(p, q)| !same_token(p, q));
        match first {
            Some(i) => mismatches.push(format!("channel {k}: token {i} is {:?}, expected {:?}", y[i], x[i])),
            None if x.len() != y.len() => {
                mismatches.push(format!("channel {k}: {} tokens, expected {}", y.len(), x.len()))
            }
            None => {}
        }
    }
    EquivalenceReport { equivalent: mismatches.is_empty(), mismatches }
}

/// Fraction of the `width × depth` photons that are measured in a non-Z basis.
pub fn photon_utilization(grid: &MbqcGrid) -> f64 {
    let total = grid.width() * grid.depth();
    if total == 0 {
        return 0.0;
    }
    grid.non_z_count() as f64 / total as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub width: usize,
    pub baseline_depth: usize,
    pub depth: usize,
    /// `1 - depth / baseline_depth`.
    pub reduction: f64,
    pub baseline_utilization: f64,
    pub utilization: f64,
}

impl MetricsReport {
    pub fn new(baseline: &MbqcGrid, compiled: &MbqcGrid) -> Self {
        let (bd, d) = (baseline.depth(), compiled.depth());
        Self {
            width: compiled.width(),
            baseline_depth: bd,
            depth: d,
            reduction: if bd == 0 { 0.0 } else { 1.0 - d as f64 / bd as f64 },
            baseline_utilization: photon_utilization(baseline),
            utilization: photon_utilization(compiled),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::grid::pad_to_width;
    use crate::lower::lower_baseline;

    const WORKED: &str = "qubits 2\nrot 0 0.3 0.2 0.1\nrot 1 0.4 0.5 0.6\ncpswap 0 1 pi/2\ncnot 0 1\n";

    #[test]
    fn baseline_audits_clean_and_matches_itself() {
        let g = lower_baseline(&parse_circuit(WORKED).unwrap());
        assert_eq!(audit(&g, 3).violations, vec![]);
        assert!(check_equivalence(&g, &g).equivalent);
        assert!(!audit(&g, 2).ok());
    }

    #[test]
    fn utilization_of_padded_baseline() {
        let g = lower_baseline(&parse_circuit("qubits 1\nh 0\n").unwrap());
        // XYYYO on one row
        assert_eq!(photon_utilization(&g), 1.0);
        let p = pad_to_width(&g, 4).unwrap();
        assert_eq!(photon_utilization(&p), 0.25);
    }

    #[test]
    fn moved_photon_breaks_audit() {
        let mut g = lower_baseline(&parse_circuit("qubits 1\nh 0\n").unwrap());
        g.set(0, 2, B::Z).unwrap();
        let r = audit(&g, 1);
        assert!(r.violations.iter().any(|v| v.constraint == Constraint::I));
    }

    #[test]
    fn x_runs_compare_by_parity() {
        let mk = |s: &str| {
            let mut g = MbqcGrid::new(1);
            let mut ch = Vec::new();
            for (i, ch_) in s.chars().enumerate() {
                let b = match ch_ {
                    'X' => B::X,
                    'Y' => B::Y,
                    _ => B::Readout,
                };
                g.set(0, i, b).unwrap();
                ch.push((0, i));
            }
            g.set_channels(vec![ch]);
            g
        };
        assert!(check_equivalence(&mk("XYYYO"), &mk("XXXYYYO")).equivalent);
        assert!(!check_equivalence(&mk("XYYYO"), &mk("XXYYYO")).equivalent);
    }
}
