//! Partition of a baseline grid into components, wires and the component DAG.
//!
//! Couplers are found from their bridge photons (cells off every channel): a Y hub between
//! two channel cells is a TX, an X hub with a θ leaf is a TP. Each channel is then cut at
//! its coupler cells. Inside a segment, even X runs become wires; an odd run of three or
//! more keeps one X in the neighbouring S component (the following one when the segment
//! continues past the run, otherwise the preceding one). The channel's readout is a
//! separate 1-cell S, labelled `O<n>`.

use crate::grid::{Coord, MbqcGrid, MeasurementBasis as B};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    Tp,
    Tx,
    S,
    Wire,
}

impl ComponentKind {
    pub fn prefix(self) -> &'static str {
        match self {
            ComponentKind::Tp => "TP",
            ComponentKind::Tx => "TX",
            ComponentKind::S => "S",
            ComponentKind::Wire => "W",
        }
    }
}

/// A cell in component-relative coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompCell {
    pub row: i32,
    pub col: i32,
    pub basis: B,
}

/// Coupler cell layout: `[upper channel, hub, lower channel, leaf]`.
pub const HUB: usize = 1;
pub const LEAF: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
    pub label: String,
    /// Baseline geometry relative to `origin`; S and wire cells are in channel order.
    pub cells: Vec<CompCell>,
    /// One channel for S and wires; `[upper, lower]` (baseline rows) for couplers.
    pub channels: Vec<usize>,
    /// Cell index of the entry photon, per entry of `channels`.
    pub in_points: Vec<usize>,
    /// Cell index of the exit photon, per entry of `channels`.
    pub out_points: Vec<usize>,
    /// Baseline grid position of relative (0, 0).
    pub origin: Coord,
}

impl Component {
    pub fn is_coupler(&self) -> bool {
        matches!(self.kind, ComponentKind::Tp | ComponentKind::Tx)
    }

    pub fn is_readout(&self) -> bool {
        self.cells.len() == 1 && matches!(self.cells[0].basis, B::Readout)
    }

    /// Position of `channel` in `self.channels`.
    pub fn slot(&self, channel: usize) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    /// Whether cell `i` lies on a channel (as opposed to a coupler's hub or leaf).
    pub fn is_channel_cell(&self, i: usize) -> bool {
        !self.is_coupler() || i == 0 || i == 2
    }

    pub fn baseline_cells(&self) -> impl Iterator<Item = (Coord, B)> + '_ {
        self.cells.iter().map(move |c| {
            let r = self.origin.0 as i64 + c.row as i64;
            let k = self.origin.1 as i64 + c.col as i64;
            ((r as usize, k as usize), c.basis)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagEdge {
    pub parent: usize,
    pub child: usize,
    pub channel: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDag {
    pub nodes: usize,
    pub edges: Vec<DagEdge>,
}

impl ComponentDag {
    pub fn parents(&self, child: usize) -> impl Iterator<Item = &DagEdge> + '_ {
        self.edges.iter().filter(move |e| e.child == child)
    }

    pub fn children(&self, parent: usize) -> impl Iterator<Item = &DagEdge> + '_ {
        self.edges.iter().filter(move |e| e.parent == parent)
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.nodes).filter(|&n| self.parents(n).next().is_none()).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        let mut indeg = vec![0usize; self.nodes];
        for e in &self.edges {
            indeg[e.child] += 1;
        }
        let mut stack: Vec<usize> = (0..self.nodes).filter(|&n| indeg[n] == 0).collect();
        let mut seen = 0;
        while let Some(n) = stack.pop() {
            seen += 1;
            for e in self.children(n) {
                indeg[e.child] -= 1;
                if indeg[e.child] == 0 {
                    stack.push(e.child);
                }
            }
        }
        seen == self.nodes
    }
}

/// An element of a channel's ordered route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Element {
    Comp(usize),
    Wire(usize),
}

/// Result of partitioning a baseline grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub width: usize,
    pub components: Vec<Component>,
    pub wires: Vec<Component>,
    pub dag: ComponentDag,
    /// Per channel, its components and wires in channel order.
    pub routes: Vec<Vec<Element>>,
}

impl Decomposition {
    pub fn num_channels(&self) -> usize {
        self.routes.len()
    }

    /// Parent of `comp` on `channel`, if any.
    pub fn parent_on(&self, comp: usize, channel: usize) -> Option<usize> {
        self.dag.parents(comp).find(|e| e.channel == channel).map(|e| e.parent)
    }

    /// Rebuilds the baseline grid from components and wires.
    pub fn reassemble(&self) -> MbqcGrid {
        let mut g = MbqcGrid::new(self.width);
        g.set_meta(self.num_channels(), 1);
        for c in self.components.iter().chain(&self.wires) {
            for ((r, k), b) in c.baseline_cells() {
                g.set(r, k, b).expect("component inside grid");
            }
        }
        let channels = self
            .routes
            .iter()
            .enumerate()
            .map(|(k, route)| {
                let mut ch = Vec::new();
                for el in route {
                    let c = match *el {
                        Element::Comp(i) => &self.components[i],
                        Element::Wire(i) => &self.wires[i],
                    };
                    let cells: Vec<Coord> = c.baseline_cells().map(|(p, _)| p).collect();
                    match c.kind {
                        ComponentKind::Tp | ComponentKind::Tx => {
                            let s = c.slot(k).expect("coupler on channel");
                            ch.push(cells[c.in_points[s]]);
                        }
                        _ => ch.extend(cells),
                    }
                }
                ch
            })
            .collect();
        g.set_channels(channels);
        g
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ComponentError {
    #[error("cell {0:?} is neither on a channel nor part of a recognizable coupler")]
    Unpartitionable(Coord),
    #[error("channel {0} is not a connected sequence of photons")]
    BrokenChannel(usize),
}

struct Proto {
    kind: ComponentKind,
    cells: Vec<(Coord, B)>,
    channels: Vec<usize>,
}

/// Partitions a baseline grid. Component ids follow (leftmost column, top row) order.
pub fn extract_components(grid: &MbqcGrid) -> Result<Decomposition, ComponentError> {
    let channels = grid.channels();
    let mut on_channel: HashMap<Coord, usize> = HashMap::new();
    for (k, ch) in channels.iter().enumerate() {
        for w in ch.windows(2) {
            if w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1) != 1 {
                return Err(ComponentError::BrokenChannel(k));
            }
        }
        for &p in ch {
            on_channel.insert(p, k);
        }
    }

    // Couplers from bridge photons.
    let mut couplers: BTreeMap<Coord, Proto> = BTreeMap::new(); // keyed by hub
    let mut coupler_cell: HashMap<Coord, Coord> = HashMap::new(); // channel cell -> hub
    let mut claimed: HashMap<Coord, ()> = HashMap::new();
    for ((r, c), b) in grid.non_z() {
        if on_channel.contains_key(&(r, c)) || !matches!(b, B::X | B::Y) {
            continue;
        }
        if r == 0 {
            continue;
        }
        let (up, down) = ((r - 1, c), (r + 1, c));
        let (Some(&cu), Some(&cd)) = (on_channel.get(&up), on_channel.get(&down)) else {
            continue;
        };
        let (kind, leaf) = match b {
            B::Y => (ComponentKind::Tx, None),
            _ => match grid.get(r, c + 1) {
                B::Theta(_) if !on_channel.contains_key(&(r, c + 1)) => (ComponentKind::Tp, Some((r, c + 1))),
                _ => continue,
            },
        };
        let mut cells = vec![(up, grid.get(up.0, up.1)), ((r, c), b), (down, grid.get(down.0, down.1))];
        if let Some(l) = leaf {
            cells.push((l, grid.get(l.0, l.1)));
            claimed.insert(l, ());
        }
        claimed.insert((r, c), ());
        coupler_cell.insert(up, (r, c));
        coupler_cell.insert(down, (r, c));
        couplers.insert((r, c), Proto { kind, cells, channels: vec![cu, cd] });
    }
    for ((r, c), _) in grid.non_z() {
        if !on_channel.contains_key(&(r, c)) && !claimed.contains_key(&(r, c)) {
            return Err(ComponentError::Unpartitionable((r, c)));
        }
    }

    // Walk channels.
    let mut protos: Vec<Proto> = Vec::new();
    let mut wires: Vec<Proto> = Vec::new();
    // Route entries: (is_wire, index into protos/wires or hub key)
    enum Tmp {
        P(usize),
        W(usize),
        Hub(Coord),
    }
    let mut tmp_routes: Vec<Vec<Tmp>> = Vec::new();
    for (k, ch) in channels.iter().enumerate() {
        let mut route = Vec::new();
        let mut seg: Vec<(Coord, B)> = Vec::new();
        let flush =
            |seg: &mut Vec<(Coord, B)>, route: &mut Vec<Tmp>, protos: &mut Vec<Proto>, wires: &mut Vec<Proto>| {
                for (is_wire, cells) in split_segment(seg) {
                    let p = Proto {
                        kind: if is_wire { ComponentKind::Wire } else { ComponentKind::S },
                        cells,
                        channels: vec![k],
                    };
                    if is_wire {
                        wires.push(p);
                        route.push(Tmp::W(wires.len() - 1));
                    } else {
                        protos.push(p);
                        route.push(Tmp::P(protos.len() - 1));
                    }
                }
                seg.clear();
            };
        for (i, &p) in ch.iter().enumerate() {
            let b = grid.get(p.0, p.1);
            if let Some(&hub) = coupler_cell.get(&p) {
                flush(&mut seg, &mut route, &mut protos, &mut wires);
                route.push(Tmp::Hub(hub));
            } else if matches!(b, B::Readout) && i + 1 == ch.len() {
                flush(&mut seg, &mut route, &mut protos, &mut wires);
                protos.push(Proto { kind: ComponentKind::S, cells: vec![(p, b)], channels: vec![k] });
                route.push(Tmp::P(protos.len() - 1));
            } else {
                seg.push((p, b));
            }
        }
        flush(&mut seg, &mut route, &mut protos, &mut wires);
        tmp_routes.push(route);
    }

    // Ids by (leftmost column, top row).
    let hub_keys: Vec<Coord> = couplers.keys().copied().collect();
    let mut order: Vec<(Coord, usize)> = Vec::new(); // (sort key, global index)
    let n_s = protos.len();
    let key = |cells: &[(Coord, B)]| {
        let c = cells.iter().map(|(p, _)| p.1).min().unwrap();
        let r = cells.iter().filter(|(p, _)| p.1 == c).map(|(p, _)| p.0).min().unwrap();
        (c, r)
    };
    for (i, p) in protos.iter().enumerate() {
        order.push((key(&p.cells), i));
    }
    for (j, h) in hub_keys.iter().enumerate() {
        order.push((key(&couplers[h].cells), n_s + j));
    }
    order.sort();
    let mut id_of = vec![0usize; order.len()];
    for (id, &(_, g)) in order.iter().enumerate() {
        id_of[g] = id;
    }
    let hub_index: HashMap<Coord, usize> = hub_keys.iter().enumerate().map(|(j, &h)| (h, j)).collect();

    let mut counters: HashMap<&str, usize> = HashMap::new();
    let mut components: Vec<Option<Component>> = vec![None; order.len()];
    for &(_, g) in &order {
        let proto = if g < n_s { &protos[g] } else { &couplers[&hub_keys[g - n_s]] };
        let id = id_of[g];
        let readout = proto.cells.len() == 1 && matches!(proto.cells[0].1, B::Readout);
        let prefix = if readout { "O" } else { proto.kind.prefix() };
        let n = counters.entry(prefix).or_insert(0);
        let label = format!("{prefix}{n}");
        *n += 1;
        components[id] = Some(build(id, label, proto));
    }
    let components: Vec<Component> = components.into_iter().map(|c| c.expect("all ids assigned")).collect();
    let mut wire_comps = Vec::new();
    for (i, w) in wires.iter().enumerate() {
        wire_comps.push(build(i, format!("W{i}"), w));
    }

    let mut routes = Vec::new();
    let mut edges = Vec::new();
    for (k, r) in tmp_routes.iter().enumerate() {
        let mut route = Vec::new();
        let mut prev: Option<usize> = None;
        for t in r {
            let el = match t {
                Tmp::P(i) => Element::Comp(id_of[*i]),
                Tmp::W(i) => Element::Wire(*i),
                Tmp::Hub(h) => Element::Comp(id_of[n_s + hub_index[h]]),
            };
            if let Element::Comp(c) = el {
                if let Some(p) = prev {
                    edges.push(DagEdge { parent: p, child: c, channel: k });
                }
                prev = Some(c);
            }
            route.push(el);
        }
        routes.push(route);
    }
    edges.sort_by_key(|e| (e.child, e.channel));
    let dag = ComponentDag { nodes: components.len(), edges };
    Ok(Decomposition { width: grid.width(), components, wires: wire_comps, dag, routes })
}

fn build(id: usize, label: String, p: &Proto) -> Component {
    let (or, oc) = p.cells[0].0;
    let cells = p
        .cells
        .iter()
        .map(|&((r, c), b)| CompCell { row: r as i32 - or as i32, col: c as i32 - oc as i32, basis: b })
        .collect();
    let (in_points, out_points) = match p.kind {
        ComponentKind::Tp | ComponentKind::Tx => (vec![0, 2], vec![0, 2]),
        _ => (vec![0], vec![p.cells.len() - 1]),
    };
    Component { id, kind: p.kind, label, cells, channels: p.channels.clone(), in_points, out_points, origin: (or, oc) }
}

/// Splits a coupler-free channel segment into `(is_wire, cells)` runs.
fn split_segment(seg: &[(Coord, B)]) -> Vec<(bool, Vec<(Coord, B)>)> {
    let is_x = |i: usize| matches!(seg[i].1, B::X);
    // Mark wire cells.
    let mut wire = vec![false; seg.len()];
    let mut i = 0;
    while i < seg.len() {
        if !is_x(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < seg.len() && is_x(i) {
            i += 1;
        }
        let len = i - start;
        if len >= 2 {
            if len % 2 == 0 {
                wire[start..i].iter_mut().for_each(|w| *w = true);
            } else if i < seg.len() {
                wire[start..i - 1].iter_mut().for_each(|w| *w = true);
            } else {
                wire[start + 1..i].iter_mut().for_each(|w| *w = true);
            }
        }
    }
    let mut out: Vec<(bool, Vec<(Coord, B)>)> = Vec::new();
    for (k, &cell) in seg.iter().enumerate() {
        match out.last_mut() {
            Some((w, cells)) if *w == wire[k] => cells.push(cell),
            _ => out.push((wire[k], vec![cell])),
        }
    }
    out
}
