//! Partial circuits and the moves that grow them.
//!
//! A [`PartialCircuit`] is one connected group of placed components on a dense board whose
//! top-left occupied row and column are both 0. Every occupied cell carries a [`Tag`] naming
//! its owner (component or inserted wire) and its index inside that owner.
//!
//! Moves come in two flavours. An [`Overlay`] adds cells to one board (a root, an
//! attachment at anchor points, optionally with a wire). A [`CombinePlan`] joins two boards
//! through a coupler. Both can be evaluated without building anything, which is what the
//! search does for every candidate; only survivors are materialized.
//!
//! Allowed adjacencies between photons are exactly the edges of the baseline graph: channel
//! neighbours, the coupler's own edges (hub to both channel photons, hub to leaf) and, for a
//! CP+SWAP coupler, leaf to the first photon after the coupler on each channel. The last
//! kind is required, not just allowed, so TP children attach only to the right of the
//! coupler.

use crate::component::{ComponentKind, Decomposition, Element, HUB, LEAF};
use crate::grid::{CellNote, MbqcGrid, MeasurementBasis as B};
use crate::variants::{generate_variants, Variant, VariantCaps};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// (row, column), possibly outside the current board.
pub type Pos = (i32, i32);

const DIRS: [Pos; 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

fn add(a: Pos, b: Pos) -> Pos {
    (a.0 + b.0, a.1 + b.1)
}

fn sub(a: Pos, b: Pos) -> Pos {
    (a.0 - b.0, a.1 - b.1)
}

fn adjacent(a: Pos, b: Pos) -> bool {
    (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1
}

const IDX_BITS: u32 = 12;
const WIRE_FLAG: u32 = 1 << 31;

/// Owner and index of an occupied cell; `Tag::EMPTY` is a free photon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Comp(usize),
    Wire(usize),
}

impl Tag {
    pub const EMPTY: Tag = Tag(0);

    pub fn comp(c: usize, i: usize) -> Tag {
        debug_assert!(i < 1 << IDX_BITS);
        Tag(((c as u32 + 1) << IDX_BITS) | i as u32)
    }

    pub fn wire(w: usize, i: usize) -> Tag {
        debug_assert!(i < 1 << IDX_BITS);
        Tag(WIRE_FLAG | ((w as u32 + 1) << IDX_BITS) | i as u32)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn owner(self) -> Owner {
        let o = ((self.0 & !WIRE_FLAG) >> IDX_BITS) as usize - 1;
        if self.0 & WIRE_FLAG != 0 {
            Owner::Wire(o)
        } else {
            Owner::Comp(o)
        }
    }

    pub fn idx(self) -> usize {
        (self.0 & ((1 << IDX_BITS) - 1)) as usize
    }

    fn with_wire_offset(self, off: usize) -> Tag {
        match self.owner() {
            Owner::Wire(w) if !self.is_empty() => Tag::wire(w + off, self.idx()),
            _ => self,
        }
    }
}

/// Everything the search needs to know about the circuit, shared by all partial circuits.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub decomp: Decomposition,
    pub width: usize,
    pub variants: Vec<Vec<Variant>>,
    /// Per component and slot, the previous and next component on that slot's channel.
    prev: Vec<Vec<Option<usize>>>,
    next: Vec<Vec<Option<usize>>>,
}

impl Catalog {
    pub fn new(decomp: Decomposition, width: usize, caps: &VariantCaps) -> Self {
        let variants = decomp.components.iter().map(|c| generate_variants(c, width, caps)).collect();
        let n = decomp.components.len();
        let mut prev: Vec<Vec<Option<usize>>> =
            decomp.components.iter().map(|c| vec![None; c.channels.len()]).collect();
        let mut next = prev.clone();
        for (k, route) in decomp.routes.iter().enumerate() {
            let comps: Vec<usize> = route
                .iter()
                .filter_map(|e| match e {
                    Element::Comp(c) => Some(*c),
                    Element::Wire(_) => None,
                })
                .collect();
            for w in comps.windows(2) {
                let (a, b) = (w[0], w[1]);
                let sa = decomp.components[a].slot(k).expect("route member");
                let sb = decomp.components[b].slot(k).expect("route member");
                next[a][sa] = Some(b);
                prev[b][sb] = Some(a);
            }
        }
        debug_assert_eq!(prev.len(), n);
        Self { decomp, width, variants, prev, next }
    }

    pub fn num_components(&self) -> usize {
        self.decomp.components.len()
    }

    pub fn num_channels(&self) -> usize {
        self.decomp.num_channels()
    }

    pub fn parent(&self, comp: usize, slot: usize) -> Option<usize> {
        self.prev[comp][slot]
    }

    pub fn child(&self, comp: usize, slot: usize) -> Option<usize> {
        self.next[comp][slot]
    }

    fn kind(&self, comp: usize) -> ComponentKind {
        self.decomp.components[comp].kind
    }

    /// Measurement basis of a tagged photon.
    pub fn basis(&self, tag: Tag) -> B {
        match tag.owner() {
            Owner::Comp(c) => self.decomp.components[c].cells[tag.idx()].basis,
            Owner::Wire(_) => B::X,
        }
    }
}

/// The open end of a channel inside a partial circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Frontier {
    pub comp: usize,
    pub cell: Pos,
    /// The leaf photon when `comp` is a CP+SWAP coupler.
    pub leaf: Option<Pos>,
}

/// A wire inserted by the search, feeding component `feeds` on `channel`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WireInfo {
    pub channel: usize,
    pub feeds: usize,
    pub len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub width: usize,
    pub depth: usize,
    pub space: usize,
}

/// Why a candidate placement was dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reject {
    /// Two photons on one cell.
    Overlap,
    /// An edge that the baseline graph does not have (Constraint II).
    Adjacency,
    /// A channel would step left (Constraint III).
    Order,
    /// Bounding-box height over the cluster width (Constraint IV); carries the height.
    Width(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Right,
    Down,
}

/// A free photon next to an out point where the next component's in point may go.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnchorPoint {
    pub cell: Pos,
    pub dir: Direction,
}

/// Cells to add to one board plus the cross edges they are allowed to make.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlay {
    pub comp: usize,
    pub cells: Vec<(Pos, Tag)>,
    /// Allowed (new cell, other cell) edges besides those inside one owner.
    pub links: Vec<(Pos, Pos)>,
    pub wire: Option<WireInfo>,
}

impl Overlay {
    fn allows(&self, a: Pos, b: Pos) -> bool {
        self.links.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    }
}

/// A coupler joining two groups: the coupler goes on `self` as an overlay, then the other
/// board is moved by `shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct CombinePlan {
    pub overlay: Overlay,
    pub shift: Pos,
    /// Allowed (coupler cell, shifted other-board cell) edges.
    pub links: Vec<(Pos, Pos)>,
}

/// A connected group of placed components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialCircuit {
    rows: i32,
    cols: i32,
    /// Row-major, `rows × cols`.
    data: Vec<Tag>,
    left: Vec<i32>,
    right: Vec<i32>,
    sum_right: i64,
    used_rows: i32,
    cells: usize,
    frontier: Vec<Option<Frontier>>,
    wires: Vec<WireInfo>,
    placed: Vec<usize>,
}

impl PartialCircuit {
    pub fn empty(channels: usize) -> Self {
        Self {
            rows: 0,
            cols: 0,
            data: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            sum_right: 0,
            used_rows: 0,
            cells: 0,
            frontier: vec![None; channels],
            wires: Vec::new(),
            placed: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.rows as usize
    }

    pub fn depth(&self) -> usize {
        self.cols as usize
    }

    pub fn space(&self) -> usize {
        space_formula(self.used_rows, self.cols - 1, self.sum_right)
    }

    pub fn metrics(&self) -> Metrics {
        Metrics { width: self.width(), depth: self.depth(), space: self.space() }
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn placed(&self) -> &[usize] {
        &self.placed
    }

    pub fn wires(&self) -> &[WireInfo] {
        &self.wires
    }

    pub fn frontier(&self, channel: usize) -> Option<Frontier> {
        self.frontier[channel]
    }

    pub fn get(&self, p: Pos) -> Tag {
        if p.0 < 0 || p.1 < 0 || p.0 >= self.rows || p.1 >= self.cols {
            return Tag::EMPTY;
        }
        self.data[(p.0 * self.cols + p.1) as usize]
    }

    fn right_at(&self, r: i32) -> Option<i32> {
        (r >= 0 && r < self.rows && self.right[r as usize] >= 0).then(|| self.right[r as usize])
    }

    fn left_at(&self, r: i32) -> Option<i32> {
        (r >= 0 && r < self.rows && self.right[r as usize] >= 0).then(|| self.left[r as usize])
    }

    /// Occupied cells in row-major order.
    pub fn occupied(&self) -> impl Iterator<Item = (Pos, Tag)> + '_ {
        self.data.iter().enumerate().filter(|(_, t)| !t.is_empty()).map(move |(i, &t)| {
            let i = i as i32;
            ((i / self.cols, i % self.cols), t)
        })
    }

    /// Stable hash of the normalized board and wire bookkeeping, for deduplication.
    pub fn canonical_hash(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        (self.rows, self.cols).hash(&mut h);
        self.data.hash(&mut h);
        self.wires.hash(&mut h);
        h.finish()
    }

    /// Free up/right/down neighbours of `comp`'s out point on `channel`.
    pub fn anchor_points(&self, cat: &Catalog, channel: usize) -> Vec<AnchorPoint> {
        let Some(f) = self.frontier[channel] else { return vec![] };
        let o = f.cell;
        let all = [
            (AnchorPoint { cell: (o.0 - 1, o.1), dir: Direction::Up }),
            (AnchorPoint { cell: (o.0, o.1 + 1), dir: Direction::Right }),
            (AnchorPoint { cell: (o.0 + 1, o.1), dir: Direction::Down }),
        ];
        let tp = cat.kind(f.comp) == ComponentKind::Tp;
        let w = cat.width as i32;
        all.into_iter()
            .filter(|a| !tp || a.dir == Direction::Right)
            .filter(|a| self.get(a.cell).is_empty())
            .filter(|a| a.cell.0.max(self.rows - 1) - a.cell.0.min(0) < w)
            .collect()
    }

    /// Anchor pairs for a coupler's two out channels: (first channel, second channel).
    pub fn anchor_pairs(&self, cat: &Catalog, comp: usize) -> Vec<(AnchorPoint, AnchorPoint)> {
        let ch = &cat.decomp.components[comp].channels;
        if ch.len() != 2 {
            return vec![];
        }
        let (a, b) = (self.anchor_points(cat, ch[0]), self.anchor_points(cat, ch[1]));
        a.iter().flat_map(|x| b.iter().map(move |y| (*x, *y))).filter(|(x, y)| x.cell != y.cell).collect()
    }

    /// Dry run of adding `ov`: metrics of the result or the first violated rule.
    pub fn check_overlay(&self, ov: &Overlay, max_width: usize) -> Result<Metrics, Reject> {
        let mut bounds = self.bounds();
        for &(p, _) in &ov.cells {
            bounds = grow(bounds, p);
        }
        let (r0, r1, _, c1) = bounds.expect("overlay is not empty");
        let height = (r1 - r0 + 1) as usize;
        if height > max_width {
            return Err(Reject::Width(height));
        }
        for &(p, _) in &ov.cells {
            if !self.get(p).is_empty() {
                return Err(Reject::Overlap);
            }
        }
        // New-new pairs only matter across owners (variant shapes are valid by construction).
        let first_owner = ov.cells.first().map(|c| c.1.owner());
        if ov.cells.iter().any(|c| Some(c.1.owner()) != first_owner) {
            for (i, &(p, t)) in ov.cells.iter().enumerate() {
                for &(q, u) in &ov.cells[i + 1..] {
                    if p == q {
                        return Err(Reject::Overlap);
                    }
                    if t.owner() != u.owner() && adjacent(p, q) && !ov.allows(p, q) {
                        return Err(Reject::Adjacency);
                    }
                }
            }
        }
        for &(p, _) in &ov.cells {
            for d in DIRS {
                let q = add(p, d);
                if !self.get(q).is_empty() && !ov.allows(p, q) {
                    return Err(Reject::Adjacency);
                }
            }
        }
        Ok(self.metrics_with(&ov.cells, None, height, c1 - bounds.unwrap().2 + 1, c1))
    }

    /// Dry run of a combination.
    pub fn check_combine(
        &self,
        other: &PartialCircuit,
        plan: &CombinePlan,
        max_width: usize,
    ) -> Result<Metrics, Reject> {
        let s = plan.shift;
        let mut bounds = self.bounds();
        for &(p, _) in &plan.overlay.cells {
            bounds = grow(bounds, p);
        }
        if let Some((a, b, c, d)) = other.bounds() {
            bounds = grow(grow(bounds, add((a, c), s)), add((b, d), s));
        }
        let (r0, r1, c0, c1) = bounds.expect("non-empty");
        let height = (r1 - r0 + 1) as usize;
        if height > max_width {
            return Err(Reject::Width(height));
        }
        // A combining wire against the coupler it feeds.
        let ov = &plan.overlay;
        if ov.wire.is_some() {
            for (i, &(p, t)) in ov.cells.iter().enumerate() {
                for &(q, u) in &ov.cells[i + 1..] {
                    if p == q {
                        return Err(Reject::Overlap);
                    }
                    if t.owner() != u.owner() && adjacent(p, q) && !ov.allows(p, q) {
                        return Err(Reject::Adjacency);
                    }
                }
            }
        }
        // Coupler against both boards.
        for &(p, _) in &plan.overlay.cells {
            if !self.get(p).is_empty() || !other.get(sub(p, s)).is_empty() {
                return Err(Reject::Overlap);
            }
            for d in DIRS {
                let q = add(p, d);
                if !self.get(q).is_empty() && !plan.overlay.allows(p, q) {
                    return Err(Reject::Adjacency);
                }
                if !other.get(sub(q, s)).is_empty() && !plan.links.contains(&(p, q)) {
                    return Err(Reject::Adjacency);
                }
            }
        }
        // The two boards never touch directly.
        for r2 in 0..other.rows {
            let Some((l2, rr2)) = other.left_at(r2).zip(other.right_at(r2)) else { continue };
            let r = r2 + s.0;
            let mut lo = i32::MAX;
            let mut hi = i32::MIN;
            for rr in [r - 1, r, r + 1] {
                if let (Some(l), Some(h)) = (self.left_at(rr), self.right_at(rr)) {
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
            }
            if lo > hi {
                continue;
            }
            let from = (l2 + s.1).max(lo - 1);
            let to = (rr2 + s.1).min(hi + 1);
            for c in from..=to {
                if other.get((r2, c - s.1)).is_empty() {
                    continue;
                }
                if !self.get((r, c)).is_empty() {
                    return Err(Reject::Overlap);
                }
                if DIRS.iter().any(|&d| !self.get(add((r, c), d)).is_empty()) {
                    return Err(Reject::Adjacency);
                }
            }
        }
        Ok(self.metrics_with(&plan.overlay.cells, Some((other, s)), height, c1 - c0 + 1, c1))
    }

    fn bounds(&self) -> Option<(i32, i32, i32, i32)> {
        (self.cells > 0).then(|| (0, self.rows - 1, 0, self.cols - 1))
    }

    fn metrics_with(
        &self,
        cells: &[(Pos, Tag)],
        other: Option<(&PartialCircuit, Pos)>,
        width: usize,
        depth: i32,
        maxcol: i32,
    ) -> Metrics {
        // Per-row rightmost over the union, summed over occupied rows.
        let mut touched: Vec<(i32, i32)> = cells.iter().map(|&((r, c), _)| (r, c)).collect();
        if let Some((o, s)) = other {
            for r2 in 0..o.rows {
                if let Some(c) = o.right_at(r2) {
                    touched.push((r2 + s.0, c + s.1));
                }
            }
        }
        touched.sort_unstable();
        let mut sum = self.sum_right;
        let mut used = self.used_rows;
        let mut i = 0;
        while i < touched.len() {
            let r = touched[i].0;
            let mut best = touched[i].1;
            while i < touched.len() && touched[i].0 == r {
                best = best.max(touched[i].1);
                i += 1;
            }
            match self.right_at(r) {
                Some(old) => sum += (best.max(old) - old) as i64,
                None => {
                    sum += best as i64;
                    used += 1;
                }
            }
        }
        Metrics { width, depth: depth as usize, space: space_formula(used, maxcol, sum) }
    }

    /// Materializes `ov` on a copy of this board.
    pub fn apply(&self, cat: &Catalog, ov: &Overlay) -> PartialCircuit {
        let mut cells: Vec<(Pos, Tag)> = self.occupied().collect();
        cells.extend(ov.cells.iter().copied());
        let mut wires = self.wires.clone();
        wires.extend(ov.wire);
        let mut frontier = self.frontier.clone();
        let mut placed = self.placed.clone();
        placed.push(ov.comp);
        let pos_of = |tag: Tag| ov.cells.iter().find(|c| c.1 == tag).map(|c| c.0);
        set_frontier(cat, &mut frontier, ov.comp, pos_of);
        build(cells, frontier, wires, placed)
    }

    /// Materializes a combination.
    pub fn apply_combine(&self, cat: &Catalog, other: &PartialCircuit, plan: &CombinePlan) -> PartialCircuit {
        let off = self.wires.len();
        let mut cells: Vec<(Pos, Tag)> = self.occupied().collect();
        cells.extend(other.occupied().map(|(p, t)| (add(p, plan.shift), t.with_wire_offset(off))));
        cells.extend(plan.overlay.cells.iter().copied());
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().copied());
        wires.extend(plan.overlay.wire);
        let mut frontier = self.frontier.clone();
        for (k, f) in other.frontier.iter().enumerate() {
            if let Some(f) = f {
                frontier[k] = Some(Frontier {
                    comp: f.comp,
                    cell: add(f.cell, plan.shift),
                    leaf: f.leaf.map(|l| add(l, plan.shift)),
                });
            }
        }
        let mut placed = self.placed.clone();
        placed.extend(other.placed.iter().copied());
        placed.push(plan.overlay.comp);
        let pos_of = |tag: Tag| plan.overlay.cells.iter().find(|c| c.1 == tag).map(|c| c.0);
        set_frontier(cat, &mut frontier, plan.overlay.comp, pos_of);
        build(cells, frontier, wires, placed)
    }

    /// Places `other` below this board with `gap` empty rows between them. The two groups
    /// share no channel, so nothing is connected.
    pub fn stack(&self, other: &PartialCircuit, gap: usize) -> PartialCircuit {
        if self.cells == 0 {
            return other.clone();
        }
        let shift = (self.rows + gap as i32, 0);
        let off = self.wires.len();
        let mut cells: Vec<(Pos, Tag)> = self.occupied().collect();
        cells.extend(other.occupied().map(|(p, t)| (add(p, shift), t.with_wire_offset(off))));
        let mut frontier = self.frontier.clone();
        for (k, f) in other.frontier.iter().enumerate() {
            if let Some(f) = f {
                frontier[k] =
                    Some(Frontier { comp: f.comp, cell: add(f.cell, shift), leaf: f.leaf.map(|l| add(l, shift)) });
            }
        }
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().copied());
        let mut placed = self.placed.clone();
        placed.extend(other.placed.iter().copied());
        build(cells, frontier, wires, placed)
    }

    /// Overwrites one cell. Used to build deliberately broken boards in tests.
    pub fn set_raw(&mut self, p: Pos, tag: Tag) {
        let mut cells: Vec<(Pos, Tag)> = self.occupied().filter(|c| c.0 != p).collect();
        if !tag.is_empty() {
            cells.push((p, tag));
        }
        let rebuilt = build_shifted(cells, self.frontier.clone(), self.wires.clone(), self.placed.clone(), false);
        *self = rebuilt;
    }

    /// Positions of every tag on the board.
    pub fn positions(&self) -> HashMap<Tag, Pos> {
        self.occupied().map(|(p, t)| (t, p)).collect()
    }

    /// Channel photon sequences, in channel order, for the channels present in this group.
    pub fn channel_paths(&self, cat: &Catalog) -> Vec<Option<Vec<Pos>>> {
        let pos = self.positions();
        let mut wire_cells: HashMap<usize, Vec<(usize, Pos)>> = HashMap::new();
        for (t, p) in &pos {
            if let Owner::Wire(w) = t.owner() {
                wire_cells.entry(w).or_default().push((t.idx(), *p));
            }
        }
        for v in wire_cells.values_mut() {
            v.sort();
        }
        (0..cat.num_channels())
            .map(|k| {
                self.frontier[k]?;
                let mut path = Vec::new();
                for el in &cat.decomp.routes[k] {
                    let Element::Comp(c) = *el else { continue };
                    for (w, info) in self.wires.iter().enumerate() {
                        if info.channel == k && info.feeds == c {
                            path.extend(wire_cells.get(&w).into_iter().flatten().map(|x| x.1));
                        }
                    }
                    let comp = &cat.decomp.components[c];
                    let idxs: Vec<usize> = if comp.is_coupler() {
                        vec![comp.in_points[comp.slot(k).expect("coupler on channel")]]
                    } else {
                        (0..comp.cells.len()).collect()
                    };
                    for i in idxs {
                        if let Some(&p) = pos.get(&Tag::comp(c, i)) {
                            path.push(p);
                        }
                    }
                }
                Some(path)
            })
            .collect()
    }

    /// Converts to a measurement grid of `width` rows; cells carry component labels.
    pub fn to_grid(&self, cat: &Catalog, width: usize, round: Option<usize>) -> MbqcGrid {
        let mut g = MbqcGrid::new(width.max(self.width()));
        g.set_meta(cat.num_channels(), 1);
        for ((r, c), t) in self.occupied() {
            g.set(r as usize, c as usize, cat.basis(t)).expect("row within width");
            let label = match t.owner() {
                Owner::Comp(i) => cat.decomp.components[i].label.clone(),
                Owner::Wire(w) => format!("wire{w}"),
            };
            g.set_note(r as usize, c as usize, CellNote { component: Some(label), round });
        }
        let channels = self
            .channel_paths(cat)
            .into_iter()
            .map(|p| p.unwrap_or_default().into_iter().map(|(r, c)| (r as usize, c as usize)).collect())
            .collect();
        g.set_channels(channels);
        g
    }

    /// Rebuilds a partial circuit from the component and wire positions of a grid produced by
    /// [`PartialCircuit::to_grid`] or by baseline lowering (component origins).
    pub fn from_baseline(cat: &Catalog) -> PartialCircuit {
        let all: Vec<usize> = (0..cat.num_components()).collect();
        // Baseline rows start at 0 already; keep them so coordinates match the grid.
        baseline_layout(cat, &all, false)
    }

    /// The components in `placed`, plus the wires feeding them, at their baseline positions
    /// and moved to the origin. Always a valid board that can be completed.
    pub fn baseline_subset(cat: &Catalog, placed: &[usize]) -> PartialCircuit {
        baseline_layout(cat, placed, true)
    }
}

fn baseline_layout(cat: &Catalog, placed: &[usize], normalize: bool) -> PartialCircuit {
    let mut is_placed = vec![false; cat.num_components()];
    for &c in placed {
        is_placed[c] = true;
    }
    let mut cells = Vec::new();
    for &c in placed {
        for (i, ((r, k), _)) in cat.decomp.components[c].baseline_cells().enumerate() {
            cells.push(((r as i32, k as i32), Tag::comp(c, i)));
        }
    }
    let mut wires = Vec::new();
    let mut frontier = vec![None; cat.num_channels()];
    for (k, route) in cat.decomp.routes.iter().enumerate() {
        for (j, el) in route.iter().enumerate() {
            match *el {
                Element::Comp(c) if is_placed[c] => {
                    let comp = &cat.decomp.components[c];
                    let pos = |i: usize| {
                        let ((r, col), _) = comp.baseline_cells().nth(i).expect("cell");
                        (r as i32, col as i32)
                    };
                    let s = comp.slot(k).expect("component on channel");
                    frontier[k] = Some(Frontier {
                        comp: c,
                        cell: pos(comp.out_points[s]),
                        leaf: (comp.kind == ComponentKind::Tp).then(|| pos(LEAF)),
                    });
                }
                Element::Wire(w) => {
                    let feeds = route[j + 1..].iter().find_map(|e| match e {
                        Element::Comp(c) => Some(*c),
                        Element::Wire(_) => None,
                    });
                    let Some(feeds) = feeds.filter(|&f| is_placed[f]) else { continue };
                    let id = wires.len();
                    let wc = &cat.decomp.wires[w];
                    wires.push(WireInfo { channel: k, feeds, len: wc.cells.len() });
                    for (i, ((r, c), _)) in wc.baseline_cells().enumerate() {
                        cells.push(((r as i32, c as i32), Tag::wire(id, i)));
                    }
                }
                _ => {}
            }
        }
    }
    build_shifted(cells, frontier, wires, placed.to_vec(), normalize)
}

fn space_formula(used_rows: i32, maxcol: i32, sum_right: i64) -> usize {
    (used_rows as i64 * maxcol as i64 - sum_right).max(0) as usize
}

fn grow(b: Option<(i32, i32, i32, i32)>, p: Pos) -> Option<(i32, i32, i32, i32)> {
    Some(match b {
        None => (p.0, p.0, p.1, p.1),
        Some((r0, r1, c0, c1)) => (r0.min(p.0), r1.max(p.0), c0.min(p.1), c1.max(p.1)),
    })
}

fn set_frontier(cat: &Catalog, frontier: &mut [Option<Frontier>], comp: usize, pos_of: impl Fn(Tag) -> Option<Pos>) {
    let c = &cat.decomp.components[comp];
    let leaf = (c.kind == ComponentKind::Tp).then(|| pos_of(Tag::comp(comp, LEAF)).expect("leaf placed"));
    for (s, &k) in c.channels.iter().enumerate() {
        let cell = pos_of(Tag::comp(comp, c.out_points[s])).expect("out point placed");
        frontier[k] = Some(Frontier { comp, cell, leaf });
    }
}

fn build(
    cells: Vec<(Pos, Tag)>,
    frontier: Vec<Option<Frontier>>,
    wires: Vec<WireInfo>,
    placed: Vec<usize>,
) -> PartialCircuit {
    build_shifted(cells, frontier, wires, placed, true)
}

/// Lays `cells` out on a fresh board, moving the top-left occupied corner to (0, 0) when
/// `normalize` is set.
fn build_shifted(
    cells: Vec<(Pos, Tag)>,
    mut frontier: Vec<Option<Frontier>>,
    wires: Vec<WireInfo>,
    placed: Vec<usize>,
    normalize: bool,
) -> PartialCircuit {
    let mut b = None;
    for &(p, _) in &cells {
        b = grow(b, p);
    }
    let Some((r0, r1, c0, c1)) = b else {
        let mut pc = PartialCircuit::empty(frontier.len());
        pc.frontier = frontier;
        pc.wires = wires;
        pc.placed = placed;
        return pc;
    };
    let (r0, c0) = if normalize { (r0, c0) } else { (r0.min(0), c0.min(0)) };
    assert!(r0 >= 0 && c0 >= 0 || normalize, "raw boards keep non-negative coordinates");
    let shift = (-r0, -c0);
    let rows = r1 - r0 + 1;
    let cols = c1 - c0 + 1;
    let mut data = vec![Tag::EMPTY; (rows * cols) as usize];
    let mut left = vec![i32::MAX; rows as usize];
    let mut right = vec![-1; rows as usize];
    for &(p, t) in &cells {
        let (r, c) = add(p, shift);
        data[(r * cols + c) as usize] = t;
        left[r as usize] = left[r as usize].min(c);
        right[r as usize] = right[r as usize].max(c);
    }
    let used_rows = right.iter().filter(|&&x| x >= 0).count() as i32;
    let sum_right = right.iter().filter(|&&x| x >= 0).map(|&x| x as i64).sum();
    for f in frontier.iter_mut().flatten() {
        f.cell = add(f.cell, shift);
        f.leaf = f.leaf.map(|l| add(l, shift));
    }
    PartialCircuit { rows, cols, data, left, right, sum_right, used_rows, cells: cells.len(), frontier, wires, placed }
}

fn translate(v: &Variant, comp: usize, offset: Pos) -> Vec<(Pos, Tag)> {
    v.cells.iter().enumerate().map(|(i, &p)| (add(p, offset), Tag::comp(comp, i))).collect()
}

/// A root component on an empty board.
pub fn root_overlay(cat: &Catalog, comp: usize, variant: usize) -> Overlay {
    let v = &cat.variants[comp][variant];
    Overlay { comp, cells: translate(v, comp, (0, 0)), links: vec![], wire: None }
}

/// Links from a newly placed in point `p` back to its predecessor on the channel.
fn back_links(f: &Frontier, p: Pos) -> Vec<(Pos, Pos)> {
    let mut l = vec![(p, f.cell)];
    if let Some(leaf) = f.leaf {
        l.push((p, leaf));
    }
    l
}

/// Monotone wire paths from `from` (exclusive) to `to` (exclusive) with one vertical leg.
/// Only even, non-empty paths are returned. `first_right` forbids starting vertically.
pub fn wire_paths(from: Pos, to: Pos, first_right: bool) -> Vec<Vec<Pos>> {
    let dc = to.1 - from.1;
    let dr = to.0 - from.0;
    let k = dc + dr.abs() - 1;
    if dc < 0 || k < 2 || k % 2 != 0 {
        return vec![];
    }
    let bends: Vec<i32> = if dr == 0 { vec![from.1] } else { (from.1..=to.1).collect() };
    let mut out = Vec::new();
    for b in bends {
        if first_right && dr != 0 && b == from.1 {
            continue;
        }
        let mut cur = from;
        let mut path = Vec::with_capacity(k as usize + 1);
        while cur.1 < b {
            cur.1 += 1;
            path.push(cur);
        }
        while cur.0 != to.0 {
            cur.0 += dr.signum();
            path.push(cur);
        }
        while cur.1 < to.1 {
            cur.1 += 1;
            path.push(cur);
        }
        debug_assert_eq!(path.last(), Some(&to));
        path.pop();
        out.push(path);
    }
    out
}

/// Every way to attach `comp` (all of whose placed parents are in `pc`) with variant
/// `variant`: direct anchoring and, for couplers, a wire to the second parent.
pub fn attach_overlays(cat: &Catalog, pc: &PartialCircuit, comp: usize, variant: usize) -> Vec<Overlay> {
    let c = &cat.decomp.components[comp];
    let v = &cat.variants[comp][variant];
    let mut out = Vec::new();
    let slots: Vec<usize> = (0..c.channels.len()).filter(|&s| cat.parent(comp, s).is_some()).collect();
    for (pi, &s) in slots.iter().enumerate() {
        let k = c.channels[s];
        let f = pc.frontier[k].expect("parent placed");
        for a in pc.anchor_points(cat, k) {
            let offset = sub(a.cell, v.cells[c.in_points[s]]);
            let cells = translate(v, comp, offset);
            let mut links = back_links(&f, a.cell);
            let Some(&s2) = slots.iter().find(|&&x| x != s) else {
                out.push(Overlay { comp, cells, links, wire: None });
                continue;
            };
            let k2 = c.channels[s2];
            let f2 = pc.frontier[k2].expect("parent placed");
            let t = add(v.cells[c.in_points[s2]], offset);
            let tp2 = f2.leaf.is_some();
            if adjacent(t, f2.cell) {
                // Both in points anchored directly; enumerate once.
                let ok = t.1 >= f2.cell.1 && (!tp2 || t == add(f2.cell, (0, 1)));
                if pi == 0 && ok {
                    links.extend(back_links(&f2, t));
                    out.push(Overlay { comp, cells, links, wire: None });
                }
                continue;
            }
            for path in wire_paths(f2.cell, t, tp2) {
                let w = pc.wires.len();
                let mut cells = cells.clone();
                let mut links = links.clone();
                links.extend(back_links(&f2, path[0]));
                links.push((*path.last().expect("non-empty"), t));
                cells.extend(path.iter().enumerate().map(|(i, &p)| (p, Tag::wire(w, i))));
                let info = WireInfo { channel: k2, feeds: comp, len: path.len() };
                out.push(Overlay { comp, cells, links, wire: Some(info) });
            }
        }
    }
    out
}

/// Every way to join `pc1` (holding the parent on slot 0) and `pc2` (holding the parent on
/// slot 1) through coupler `comp` placed with `variant`. The slot-0 in point is anchored
/// directly; the slot-1 in point is either anchored directly or fed by a short wire from
/// wherever `pc2` is moved to.
pub fn combine_plans(
    cat: &Catalog,
    pc1: &PartialCircuit,
    pc2: &PartialCircuit,
    comp: usize,
    variant: usize,
) -> Vec<CombinePlan> {
    let c = &cat.decomp.components[comp];
    let v = &cat.variants[comp][variant];
    let (k1, k2) = (c.channels[0], c.channels[1]);
    let (f1, f2) = (pc1.frontier[k1].expect("parent 1"), pc2.frontier[k2].expect("parent 2"));
    let a2s = pc2.anchor_points(cat, k2);
    let w = pc1.wires.len() + pc2.wires.len();
    let moved =
        |shift: Pos| Frontier { comp: f2.comp, cell: add(f2.cell, shift), leaf: f2.leaf.map(|l| add(l, shift)) };
    let mut out = Vec::new();
    for a1 in pc1.anchor_points(cat, k1) {
        let offset = sub(a1.cell, v.cells[c.in_points[0]]);
        let cells = translate(v, comp, offset);
        let t = add(v.cells[c.in_points[1]], offset);
        for a2 in &a2s {
            let shift = sub(t, a2.cell);
            out.push(CombinePlan {
                overlay: Overlay { comp, cells: cells.clone(), links: back_links(&f1, a1.cell), wire: None },
                shift,
                links: back_links(&moved(shift), t),
            });
        }
        for reach in COMBINE_WIRE_REACH {
            for dc in 0..=reach {
                let dr = reach - dc;
                for sign in if dr == 0 { &[1][..] } else { &[1, -1][..] } {
                    let q = sub(t, (sign * dr, dc));
                    let shift = sub(q, f2.cell);
                    let f2s = moved(shift);
                    for path in wire_paths(q, t, f2.leaf.is_some()) {
                        let mut cells = cells.clone();
                        cells.extend(path.iter().enumerate().map(|(i, &p)| (p, Tag::wire(w, i))));
                        let mut links = back_links(&f1, a1.cell);
                        links.push((*path.last().expect("non-empty"), t));
                        let info = WireInfo { channel: k2, feeds: comp, len: path.len() };
                        out.push(CombinePlan {
                            overlay: Overlay { comp, cells, links, wire: Some(info) },
                            shift,
                            links: back_links(&f2s, path[0]),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Manhattan distances from the moved frontier to the coupler's second in point that a
/// combining wire may bridge (wires of 2 and 4 photons).
const COMBINE_WIRE_REACH: [i32; 2] = [3, 5];

/// Constraint classes of the placement rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    /// Channel connectivity.
    I,
    /// No edges beyond the baseline graph, and every required coupler edge present.
    II,
    /// Measurement order along channels.
    III,
    /// Bounding-box height within the cluster width.
    IV,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub at: Pos,
    pub detail: String,
}

/// Checks Constraints I–IV on a partial circuit using its ownership tags. Returns every
/// violation found, sorted by constraint then position.
pub fn validate_grid(pc: &PartialCircuit, cat: &Catalog, cluster_width: usize) -> Vec<Violation> {
    let mut v = Vec::new();
    let pos = pc.positions();
    let paths = pc.channel_paths(cat);
    let mut allowed: std::collections::HashSet<(Pos, Pos)> = Default::default();
    let mut allow = |a: Pos, b: Pos| {
        allowed.insert((a.min(b), a.max(b)));
    };
    for path in paths.iter().flatten() {
        for w in path.windows(2) {
            if !adjacent(w[0], w[1]) {
                v.push(Violation {
                    constraint: Constraint::I,
                    at: w[1],
                    detail: format!("channel gap between {:?} and {:?}", w[0], w[1]),
                });
            }
            if w[1].1 < w[0].1 {
                v.push(Violation {
                    constraint: Constraint::III,
                    at: w[1],
                    detail: format!("channel steps left from {:?}", w[0]),
                });
            }
            allow(w[0], w[1]);
        }
    }
    // Coupler edges and required leaf edges.
    let mut required: Vec<(Pos, Pos)> = Vec::new();
    for &c in pc.placed() {
        let comp = &cat.decomp.components[c];
        if !comp.is_coupler() {
            continue;
        }
        let p = |i: usize| pos.get(&Tag::comp(c, i)).copied();
        let (Some(u), Some(h), Some(d)) = (p(0), p(HUB), p(2)) else { continue };
        required.extend([(u, h), (h, d)]);
        if comp.kind == ComponentKind::Tp {
            let Some(l) = p(LEAF) else { continue };
            required.push((h, l));
            for s in 0..2 {
                let k = comp.channels[s];
                // First photon after the coupler on this channel.
                let Some(path) = paths[k].as_ref() else { continue };
                let me = if s == 0 { u } else { d };
                if let Some(i) = path.iter().position(|&x| x == me) {
                    if let Some(&succ) = path.get(i + 1) {
                        required.push((l, succ));
                    }
                }
            }
        }
    }
    for &(a, b) in &required {
        if !adjacent(a, b) {
            v.push(Violation {
                constraint: Constraint::II,
                at: b,
                detail: format!("missing coupler edge {a:?}-{b:?}"),
            });
        }
        allow(a, b);
    }
    for ((r, c), _) in pc.occupied() {
        for q in [(r + 1, c), (r, c + 1)] {
            if !pc.get(q).is_empty() && !allowed.contains(&((r, c).min(q), (r, c).max(q))) {
                v.push(Violation {
                    constraint: Constraint::II,
                    at: q,
                    detail: format!("unexpected edge {:?}-{q:?}", (r, c)),
                });
            }
        }
    }
    if pc.width() > cluster_width {
        v.push(Violation {
            constraint: Constraint::IV,
            at: (pc.width() as i32 - 1, 0),
            detail: format!("height {} over width {cluster_width}", pc.width()),
        });
    }
    v.sort_by_key(|a| (a.constraint, a.at));
    v
}

/// Unused photons trailing each occupied row's rightmost measurement, up to the last column.
pub fn space_of(pc: &PartialCircuit) -> usize {
    pc.space()
}

/// Adds `comp` to `pc` with `variant` at anchor `anchor` on channel `channel`; `None` when the
/// placement breaks a constraint. The second in point of a coupler must already be adjacent
/// to its parent (use [`insert_wire`] style overlays otherwise).
pub fn integrate(
    cat: &Catalog,
    pc: &PartialCircuit,
    comp: usize,
    variant: usize,
    anchor: Pos,
) -> Option<PartialCircuit> {
    let ov = if pc.cell_count() == 0 {
        root_overlay(cat, comp, variant)
    } else {
        attach_overlays(cat, pc, comp, variant)
            .into_iter()
            .filter(|o| o.wire.is_none())
            .find(|o| o.links.first().map(|l| l.0) == Some(anchor))?
    };
    pc.check_overlay(&ov, cat.width).ok()?;
    Some(pc.apply(cat, &ov))
}

/// Joins two groups through coupler `comp`; `anchors` are the anchor cells in `pc1` and
/// `pc2` (each in its own frame).
pub fn combine(
    cat: &Catalog,
    pc1: &PartialCircuit,
    pc2: &PartialCircuit,
    comp: usize,
    variant: usize,
    anchors: (Pos, Pos),
) -> Option<PartialCircuit> {
    if pc2.cell_count() == 0 {
        return integrate(cat, pc1, comp, variant, anchors.0);
    }
    let plan = combine_plans(cat, pc1, pc2, comp, variant).into_iter().find(|p| {
        p.overlay.wire.is_none() && p.overlay.links[0].0 == anchors.0 && sub(p.links[0].0, p.shift) == anchors.1
    })?;
    pc1.check_combine(pc2, &plan, cat.width).ok()?;
    Some(pc1.apply_combine(cat, pc2, &plan))
}

/// Places coupler `comp` with its first in point at `anchor` and connects the second in
/// point to its parent by the shortest valid wire. Returns the board unchanged in shape
/// when the in point is already adjacent.
pub fn insert_wire(
    cat: &Catalog,
    pc: &PartialCircuit,
    comp: usize,
    variant: usize,
    anchor: Pos,
) -> Option<PartialCircuit> {
    let mut best: Option<(usize, Overlay)> = None;
    for ov in attach_overlays(cat, pc, comp, variant) {
        if ov.links.first().map(|l| l.0) != Some(anchor) || pc.check_overlay(&ov, cat.width).is_err() {
            continue;
        }
        let len = ov.wire.map_or(0, |w| w.len);
        if best.as_ref().is_none_or(|(b, _)| len < *b) {
            best = Some((len, ov));
        }
    }
    best.map(|(_, ov)| pc.apply(cat, &ov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::component::extract_components;
    use crate::lower::lower_baseline;

    fn catalog(src: &str, width: usize) -> Catalog {
        let g = lower_baseline(&parse_circuit(src).unwrap());
        Catalog::new(extract_components(&g).unwrap(), width, &VariantCaps::default())
    }

    const WORKED: &str = "qubits 2\nrot 0 0.3 0.2 0.1\nrot 1 0.4 0.5 0.6\ncpswap 0 1 pi/2\ncnot 0 1\n";

    #[test]
    fn tags_round_trip() {
        let t = Tag::comp(17, 5);
        assert_eq!((t.owner(), t.idx()), (Owner::Comp(17), 5));
        let w = Tag::wire(3, 0);
        assert_eq!((w.owner(), w.idx()), (Owner::Wire(3), 0));
        assert!(Tag::EMPTY.is_empty() && !t.is_empty() && !w.is_empty());
    }

    #[test]
    fn baseline_is_valid() {
        let cat = catalog(WORKED, 6);
        let pc = PartialCircuit::from_baseline(&cat);
        assert_eq!(validate_grid(&pc, &cat, 6), vec![]);
        assert_eq!(
            pc.to_grid(&cat, 3, None).non_z_count(),
            lower_baseline(&parse_circuit(WORKED).unwrap()).non_z_count()
        );
    }

    #[test]
    fn baseline_paths_match_grid_channels() {
        let c = parse_circuit(WORKED).unwrap();
        let g = lower_baseline(&c);
        let cat = Catalog::new(extract_components(&g).unwrap(), 6, &VariantCaps::default());
        let pc = PartialCircuit::from_baseline(&cat);
        let back = pc.to_grid(&cat, 3, None);
        assert_eq!(back.channels(), g.channels());
        for (p, b) in g.non_z() {
            assert!(back.get(p.0, p.1).same(b));
        }
    }

    #[test]
    fn root_in_empty_circuit_is_the_variant() {
        let cat = catalog(WORKED, 6);
        let pc = PartialCircuit::empty(2);
        for vi in 0..cat.variants[0].len().min(20) {
            let got = integrate(&cat, &pc, 0, vi, (0, 0)).unwrap();
            let v = &cat.variants[0][vi];
            let (lo, _) = v.row_range();
            assert_eq!(got.width(), v.height());
            assert_eq!(got.depth(), v.span());
            for (i, &(r, c)) in v.cells.iter().enumerate() {
                assert_eq!(got.get((r - lo, c)), Tag::comp(0, i));
            }
        }
    }

    #[test]
    fn width_bound_rejects_tall_placements() {
        let cat = catalog("qubits 1\nh 0\nh 0\n", 3);
        let pc = PartialCircuit::empty(1);
        let ov = Overlay {
            comp: 0,
            cells: vec![((0, 0), Tag::comp(0, 0)), ((3, 0), Tag::comp(0, 1))],
            links: vec![],
            wire: None,
        };
        assert_eq!(pc.check_overlay(&ov, 3), Err(Reject::Width(4)));
        assert!(cat.variants[0].iter().all(|v| v.height() <= 3));
    }

    #[test]
    fn space_counts_trailing_photons() {
        let mut pc = PartialCircuit::empty(1);
        pc.set_raw((0, 3), Tag::comp(0, 0));
        pc.set_raw((1, 1), Tag::comp(0, 1));
        assert_eq!((pc.depth(), space_of(&pc)), (4, 2));
        let mut single = PartialCircuit::empty(1);
        single.set_raw((0, 0), Tag::comp(0, 0));
        single.set_raw((1, 0), Tag::comp(0, 1));
        assert_eq!(space_of(&single), 0);
    }

    #[test]
    fn dry_run_matches_materialized_metrics() {
        let cat = catalog(WORKED, 6);
        let mut pcs = vec![];
        for vi in 0..cat.variants[0].len() {
            pcs.push(PartialCircuit::empty(2).apply(&cat, &root_overlay(&cat, 0, vi)));
        }
        // S0 on channel 0 is followed by TP0 (id 2) which needs S1 too; check an S child
        // instead: find a component with exactly one parent.
        let (child, _) = (0..cat.num_components())
            .map(|c| (c, (0..cat.decomp.components[c].channels.len()).filter(|&s| cat.parent(c, s) == Some(0)).count()))
            .find(|&(c, n)| n == 1 && !cat.decomp.components[c].is_coupler())
            .unwrap_or((usize::MAX, 0));
        if child == usize::MAX {
            return;
        }
        for pc in pcs.iter().take(10) {
            for vi in 0..cat.variants[child].len() {
                for ov in attach_overlays(&cat, pc, child, vi) {
                    if let Ok(m) = pc.check_overlay(&ov, 6) {
                        assert_eq!(pc.apply(&cat, &ov).metrics(), m);
                    }
                }
            }
        }
    }

    #[test]
    fn wire_paths_are_even_and_monotone() {
        assert!(wire_paths((0, 0), (0, 1), false).is_empty());
        assert_eq!(wire_paths((0, 0), (0, 3), false), vec![vec![(0, 1), (0, 2)]]);
        // 2 right, 1 down: 2 cells, bend at column 0, 1 or 2
        let p = wire_paths((0, 0), (1, 2), false);
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|x| x.len() == 2));
        assert_eq!(wire_paths((0, 0), (1, 2), true).len(), 2);
        // odd gap has no even path
        assert!(wire_paths((0, 0), (0, 2), false).is_empty());
    }
}
