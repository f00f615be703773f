//! The depth-minimizing placement search.
//!
//! Components are taken one at a time in dependency order. Placed components form groups
//! (connected pieces of the final layout); each group keeps a set of candidate partial
//! circuits. A component with no placed parents starts a new group, one whose parents share a
//! group is attached to every candidate of that group, and a coupler whose parents sit in
//! two groups joins every pair of candidates. After each step the group's candidates are
//! bucketed by width and only the best `m` per width survive, ranked by depth, then by
//! trailing space (more is better), then by generation order.

use crate::circuit::GateCircuit;
use crate::component::Element;
use crate::component::{extract_components, ComponentError};
use crate::grid::{CellNote, MbqcGrid};
use crate::lower::lower_baseline;
use crate::placement::{
    attach_overlays, combine_plans, root_overlay, Catalog, Frontier, Metrics, PartialCircuit, Pos, Reject,
};
use crate::variants::VariantCaps;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    /// Smallest ready component id first.
    SmallestId,
    /// Uniformly random ready component, driven by `seed`.
    Seeded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileConfig {
    pub cluster_width: usize,
    pub m: usize,
    pub rounds: usize,
    pub seed: u64,
    pub selection: Selection,
    pub caps: VariantCaps,
}

impl CompileConfig {
    pub fn new(cluster_width: usize) -> Self {
        Self {
            cluster_width,
            m: 12,
            rounds: 1,
            seed: 0,
            selection: Selection::SmallestId,
            caps: VariantCaps::default(),
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("cluster width {width} is below the minimum {need} for this circuit")]
    WidthTooSmall { width: usize, need: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Partition(#[from] ComponentError),
    #[error("iteration {iteration}: no valid placement of {component} survives")]
    NoCandidates { iteration: usize, component: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    Root,
    Integrate,
    Combine,
}

/// What happened while placing one component.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub component: String,
    pub step: Option<StepKind>,
    pub generated: usize,
    pub valid: usize,
    pub rejected_overlap: usize,
    pub rejected_adjacency: usize,
    pub rejected_order: usize,
    pub rejected_width: usize,
    /// Bounding-box heights of width-rejected candidates, with counts.
    pub rejected_widths: BTreeMap<usize, usize>,
    /// Ranked candidates dropped because a pending component could no longer be placed.
    pub dead_ends: usize,
    pub kept: usize,
    pub pruned: usize,
    /// Depth of the shallowest kept candidate.
    pub best_depth: usize,
}

impl IterationStats {
    fn record(&mut self, r: Result<Metrics, Reject>) -> Option<Metrics> {
        self.generated += 1;
        match r {
            Ok(m) => {
                self.valid += 1;
                return Some(m);
            }
            Err(Reject::Overlap) => self.rejected_overlap += 1,
            Err(Reject::Adjacency) => self.rejected_adjacency += 1,
            Err(Reject::Order) => self.rejected_order += 1,
            Err(Reject::Width(h)) => {
                self.rejected_width += 1;
                *self.rejected_widths.entry(h).or_insert(0) += 1;
            }
        }
        None
    }

    fn merge(mut self, o: IterationStats) -> IterationStats {
        self.generated += o.generated;
        self.valid += o.valid;
        self.rejected_overlap += o.rejected_overlap;
        self.rejected_adjacency += o.rejected_adjacency;
        self.rejected_order += o.rejected_order;
        self.rejected_width += o.rejected_width;
        for (k, v) in o.rejected_widths {
            *self.rejected_widths.entry(k).or_insert(0) += v;
        }
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    pub baseline_depth: usize,
    pub components: usize,
    pub iterations: Vec<IterationStats>,
    /// Disconnected groups stacked at the end.
    pub groups: usize,
    /// Candidates in the final set.
    pub final_candidates: usize,
}

#[derive(Clone, Debug)]
pub struct CompileResult {
    pub grid: MbqcGrid,
    pub stats: CompileStats,
    /// Every complete circuit in the final set, best first (single-round compiles only).
    pub finals: Vec<PartialCircuit>,
    pub catalog: Catalog,
}

impl CompileResult {
    pub fn depth(&self) -> usize {
        self.grid.depth()
    }
}

/// Ranking key: depth, then more space, then generation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    depth: usize,
    neg_space: i64,
    order: [u32; 4],
}

/// Keeps the best `cap` keys per width.
#[derive(Default)]
struct Buckets {
    cap: usize,
    by_width: BTreeMap<usize, Vec<Key>>,
}

impl Buckets {
    fn new(cap: usize) -> Self {
        Self { cap, by_width: BTreeMap::new() }
    }

    fn offer(&mut self, width: usize, key: Key) {
        let v = self.by_width.entry(width).or_default();
        if v.len() >= self.cap && key >= *v.last().expect("full bucket") {
            return;
        }
        let at = v.partition_point(|k| *k < key);
        v.insert(at, key);
        v.truncate(self.cap);
    }

    fn merge(mut self, o: Buckets) -> Buckets {
        for (w, keys) in o.by_width {
            for k in keys {
                self.offer(w, k);
            }
        }
        self
    }
}

fn key(m: Metrics, order: [u32; 4]) -> Key {
    Key { depth: m.depth, neg_space: -(m.space as i64), order }
}

/// Prunes `cands` to the best `m` per width by (depth, larger space, input order).
pub fn prune(cands: Vec<PartialCircuit>, m: usize) -> Vec<PartialCircuit> {
    let mut by_width: BTreeMap<usize, Vec<(usize, PartialCircuit)>> = BTreeMap::new();
    for (i, pc) in cands.into_iter().enumerate() {
        by_width.entry(pc.width()).or_default().push((i, pc));
    }
    let mut out = Vec::new();
    for (_, mut v) in by_width {
        v.sort_by_key(|(i, pc)| (pc.depth(), -(pc.space() as i64), *i));
        out.extend(v.into_iter().take(m).map(|x| x.1));
    }
    out
}

struct Group {
    set: Vec<PartialCircuit>,
    members: Vec<usize>,
}

/// Checks the configuration and builds the catalog for `circuit`.
pub fn prepare(circuit: &GateCircuit, cfg: &CompileConfig) -> Result<(MbqcGrid, Catalog), CompileError> {
    let need = 2 * circuit.num_qubits - 1;
    if cfg.cluster_width < need {
        return Err(CompileError::WidthTooSmall { width: cfg.cluster_width, need });
    }
    if cfg.m == 0 || cfg.rounds == 0 {
        return Err(CompileError::Config("m and rounds must be positive".into()));
    }
    let baseline = lower_baseline(circuit);
    let decomp = extract_components(&baseline)?;
    Ok((baseline, Catalog::new(decomp, cfg.cluster_width, &cfg.caps)))
}

/// Dependency order used by the search.
pub fn selection_order(cat: &Catalog, selection: Selection, seed: u64) -> Vec<usize> {
    let n = cat.num_components();
    let mut indeg: Vec<usize> = (0..n).map(|c| cat.decomp.dag.parents(c).count()).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&c| indeg[c] == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        ready.sort_unstable();
        let i = match selection {
            Selection::SmallestId => 0,
            Selection::Seeded => *(0..ready.len()).collect::<Vec<_>>().choose(&mut rng).expect("non-empty"),
        };
        let c = ready.remove(i);
        order.push(c);
        for e in cat.decomp.dag.children(c) {
            indeg[e.child] -= 1;
            if indeg[e.child] == 0 {
                ready.push(e.child);
            }
        }
    }
    order
}

/// Runs the search and returns the surviving candidate sets per remaining group.
fn search(cat: &Catalog, cfg: &CompileConfig) -> Result<(Vec<Vec<PartialCircuit>>, Vec<IterationStats>), CompileError> {
    let n = cat.num_components();
    let mut groups: Vec<Option<Group>> = Vec::new();
    let mut group_of: Vec<usize> = vec![usize::MAX; n];
    let mut stats = Vec::with_capacity(n);
    let channels = cat.num_channels();
    let empty = PartialCircuit::empty(channels);

    for (it, c) in selection_order(cat, cfg.selection, cfg.seed).into_iter().enumerate() {
        let comp = &cat.decomp.components[c];
        let nv = cat.variants[c].len();
        let mut parent_groups: Vec<usize> =
            (0..comp.channels.len()).filter_map(|s| cat.parent(c, s)).map(|p| group_of[p]).collect();
        parent_groups.dedup();
        let mut st = IterationStats { iteration: it + 1, component: comp.label.clone(), ..Default::default() };

        let step = match parent_groups.len() {
            0 => StepKind::Root,
            1 => StepKind::Integrate,
            _ => StepKind::Combine,
        };
        let generate = |cap: usize| -> (Buckets, IterationStats) {
            let zero = || (Buckets::new(cap), IterationStats::default());
            let join = |(a, x): (Buckets, IterationStats), (b, y): (Buckets, IterationStats)| (a.merge(b), x.merge(y));
            match parent_groups.as_slice() {
                [] => (0..nv)
                    .map(|vi| {
                        let (mut b, mut s) = zero();
                        if let Some(m) = s.record(empty.check_overlay(&root_overlay(cat, c, vi), cat.width)) {
                            b.offer(m.width, key(m, [0, 0, vi as u32, 0]));
                        }
                        (b, s)
                    })
                    .fold(zero(), join),
                [g] => {
                    let set = &groups[*g].as_ref().expect("live group").set;
                    set.par_iter()
                        .enumerate()
                        .map(|(i, pc)| {
                            let (mut b, mut s) = zero();
                            for vi in 0..nv {
                                for (j, ov) in attach_overlays(cat, pc, c, vi).iter().enumerate() {
                                    if let Some(m) = s.record(pc.check_overlay(ov, cat.width)) {
                                        b.offer(m.width, key(m, [i as u32, 0, vi as u32, j as u32]));
                                    }
                                }
                            }
                            (b, s)
                        })
                        .reduce(zero, join)
                }
                [g1, g2] => {
                    let (s1, s2) = (&groups[*g1].as_ref().expect("live").set, &groups[*g2].as_ref().expect("live").set);
                    let pairs: Vec<(usize, usize)> =
                        (0..s1.len()).flat_map(|i| (0..s2.len()).map(move |j| (i, j))).collect();
                    pairs
                        .par_iter()
                        .map(|&(i1, i2)| {
                            let (mut b, mut s) = zero();
                            for vi in 0..nv {
                                for (j, plan) in combine_plans(cat, &s1[i1], &s2[i2], c, vi).iter().enumerate() {
                                    if let Some(m) = s.record(s1[i1].check_combine(&s2[i2], plan, cat.width)) {
                                        b.offer(m.width, key(m, [i1 as u32, i2 as u32, vi as u32, j as u32]));
                                    }
                                }
                            }
                            (b, s)
                        })
                        .reduce(zero, join)
                }
                _ => unreachable!("components have at most two channels"),
            }
        };
        let materialize = |k: &Key| -> PartialCircuit {
            let [i, i2, vi, j] = k.order.map(|x| x as usize);
            match step {
                StepKind::Root => empty.apply(cat, &root_overlay(cat, c, vi)),
                StepKind::Integrate => {
                    let set = &groups[parent_groups[0]].as_ref().expect("live").set;
                    let ov = &attach_overlays(cat, &set[i], c, vi)[j];
                    set[i].apply(cat, ov)
                }
                StepKind::Combine => {
                    let s1 = &groups[parent_groups[0]].as_ref().expect("live").set;
                    let s2 = &groups[parent_groups[1]].as_ref().expect("live").set;
                    let plan = &combine_plans(cat, &s1[i], &s2[i2], c, vi)[j];
                    s1[i].apply_combine(cat, &s2[i2], plan)
                }
            }
        };

        // Keep the best `m` viable, distinct candidates per width. Ranked keys are held in
        // bounded buckets; when dead ends or duplicates leave a full bucket short, the step
        // is redone with room for more keys.
        let mut cap = 2 * cfg.m + 8;
        let mut next;
        loop {
            let (buckets, s) = generate(cap);
            st = IterationStats { iteration: st.iteration, component: st.component.clone(), ..s };
            next = Vec::new();
            let mut short = false;
            for keys in buckets.by_width.values() {
                let mut seen = HashSet::new();
                let mut kept = 0;
                for k in keys {
                    if kept == cfg.m {
                        break;
                    }
                    let pc = materialize(k);
                    if !viable(cat, &pc) {
                        st.dead_ends += 1;
                    } else if seen.insert(pc.canonical_hash()) {
                        next.push(pc);
                        kept += 1;
                    }
                }
                short |= kept < cfg.m && keys.len() == cap;
            }
            if !short {
                break;
            }
            cap *= 4;
        }
        st.step = Some(step);
        // The group's components at their baseline positions always stay available, so the
        // search cannot run into a dead end.
        let mut members: Vec<usize> =
            parent_groups.iter().flat_map(|&g| groups[g].as_ref().expect("live").members.clone()).collect();
        members.push(c);
        let fallback = PartialCircuit::baseline_subset(cat, &members);
        if !next.iter().any(|p| p.canonical_hash() == fallback.canonical_hash()) {
            next.push(fallback);
        }
        st.kept = next.len();
        st.best_depth = next.iter().map(|p| p.depth()).min().unwrap_or(0);
        st.pruned = st.valid.saturating_sub(st.kept);
        if next.is_empty() {
            stats.push(st.clone());
            return Err(CompileError::NoCandidates { iteration: it + 1, component: comp.label.clone() });
        }
        stats.push(st);

        let gid = match parent_groups.as_slice() {
            [] => {
                groups.push(None);
                groups.len() - 1
            }
            [g] => *g,
            [g1, g2] => {
                groups[*g2] = None;
                for x in group_of.iter_mut() {
                    if *x == *g2 {
                        *x = *g1;
                    }
                }
                *g1
            }
            _ => unreachable!(),
        };
        groups[gid] = Some(Group { set: next, members });
        group_of[c] = gid;
    }
    let sets = groups.into_iter().flatten().map(|g| g.set).collect();
    Ok((sets, stats))
}

/// Whether every component that could be placed next on `pc` alone still has a valid
/// placement. Couplers waiting on another group are not checked.
fn viable(cat: &Catalog, pc: &PartialCircuit) -> bool {
    let placed = pc.placed();
    let mut checked = Vec::new();
    for k in 0..cat.num_channels() {
        let Some(f) = pc.frontier(k) else { continue };
        let slot = cat.decomp.components[f.comp].slot(k).expect("frontier component carries its channel");
        let Some(child) = cat.child(f.comp, slot) else { continue };
        if placed.contains(&child) || checked.contains(&child) {
            continue;
        }
        checked.push(child);
        if cat.decomp.dag.parents(child).any(|e| !placed.contains(&e.parent)) {
            continue;
        }
        let ok = (0..cat.variants[child].len())
            .any(|vi| attach_overlays(cat, pc, child, vi).iter().any(|ov| pc.check_overlay(ov, cat.width).is_ok()));
        if !ok {
            return false;
        }
    }
    (0..cat.num_channels()).all(|k| match pc.frontier(k) {
        Some(f) => has_room(cat, pc, f, photons_needed(cat, k, f.comp)),
        None => true,
    })
}

/// Photons channel `k` still needs after `comp` up to and including its next coupler photon.
/// Inserted wires only add to this.
fn photons_needed(cat: &Catalog, k: usize, comp: usize) -> usize {
    let route = &cat.decomp.routes[k];
    let at = route.iter().position(|e| *e == Element::Comp(comp)).expect("component on its channel");
    let mut need = 0;
    for e in &route[at + 1..] {
        let Element::Comp(c) = *e else { continue };
        let next = &cat.decomp.components[c];
        if next.is_coupler() {
            return need + 1;
        }
        need += next.cells.len();
    }
    need
}

/// Whether at least `need` photons that touch nothing else on the board can be reached from
/// the frontier without stepping left. Reaching past the right edge means unlimited room.
fn has_room(cat: &Catalog, pc: &PartialCircuit, f: Frontier, need: usize) -> bool {
    if need == 0 {
        return true;
    }
    let (rows, cols, w) = (pc.width() as i32, pc.depth() as i32, cat.width as i32);
    let own = |q: Pos| q == f.cell || Some(q) == f.leaf;
    let clear = |p: Pos| {
        p.0 >= rows - w
            && p.0 < w
            && pc.get(p).is_empty()
            && [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().all(|d| {
                let q = (p.0 + d.0, p.1 + d.1);
                pc.get(q).is_empty() || own(q)
            })
    };
    let (r, c) = f.cell;
    let starts: Vec<Pos> = if f.leaf.is_some() { vec![(r, c + 1)] } else { vec![(r - 1, c), (r, c + 1), (r + 1, c)] };
    let mut seen: HashSet<Pos> = HashSet::new();
    let mut queue: Vec<Pos> = starts.into_iter().filter(|&p| clear(p)).collect();
    seen.extend(queue.iter().copied());
    while let Some(p) = queue.pop() {
        if p.1 >= cols || seen.len() >= need {
            return true;
        }
        for q in [(p.0 - 1, p.1), (p.0 + 1, p.1), (p.0, p.1 + 1)] {
            if !seen.contains(&q) && clear(q) {
                seen.insert(q);
                queue.push(q);
            }
        }
    }
    seen.len() >= need
}

fn rank(a: &PartialCircuit) -> (usize, usize, i64) {
    (a.depth(), a.width(), -(a.space() as i64))
}

/// Picks one candidate per group and stacks them with an empty row in between, minimizing
/// the tallest depth, then the total width.
fn assemble(mut sets: Vec<Vec<PartialCircuit>>, width: usize, channels: usize) -> Option<PartialCircuit> {
    // Stack in order of the lowest channel each group carries.
    sets.sort_by_key(|s| (0..).find(|&k| s[0].frontier(k).is_some()).unwrap_or(usize::MAX));
    let mut depths: Vec<usize> = sets.iter().flatten().map(|p| p.depth()).collect();
    depths.sort_unstable();
    depths.dedup();
    if sets.len() > width + 1 {
        return None;
    }
    let budget = width + 1 - sets.len();
    for d in depths {
        let picks: Option<Vec<&PartialCircuit>> = sets
            .iter()
            .map(|s| s.iter().filter(|p| p.depth() <= d).min_by_key(|p| (p.width(), -(p.space() as i64), p.depth())))
            .collect();
        let Some(picks) = picks else { continue };
        if picks.iter().map(|p| p.width()).sum::<usize>() <= budget {
            let mut acc = PartialCircuit::empty(channels);
            for p in picks {
                acc = acc.stack(p, 1);
            }
            return Some(acc);
        }
    }
    None
}

/// Compiles one round.
pub fn compile(circuit: &GateCircuit, cfg: &CompileConfig) -> Result<CompileResult, CompileError> {
    let (baseline, cat) = prepare(circuit, cfg)?;
    let (sets, iterations) = search(&cat, cfg)?;
    let groups = sets.len();
    let mut finals: Vec<PartialCircuit> = if groups == 1 {
        sets.into_iter().next().expect("one group")
    } else {
        let a = assemble(sets, cfg.cluster_width, cat.num_channels())
            .ok_or(CompileError::NoCandidates { iteration: iterations.len(), component: "final assembly".into() })?;
        vec![a]
    };
    finals.sort_by_key(rank);
    let mut grid = finals[0].to_grid(&cat, cfg.cluster_width, None);
    grid.set_meta(circuit.num_qubits, 1);
    let stats = CompileStats {
        baseline_depth: baseline.depth(),
        components: cat.num_components(),
        iterations,
        groups,
        final_candidates: finals.len(),
    };
    Ok(CompileResult { grid, stats, finals, catalog: cat })
}

/// Baseline lowering repeated `rounds` times with one all-Z column between rounds.
pub fn baseline_multiround(circuit: &GateCircuit, rounds: usize) -> MbqcGrid {
    let one = lower_baseline(circuit);
    let blocks = vec![(one.clone(), 0usize, 0usize); rounds.max(1)];
    let mut col = 0;
    let placed: Vec<(MbqcGrid, usize, usize)> = blocks
        .into_iter()
        .map(|(g, r, _)| {
            let at = col;
            col += g.depth() + 1;
            (g, r, at)
        })
        .collect();
    concat_rounds(&placed, one.width(), circuit.num_qubits)
}

/// Writes each (block, row offset, column offset) as one round.
fn concat_rounds(blocks: &[(MbqcGrid, usize, usize)], width: usize, num_qubits: usize) -> MbqcGrid {
    let mut g = MbqcGrid::new(width);
    g.set_meta(num_qubits, blocks.len());
    let mut channels = Vec::new();
    for (round, (b, dr, dc)) in blocks.iter().enumerate() {
        for ((r, c), basis) in b.non_z() {
            g.set(r + dr, c + dc, basis).expect("block fits the width");
            let component = b.note(r, c).and_then(|n| n.component.clone());
            g.set_note(r + dr, c + dc, CellNote { component, round: Some(round) });
        }
        for ch in b.channels() {
            channels.push(ch.iter().map(|&(r, c)| (r + dr, c + dc)).collect());
        }
    }
    g.set_channels(channels);
    g
}

/// One compiled round as seen by the round packer.
struct Block {
    grid: MbqcGrid,
    height: usize,
    depth: usize,
    left: Vec<i32>,
    right: Vec<i32>,
}

impl Block {
    fn new(grid: MbqcGrid) -> Self {
        let height = grid.used_height();
        let mut left = vec![i32::MAX; height];
        let mut right = vec![-1; height];
        for ((r, c), _) in grid.non_z() {
            left[r] = left[r].min(c as i32);
            right[r] = right[r].max(c as i32);
        }
        Self { depth: grid.depth(), grid, height, left, right }
    }
}

#[derive(Clone)]
struct RoundState {
    right: Vec<i32>,
    depth: usize,
    space: i64,
    start: i32,
    back: Option<usize>,
    block: usize,
    row: usize,
    col: usize,
}

/// Compiles `cfg.rounds` independent rounds into one grid. Each round is a circuit from the
/// single-round final set; rounds are packed left to right, never touching each other, and a
/// later round may start inside the trailing space of earlier ones.
pub fn compile_multiround(circuit: &GateCircuit, cfg: &CompileConfig) -> Result<CompileResult, CompileError> {
    let single = compile(circuit, cfg)?;
    if cfg.rounds == 1 {
        return Ok(single);
    }
    let w = cfg.cluster_width;
    // Best circuit per width keeps the packer small.
    let mut blocks: Vec<Block> = Vec::new();
    let mut seen_width = HashSet::new();
    for pc in &single.finals {
        if seen_width.insert(pc.width()) {
            blocks.push(Block::new(pc.to_grid(&single.catalog, w, None)));
        }
    }
    let mut layers: Vec<Vec<RoundState>> = Vec::with_capacity(cfg.rounds);
    let empty = RoundState { right: vec![-1; w], depth: 0, space: 0, start: 0, back: None, block: 0, row: 0, col: 0 };
    for round in 0..cfg.rounds {
        let prev: Vec<RoundState> = if round == 0 { vec![empty.clone()] } else { layers[round - 1].clone() };
        let mut cands: Vec<(Key, usize, RoundState)> = Vec::new();
        for (si, s) in prev.iter().enumerate() {
            for (bi, b) in blocks.iter().enumerate() {
                for off in 0..=(w - b.height) {
                    let mut dc = s.start;
                    for r in 0..b.height {
                        if b.right[r] < 0 {
                            continue;
                        }
                        let gr = off + r;
                        let mut need = s.right[gr] + 2;
                        if gr > 0 {
                            need = need.max(s.right[gr - 1] + 1);
                        }
                        if gr + 1 < w {
                            need = need.max(s.right[gr + 1] + 1);
                        }
                        dc = dc.max(need - b.left[r]);
                    }
                    let mut right = s.right.clone();
                    for r in 0..b.height {
                        if b.right[r] >= 0 {
                            right[off + r] = right[off + r].max(b.right[r] + dc);
                        }
                    }
                    let depth = s.depth.max(dc as usize + b.depth);
                    let maxc = depth as i64 - 1;
                    let space: i64 = right.iter().filter(|&&x| x >= 0).map(|&x| maxc - x as i64).sum();
                    let used: Vec<usize> = (0..w).filter(|&r| right[r] >= 0).collect();
                    let width = used.last().map_or(0, |l| l - used[0] + 1);
                    let st = RoundState {
                        right,
                        depth,
                        space,
                        start: dc,
                        back: Some(si),
                        block: bi,
                        row: off,
                        col: dc as usize,
                    };
                    let k = Key { depth, neg_space: -space, order: [si as u32, bi as u32, off as u32, 0] };
                    cands.push((k, width, st));
                }
            }
        }
        cands.sort_by_key(|a| (a.1, a.0));
        let mut kept: Vec<RoundState> = Vec::new();
        let mut seen: HashSet<(Vec<i32>, usize)> = HashSet::new();
        let mut per_width: BTreeMap<usize, usize> = BTreeMap::new();
        for (_, width, st) in cands {
            let n = per_width.entry(width).or_insert(0);
            if *n >= cfg.m || !seen.insert((st.right.clone(), st.depth)) {
                continue;
            }
            *n += 1;
            kept.push(st);
        }
        layers.push(kept);
    }
    // Best final state, then walk back.
    let last = layers.last().expect("rounds ≥ 1");
    let (mut idx, _) = last.iter().enumerate().min_by_key(|(i, s)| (s.depth, -s.space, *i)).expect("states");
    let mut chain = Vec::with_capacity(cfg.rounds);
    for r in (0..cfg.rounds).rev() {
        let s = &layers[r][idx];
        chain.push((blocks[s.block].grid.clone(), s.row, s.col));
        idx = s.back.unwrap_or(0);
    }
    chain.reverse();
    let grid = concat_rounds(&chain, w, circuit.num_qubits);
    Ok(CompileResult { grid, stats: single.stats, finals: vec![], catalog: single.catalog })
}
