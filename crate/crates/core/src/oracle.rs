//! Exhaustive reference search for small circuits.
//!
//! Explores every placement sequence the compiler's construction can produce, in the same
//! component order, with no variant cap and no pruning. Branch-and-bound on depth keeps it
//! finite: boards never get shallower as components are added, so any partial state already
//! at the incumbent's depth is cut. Identical states reached along different paths are
//! expanded once.

use crate::circuit::GateCircuit;
use crate::compiler::{prepare, selection_order, CompileConfig, CompileError, Selection};
use crate::placement::{attach_overlays, combine_plans, root_overlay, Catalog, PartialCircuit};
use crate::variants::VariantCaps;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("search budget of {0} states exhausted")]
    Budget(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub depth: usize,
    /// States expanded.
    pub states: u64,
}

struct Dfs<'a> {
    cat: &'a Catalog,
    order: Vec<usize>,
    width: usize,
    best: usize,
    states: u64,
    budget: u64,
    seen: HashSet<u64>,
}

#[derive(Clone)]
struct State {
    groups: Vec<PartialCircuit>,
    members: Vec<Vec<usize>>,
    group_of: Vec<usize>,
}

impl State {
    fn depth(&self) -> usize {
        self.groups.iter().map(|g| g.depth()).max().unwrap_or(0)
    }

    fn key(&self, step: usize) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        step.hash(&mut h);
        for (g, m) in self.groups.iter().zip(&self.members) {
            m.first().hash(&mut h);
            g.canonical_hash().hash(&mut h);
        }
        h.finish()
    }
}

impl Dfs<'_> {
    fn finish(&self, s: &State) -> Option<usize> {
        let gap = s.groups.len() - 1;
        let total: usize = s.groups.iter().map(|g| g.width()).sum::<usize>() + gap;
        (total <= self.width).then(|| s.depth())
    }

    fn go(&mut self, step: usize, s: State) -> Result<(), OracleError> {
        if s.depth() >= self.best {
            return Ok(());
        }
        if step == self.order.len() {
            if let Some(d) = self.finish(&s) {
                self.best = self.best.min(d);
            }
            return Ok(());
        }
        if !self.seen.insert(s.key(step)) {
            return Ok(());
        }
        self.states += 1;
        if self.states > self.budget {
            return Err(OracleError::Budget(self.budget));
        }
        let cat = self.cat;
        let c = self.order[step];
        let comp = &cat.decomp.components[c];
        let mut pg: Vec<usize> =
            (0..comp.channels.len()).filter_map(|k| cat.parent(c, k)).map(|p| s.group_of[p]).collect();
        pg.dedup();
        let mut children: Vec<(usize, PartialCircuit)> = Vec::new();
        for vi in 0..cat.variants[c].len() {
            match pg.as_slice() {
                [] => {
                    let ov = root_overlay(cat, c, vi);
                    let empty = PartialCircuit::empty(cat.num_channels());
                    if empty.check_overlay(&ov, cat.width).is_ok() {
                        let pc = empty.apply(cat, &ov);
                        children.push((pc.depth(), pc));
                    }
                }
                [g] => {
                    let pc = &s.groups[*g];
                    for ov in attach_overlays(cat, pc, c, vi) {
                        if pc.check_overlay(&ov, cat.width).is_ok() {
                            let n = pc.apply(cat, &ov);
                            children.push((n.depth(), n));
                        }
                    }
                }
                [g1, g2] => {
                    let (a, b) = (&s.groups[*g1], &s.groups[*g2]);
                    for plan in combine_plans(cat, a, b, c, vi) {
                        if a.check_combine(b, &plan, cat.width).is_ok() {
                            let n = a.apply_combine(cat, b, &plan);
                            children.push((n.depth(), n));
                        }
                    }
                }
                _ => unreachable!("components have at most two channels"),
            }
        }
        let mut members: Vec<usize> = pg.iter().flat_map(|&g| s.members[g].clone()).collect();
        members.push(c);
        let fallback = PartialCircuit::baseline_subset(cat, &members);
        children.push((fallback.depth(), fallback));
        // Shallow first, so good incumbents come early.
        children.sort_by_key(|x| x.0);
        for (d, pc) in children {
            if d >= self.best {
                break;
            }
            let mut n = s.clone();
            match pg.as_slice() {
                [] => {
                    n.groups.push(pc);
                    n.members.push(members.clone());
                    n.group_of[c] = n.groups.len() - 1;
                }
                [g] => {
                    n.groups[*g] = pc;
                    n.members[*g] = members.clone();
                    n.group_of[c] = *g;
                }
                [g1, g2] => {
                    let (keep, gone) = (*g1.min(g2), *g1.max(g2));
                    n.groups[keep] = pc;
                    n.members[keep] = members.clone();
                    n.groups.remove(gone);
                    n.members.remove(gone);
                    for x in n.group_of.iter_mut() {
                        if *x == *g1 || *x == *g2 {
                            *x = keep;
                        } else if *x != usize::MAX && *x > gone {
                            *x -= 1;
                        }
                    }
                    n.group_of[c] = keep;
                }
                _ => unreachable!(),
            }
            self.go(step + 1, n)?;
        }
        Ok(())
    }
}

/// Minimum depth over the whole construction space at `width`, or a budget error after
/// `budget` expanded states.
pub fn exhaustive_min_depth(circuit: &GateCircuit, width: usize, budget: u64) -> Result<OracleResult, OracleError> {
    let cfg = CompileConfig { caps: VariantCaps::unlimited(), ..CompileConfig::new(width) };
    let (baseline, cat) = prepare(circuit, &cfg)?;
    let order = selection_order(&cat, Selection::SmallestId, 0);
    let n = cat.num_components();
    let mut dfs = Dfs { cat: &cat, order, width, best: baseline.depth() + 1, states: 0, budget, seen: HashSet::new() };
    let start = State { groups: vec![], members: vec![], group_of: vec![usize::MAX; n] };
    dfs.go(0, start)?;
    Ok(OracleResult { depth: dfs.best, states: dfs.states })
}
