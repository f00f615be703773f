//! Intra-component variants: alternative geometries that keep measurement order.
//!
//! An S variant is a monotone lattice path (right, up, down steps) in which only consecutive
//! photons touch. Such a path is a sequence of per-column vertical runs `v_j`; two touching
//! non-consecutive photons can only arise between neighbouring columns, which happens
//! exactly when two consecutive runs are both non-zero and point in opposite directions.

use crate::component::{Component, ComponentKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantCaps {
    /// Upper bound on S variants per component; `None` enumerates everything.
    pub max_s_variants: Option<usize>,
    /// Allow more than two photons of an S component in one column.
    pub allow_stacked_columns: bool,
    /// Extra X pairs allowed beyond the baseline length of a wire.
    pub wire_extra_pairs: usize,
}

impl Default for VariantCaps {
    fn default() -> Self {
        Self { max_s_variants: Some(512), allow_stacked_columns: true, wire_extra_pairs: 3 }
    }
}

impl VariantCaps {
    pub fn unlimited() -> Self {
        Self { max_s_variants: None, ..Self::default() }
    }
}

/// A geometry for one component. `cells[i]` is the relative position of the component's
/// cell `i`; S variants put cell 0 at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub cells: Vec<(i32, i32)>,
}

impl Variant {
    pub fn height(&self) -> usize {
        let (lo, hi) = self.row_range();
        (hi - lo + 1) as usize
    }

    pub fn span(&self) -> usize {
        let lo = self.cells.iter().map(|c| c.1).min().unwrap_or(0);
        let hi = self.cells.iter().map(|c| c.1).max().unwrap_or(0);
        (hi - lo + 1) as usize
    }

    pub fn row_range(&self) -> (i32, i32) {
        let lo = self.cells.iter().map(|c| c.0).min().unwrap_or(0);
        let hi = self.cells.iter().map(|c| c.0).max().unwrap_or(0);
        (lo, hi)
    }
}

/// Enumerates the variants of `comp` whose height fits `max_width`.
pub fn generate_variants(comp: &Component, max_width: usize, caps: &VariantCaps) -> Vec<Variant> {
    match comp.kind {
        ComponentKind::Tx | ComponentKind::Tp => {
            let base: Vec<(i32, i32)> = comp.cells.iter().map(|c| (c.row, c.col)).collect();
            let mirror = base.iter().map(|&(r, c)| (2 - r, c)).collect();
            if max_width < 3 {
                return vec![];
            }
            vec![Variant { cells: base }, Variant { cells: mirror }]
        }
        ComponentKind::Wire => {
            let base = comp.cells.len();
            (1..=(base / 2 + caps.wire_extra_pairs))
                .map(|p| Variant { cells: (0..2 * p as i32).map(|c| (0, c)).collect() })
                .collect()
        }
        ComponentKind::S => s_variants(comp.cells.len(), max_width, caps)
            .into_iter()
            .map(|runs| Variant { cells: cells_from_runs(&runs) })
            .collect(),
    }
}

/// Cells of the path whose per-column vertical runs are `runs`.
pub fn cells_from_runs(runs: &[i32]) -> Vec<(i32, i32)> {
    let mut cells = Vec::new();
    let mut r = 0;
    for (c, &v) in runs.iter().enumerate() {
        let step = v.signum();
        cells.push((r, c as i32));
        for _ in 0..v.abs() {
            r += step;
            cells.push((r, c as i32));
        }
    }
    cells
}

struct Search {
    k: i32,
    max_h: i32,
    stacked: bool,
    /// Exact column count required, if any.
    span: Option<i32>,
    /// Exact height required, if any.
    height: Option<i32>,
    limit: usize,
    out: Vec<Vec<i32>>,
    runs: Vec<i32>,
    overflow: bool,
}

impl Search {
    fn run(&mut self) {
        self.dfs(0, 0, 0, 0, 0);
    }

    /// `placed` photons so far, current row, running row range, previous run.
    fn dfs(&mut self, placed: i32, row: i32, lo: i32, hi: i32, prev: i32) {
        if self.out.len() > self.limit {
            self.overflow = true;
            return;
        }
        let remaining = self.k - placed;
        if remaining == 0 {
            if self.span.is_none_or(|s| s == self.runs.len() as i32) && self.height.is_none_or(|h| h == hi - lo + 1) {
                self.out.push(self.runs.clone());
            }
            return;
        }
        let col = self.runs.len() as i32;
        // Photons left over for vertical steps once every remaining column has its first one.
        let mut vertical = remaining - 1;
        if let Some(s) = self.span {
            let cols_left = s - col;
            let h = self.height.unwrap_or(self.max_h);
            if cols_left <= 0 || remaining < cols_left || remaining > cols_left * h {
                return;
            }
            vertical = remaining - cols_left;
        }
        if let Some(h) = self.height {
            if h - (hi - lo + 1) > vertical {
                return;
            }
        }
        let h_cap = self.height.unwrap_or(self.max_h);
        let max_mag = if self.stacked { remaining - 1 } else { (remaining - 1).min(1) };
        let mut candidates = vec![0];
        for m in 1..=max_mag {
            candidates.push(m);
            candidates.push(-m);
        }
        for v in candidates {
            if v != 0 && prev != 0 && v.signum() != prev.signum() {
                continue;
            }
            let end = row + v;
            let (nlo, nhi) = (lo.min(end), hi.max(end));
            if nhi - nlo + 1 > h_cap {
                continue;
            }
            self.runs.push(v);
            self.dfs(placed + v.abs() + 1, end, nlo, nhi, v);
            self.runs.pop();
            if self.overflow {
                return;
            }
        }
    }
}

/// Run sequences of S variants with `k` photons, ordered by (span, height, runs).
pub fn s_variants(k: usize, max_width: usize, caps: &VariantCaps) -> Vec<Vec<i32>> {
    if k == 0 || max_width == 0 {
        return vec![];
    }
    let base = |span, height, limit| Search {
        k: k as i32,
        max_h: max_width as i32,
        stacked: caps.allow_stacked_columns,
        span,
        height,
        limit,
        out: Vec::new(),
        runs: Vec::new(),
        overflow: false,
    };
    let cap = caps.max_s_variants.unwrap_or(usize::MAX);
    let mut all = base(None, None, cap);
    all.run();
    let mut chosen = if !all.overflow {
        all.out
    } else {
        // Round-robin over exact heights, fewest columns first within each height.
        let heights: Vec<i32> = (1..=(k.min(max_width)) as i32).collect();
        let mut chosen: Vec<Vec<i32>> = Vec::new();
        let mut left = cap;
        for (i, &h) in heights.iter().enumerate() {
            let quota = (left / (heights.len() - i)).max(1);
            let mut got: Vec<Vec<i32>> = Vec::new();
            for s in 1..=k as i32 {
                if got.len() >= quota {
                    break;
                }
                let mut srch = base(Some(s), Some(h), quota - got.len() - 1);
                srch.run();
                got.extend(srch.out.into_iter().take(quota - got.len()));
            }
            left = left.saturating_sub(got.len());
            chosen.extend(got);
        }
        let straight = vec![0; k];
        if !chosen.contains(&straight) {
            chosen.push(straight);
        }
        chosen
    };
    chosen.sort_by(|a, b| {
        let ka = (a.len(), height_of(a));
        let kb = (b.len(), height_of(b));
        ka.cmp(&kb).then_with(|| a.cmp(b))
    });
    chosen
}

fn height_of(runs: &[i32]) -> i32 {
    let (mut r, mut lo, mut hi) = (0, 0, 0);
    for &v in runs {
        r += v;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi - lo + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component::CompCell;
    use crate::grid::MeasurementBasis as B;
    use std::collections::HashSet;

    fn s_comp(k: usize) -> Component {
        Component {
            id: 0,
            kind: ComponentKind::S,
            label: "S0".into(),
            cells: (0..k).map(|i| CompCell { row: 0, col: i as i32, basis: B::Y }).collect(),
            channels: vec![0],
            in_points: vec![0],
            out_points: vec![k - 1],
            origin: (0, 0),
        }
    }

    /// Brute force over all R/U/D step words.
    fn brute(k: usize, max_h: usize, stacked: bool) -> HashSet<Vec<(i32, i32)>> {
        let mut out = HashSet::new();
        let words = 3usize.pow(k as u32 - 1);
        'w: for mut w in 0..words {
            let mut cells = vec![(0i32, 0i32)];
            for _ in 1..k {
                let (r, c) = *cells.last().unwrap();
                let next = match w % 3 {
                    0 => (r, c + 1),
                    1 => (r - 1, c),
                    _ => (r + 1, c),
                };
                w /= 3;
                cells.push(next);
            }
            for i in 0..k {
                for j in i + 1..k {
                    let d = (cells[i].0 - cells[j].0).abs() + (cells[i].1 - cells[j].1).abs();
                    if d == 0 || (d == 1 && j != i + 1) {
                        continue 'w;
                    }
                }
            }
            let lo = cells.iter().map(|c| c.0).min().unwrap();
            let hi = cells.iter().map(|c| c.0).max().unwrap();
            if (hi - lo + 1) as usize > max_h {
                continue;
            }
            if !stacked {
                let mut per_col = std::collections::HashMap::new();
                for c in &cells {
                    *per_col.entry(c.1).or_insert(0) += 1;
                }
                if per_col.values().any(|&n| n > 2) {
                    continue;
                }
            }
            out.insert(cells);
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        for k in 1..=9 {
            for (h, stacked) in [(2, true), (4, true), (9, true), (9, false)] {
                let caps = VariantCaps { allow_stacked_columns: stacked, ..VariantCaps::unlimited() };
                let got: Vec<_> = generate_variants(&s_comp(k), h, &caps).into_iter().map(|v| v.cells).collect();
                let set: HashSet<_> = got.iter().cloned().collect();
                assert_eq!(set.len(), got.len(), "duplicates for k={k}");
                assert_eq!(set, brute(k, h, stacked), "k={k} h={h} stacked={stacked}");
            }
        }
    }

    #[test]
    fn known_counts() {
        let n = |k| s_variants(k, 100, &VariantCaps::unlimited()).len();
        assert_eq!((n(3), n(5), n(12)), (7, 33, 8401));
    }

    #[test]
    fn three_photon_bend() {
        let v: Vec<_> =
            generate_variants(&s_comp(3), 8, &VariantCaps::default()).into_iter().map(|v| v.cells).collect();
        assert!(v.contains(&vec![(0, 0), (0, 1), (-1, 1)]));
        assert!(v.iter().all(|cells| cells.windows(2).all(|w| w[1].1 >= w[0].1)));
    }

    #[test]
    fn cap_is_respected_and_keeps_straight_shape() {
        let caps = VariantCaps::default();
        for k in [12, 20, 31] {
            let v = s_variants(k, 37, &caps);
            assert!(v.len() <= 513, "k={k}: {}", v.len());
            assert!(v.contains(&vec![0; k]));
            let set: HashSet<_> = v.iter().collect();
            assert_eq!(set.len(), v.len());
            let heights: HashSet<i32> = v.iter().map(|r| height_of(r)).collect();
            assert!(heights.len() >= k.min(37) / 2, "k={k}: heights {heights:?}");
        }
    }

    #[test]
    fn couplers_have_two_variants() {
        let tx = Component {
            id: 0,
            kind: ComponentKind::Tx,
            label: "TX0".into(),
            cells: [(0, 0), (1, 0), (2, 0)].iter().map(|&(r, c)| CompCell { row: r, col: c, basis: B::Y }).collect(),
            channels: vec![0, 1],
            in_points: vec![0, 2],
            out_points: vec![0, 2],
            origin: (0, 0),
        };
        for w in [3, 8, 40] {
            let v = generate_variants(&tx, w, &VariantCaps::default());
            assert_eq!(v.len(), 2);
            assert!(v.iter().all(|x| x.cells.iter().all(|c| c.1 == 0)));
        }
    }
}
