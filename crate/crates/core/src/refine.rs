//! Color refinement and individualization-refinement.
//!
//! A [`Coloring`] is an ordered partition of the vertices: a class occupying
//! slots `[p, p + s)` of the partition array has color id `p`. Refinement
//! splits classes by neighbor counts towards a splitter class, orders the
//! fragments by ascending count and queues every fragment but the largest
//! one. Every decision depends only on color ids and counts, so the resulting
//! ordered partition is isomorphism-invariant.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::graph::ColoredGraph;

/// An ordered vertex partition.
#[derive(Clone, Debug)]
pub struct Coloring {
    elements: Vec<u32>,
    /// Per vertex, kept together so a touched vertex costs one cache line.
    slots: Vec<Slot>,
    cell_len: Vec<u32>,
    cells: usize,
    /// Equal stamps imply equal contents; lets a restored scratch copy stand
    /// in for a fresh clone.
    stamp: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Slot {
    position: u32,
    cell: u32,
}

static NEXT_STAMP: AtomicUsize = AtomicUsize::new(1);

fn fresh_stamp() -> usize {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

impl Coloring {
    /// Classes ordered by ascending key.
    pub fn from_keys(keys: &[u32]) -> Coloring {
        let n = keys.len();
        let mut elements: Vec<u32> = (0..n as u32).collect();
        elements.sort_by_key(|&v| keys[v as usize]);
        let mut slots = alloc::vec![Slot::default(); n];
        let mut cell_len = alloc::vec![0u32; n];
        let mut cells = 0;
        let mut start = 0usize;
        for i in 0..n {
            let v = elements[i] as usize;
            slots[v].position = i as u32;
            if i > 0 && keys[v] != keys[elements[i - 1] as usize] {
                cell_len[start] = (i - start) as u32;
                cells += 1;
                start = i;
            }
            slots[v].cell = start as u32;
        }
        if n > 0 {
            cell_len[start] = (n - start) as u32;
            cells += 1;
        }
        Coloring {
            elements,
            slots,
            cell_len,
            cells,
            stamp: fresh_stamp(),
        }
    }

    /// Single class containing all vertices.
    pub fn uniform(n: usize) -> Coloring {
        Coloring::from_keys(&alloc::vec![0; n])
    }

    pub fn vertex_count(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn color_of(&self, v: u32) -> u32 {
        self.slots[v as usize].cell
    }

    /// Whether `c` is the id of a class.
    pub fn is_color(&self, c: u32) -> bool {
        (c as usize) < self.elements.len() && self.slots[self.elements[c as usize] as usize].cell == c
    }

    /// Members of class `c`, in partition order.
    #[inline]
    pub fn class(&self, c: u32) -> &[u32] {
        let start = c as usize;
        &self.elements[start..start + self.cell_len[start] as usize]
    }

    #[inline]
    pub fn class_size(&self, c: u32) -> usize {
        self.cell_len[c as usize] as usize
    }

    pub fn class_count(&self) -> usize {
        self.cells
    }

    pub fn is_discrete(&self) -> bool {
        self.cells == self.elements.len()
    }

    /// The partition array.
    pub fn order(&self) -> &[u32] {
        &self.elements
    }

    pub fn position(&self, v: u32) -> u32 {
        self.slots[v as usize].position
    }

    /// Class ids in ascending order.
    pub fn colors(&self) -> impl Iterator<Item = u32> + '_ {
        let mut c = 0usize;
        core::iter::from_fn(move || {
            if c >= self.elements.len() {
                return None;
            }
            let id = c as u32;
            c += self.cell_len[c] as usize;
            Some(id)
        })
    }

    /// Whether `self` and `other` are the same ordered partition (same class
    /// boundaries and same class for every vertex).
    pub fn same_partition(&self, other: &Coloring) -> bool {
        self.slots.iter().zip(&other.slots).all(|(a, b)| a.cell == b.cell)
    }

    /// Lowest color id among classes of size > 1.
    pub fn first_nonsingleton(&self) -> Option<u32> {
        self.colors().find(|&c| self.class_size(c) > 1)
    }

    fn set_cell(&mut self, start: usize, len: usize) {
        self.cell_len[start] = len as u32;
        for i in start..start + len {
            let v = self.elements[i] as usize;
            self.slots[v].cell = start as u32;
        }
    }

    #[inline]
    fn swap_positions(&mut self, a: usize, b: usize) {
        let (va, vb) = (self.elements[a], self.elements[b]);
        self.elements[a] = vb;
        self.elements[b] = va;
        self.slots[vb as usize].position = a as u32;
        self.slots[va as usize].position = b as u32;
    }
}

/// Groups `members` by their class in `coloring`, classes in ascending id.
pub fn group_by_color(coloring: &Coloring, members: &[u32]) -> Vec<(u32, Vec<u32>)> {
    // positions are unique and a class's positions start at its color, so
    // sorting by position alone groups by ascending color
    let mut keyed: Vec<u32> = members.iter().map(|&v| coloring.position(v)).collect();
    keyed.sort_unstable();
    let mut out: Vec<(u32, Vec<u32>)> = Vec::new();
    for pos in keyed {
        let v = coloring.order()[pos as usize];
        let c = coloring.color_of(v);
        match out.last_mut() {
            Some((last, group)) if *last == c => group.push(v),
            _ => out.push((c, alloc::vec![v])),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("color {0} is not a color of the base coloring")]
pub struct UnknownColor(pub u32);

/// Result of a refinement relative to its input coloring.
#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub coloring: Coloring,
    new_singletons: Vec<u32>,
    /// Base classes that were split, with their base size.
    split: BTreeMap<u32, u32>,
    base_stamp: usize,
    /// Positions written while refining, when tracked.
    trail: Vec<u32>,
}

impl RefinementReport {
    /// Vertices that are singletons now but were not in the base, ordered by
    /// ascending color id.
    pub fn new_singletons(&self) -> &[u32] {
        &self.new_singletons
    }

    /// Refined color ids partitioning the base class `base_color`, ascending.
    pub fn fragments_of(&self, base_color: u32) -> Result<Vec<u32>, UnknownColor> {
        if let Some(&len) = self.split.get(&base_color) {
            let mut out = Vec::new();
            let mut c = base_color;
            while c < base_color + len {
                out.push(c);
                c += self.coloring.class_size(c) as u32;
            }
            return Ok(out);
        }
        if let Some((&start, &len)) = self.split.range(..base_color).next_back() {
            if base_color < start + len {
                return Err(UnknownColor(base_color));
            }
        }
        if self.coloring.is_color(base_color) {
            Ok(alloc::vec![base_color])
        } else {
            Err(UnknownColor(base_color))
        }
    }

    /// Base colors whose classes were split.
    pub fn split_colors(&self) -> impl Iterator<Item = u32> + '_ {
        self.split.keys().copied()
    }
}

/// Reusable scratch space for refinement.
#[derive(Default, Debug)]
pub struct Refiner {
    count: Vec<u32>,
    touched: Vec<u32>,
    in_queue: Vec<bool>,
    queue: VecDeque<u32>,
    splitter: Vec<u32>,
    changed: Vec<u32>,
    front: Vec<u32>,
    back: Vec<u32>,
    fragments: Vec<(u32, u32)>,
    spare: Option<Coloring>,
    tracking: bool,
    trail: Vec<u32>,
}

impl Refiner {
    pub fn new() -> Refiner {
        Refiner::default()
    }

    fn ensure(&mut self, n: usize) {
        if self.count.len() < n {
            self.count.resize(n, 0);
            self.in_queue.resize(n, false);
        }
    }

    /// Refines `pi` to the coarsest equitable coloring below it.
    pub fn refine_stable(&mut self, g: &ColoredGraph, pi: &Coloring) -> RefinementReport {
        let mut col = pi.clone();
        self.changed.clear();
        let all: Vec<u32> = col.colors().collect();
        self.refine_in_place(g, &mut col, &all);
        self.report(pi, col)
    }

    /// A copy of `pi`, reusing a recycled coloring when it matches.
    fn copy_of(&mut self, pi: &Coloring) -> Coloring {
        match self.spare.take() {
            Some(c) if c.stamp == pi.stamp => c,
            _ => pi.clone(),
        }
    }

    /// Hands a spent report back. Only the positions written by the
    /// refinement are restored, so the next individualization of `base` costs
    /// no full clone.
    pub fn recycle(&mut self, report: RefinementReport, base: &Coloring) {
        if report.base_stamp != base.stamp {
            return;
        }
        let mut col = report.coloring;
        for &p in &report.trail {
            let p = p as usize;
            let w = base.elements[p];
            col.elements[p] = w;
            col.slots[w as usize] = Slot {
                position: p as u32,
                cell: base.slots[w as usize].cell,
            };
            col.cell_len[p] = base.cell_len[p];
        }
        col.cells = base.cells;
        col.stamp = base.stamp;
        self.trail = report.trail;
        self.trail.clear();
        self.spare = Some(col);
    }

    /// Individualizes `v` in the equitable coloring `pi` and refines.
    pub fn individualize_refine(
        &mut self,
        g: &ColoredGraph,
        pi: &Coloring,
        v: u32,
    ) -> RefinementReport {
        let mut col = self.copy_of(pi);
        self.changed.clear();
        self.tracking = true;
        self.individualize_in_place(g, &mut col, v);
        self.report(pi, col)
    }

    /// Individualizes a sequence of vertices, refining after each.
    pub fn individualize_sequence(
        &mut self,
        g: &ColoredGraph,
        pi: &Coloring,
        vs: &[u32],
    ) -> RefinementReport {
        let mut col = self.copy_of(pi);
        self.changed.clear();
        self.tracking = true;
        for &v in vs {
            self.individualize_in_place(g, &mut col, v);
        }
        self.report(pi, col)
    }

    /// Gives every vertex of `vertices` its own class and refines.
    pub fn discretize_refine(
        &mut self,
        g: &ColoredGraph,
        pi: &Coloring,
        vertices: &[u32],
    ) -> RefinementReport {
        let mut col = pi.clone();
        col.stamp = fresh_stamp();
        self.changed.clear();
        self.ensure(col.vertex_count());
        let mut by_cell: Vec<(u32, u32)> =
            vertices.iter().map(|&v| (col.color_of(v), v)).collect();
        by_cell.sort_unstable();
        by_cell.dedup();
        let mut splitters: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < by_cell.len() {
            let c = by_cell[i].0;
            let mut j = i;
            while j < by_cell.len() && by_cell[j].0 == c {
                j += 1;
            }
            let len = col.class_size(c);
            let chosen = j - i;
            if len > 1 {
                let start = c as usize;
                for (k, &(_, v)) in by_cell[i..j].iter().enumerate() {
                    let p = col.position(v) as usize;
                    col.swap_positions(start + k, p);
                }
                let mut frags: Vec<(u32, u32)> =
                    (0..chosen).map(|k| ((start + k) as u32, 1)).collect();
                if chosen < len {
                    frags.push(((start + chosen) as u32, (len - chosen) as u32));
                }
                for &(s, l) in &frags {
                    col.set_cell(s as usize, l as usize);
                    self.changed.push(s);
                }
                col.cells += frags.len() - 1;
                let largest = largest_fragment(&frags);
                splitters.extend(
                    frags
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != largest)
                        .map(|(_, f)| f.0),
                );
            }
            i = j;
        }
        splitters.sort_unstable();
        self.refine_in_place(g, &mut col, &splitters);
        self.report(pi, col)
    }

    /// Individualizes `v` and refines, mutating `col`.
    pub fn individualize_in_place(&mut self, g: &ColoredGraph, col: &mut Coloring, v: u32) {
        self.ensure(col.vertex_count());
        col.stamp = fresh_stamp();
        let c = col.color_of(v) as usize;
        let len = col.class_size(c as u32);
        if len == 1 {
            return;
        }
        let p = col.position(v) as usize;
        if self.tracking {
            self.trail.push(p as u32);
            self.trail.extend(c as u32..(c + len) as u32);
        }
        col.swap_positions(c, p);
        col.cell_len[c] = 1;
        col.set_cell(c + 1, len - 1);
        col.cells += 1;
        self.changed.push(c as u32);
        self.changed.push(c as u32 + 1);
        self.refine_in_place(g, col, &[c as u32]);
    }

    /// Refines `col` until equitable, starting from the given splitter classes.
    pub fn refine_in_place(&mut self, g: &ColoredGraph, col: &mut Coloring, splitters: &[u32]) {
        self.ensure(col.vertex_count());
        col.stamp = fresh_stamp();
        for &s in splitters {
            if !self.in_queue[s as usize] {
                self.in_queue[s as usize] = true;
                self.queue.push_back(s);
            }
        }
        while let Some(x) = self.queue.pop_front() {
            self.in_queue[x as usize] = false;
            self.splitter.clear();
            self.splitter.extend_from_slice(col.class(x));
            for &v in &self.splitter {
                for &w in g.neighbors(v) {
                    let cnt = &mut self.count[w as usize];
                    if *cnt == 0 {
                        self.touched.push(w);
                    }
                    *cnt += 1;
                }
            }
            let count = &self.count;
            let slots = &col.slots;
            self.touched.sort_unstable_by_key(|&w| {
                (u64::from(slots[w as usize].cell) << 32) | u64::from(count[w as usize])
            });
            let touched = core::mem::take(&mut self.touched);
            let mut i = 0;
            while i < touched.len() {
                let c = col.slots[touched[i] as usize].cell;
                let mut j = i;
                while j < touched.len() && col.slots[touched[j] as usize].cell == c {
                    j += 1;
                }
                self.split_cell(col, c, &touched[i..j]);
                i = j;
            }
            for &w in &touched {
                self.count[w as usize] = 0;
            }
            self.touched = touched;
            self.touched.clear();
        }
    }

    /// Splits class `c` given its touched members sorted by ascending count.
    fn split_cell(&mut self, col: &mut Coloring, c: u32, group: &[u32]) {
        let start = c as usize;
        let len = col.class_size(c);
        let k = group.len();
        let first_count = self.count[group[0] as usize];
        if k == len && first_count == self.count[group[k - 1] as usize] {
            return;
        }
        let back = start + len - k;
        // move the touched vertices into [back, start + len)
        self.front.clear();
        self.back.clear();
        for &w in group {
            if (col.position(w) as usize) < back {
                self.front.push(w);
            }
        }
        for p in back..start + len {
            let u = col.elements[p];
            if self.count[u as usize] == 0 {
                self.back.push(u);
            }
        }
        debug_assert_eq!(self.front.len(), self.back.len());
        if self.tracking {
            self.trail.push(start as u32);
            self.trail.extend(back as u32..(start + len) as u32);
            self.trail.extend(self.front.iter().map(|&a| col.slots[a as usize].position));
        }
        for idx in 0..self.front.len() {
            let (a, b) = (self.front[idx], self.back[idx]);
            let (pa, pb) = (col.position(a) as usize, col.position(b) as usize);
            col.swap_positions(pa, pb);
        }
        for (i, &w) in group.iter().enumerate() {
            col.elements[back + i] = w;
            col.slots[w as usize].position = (back + i) as u32;
        }

        self.fragments.clear();
        if back > start {
            self.fragments.push((start as u32, (back - start) as u32));
        }
        let mut s = 0;
        while s < k {
            let cnt = self.count[group[s] as usize];
            let mut e = s;
            while e < k && self.count[group[e] as usize] == cnt {
                e += 1;
            }
            self.fragments.push(((back + s) as u32, (e - s) as u32));
            s = e;
        }
        for &(fs, fl) in &self.fragments {
            if fs == c {
                col.cell_len[start] = fl;
            } else {
                col.set_cell(fs as usize, fl as usize);
            }
            self.changed.push(fs);
        }
        col.cells += self.fragments.len() - 1;

        if self.in_queue[start] {
            for &(fs, _) in &self.fragments[1..] {
                self.in_queue[fs as usize] = true;
                self.queue.push_back(fs);
            }
        } else {
            let largest = largest_fragment(&self.fragments);
            for (i, &(fs, _)) in self.fragments.iter().enumerate() {
                if i != largest {
                    self.in_queue[fs as usize] = true;
                    self.queue.push_back(fs);
                }
            }
        }
    }

    fn report(&mut self, base: &Coloring, coloring: Coloring) -> RefinementReport {
        self.changed.sort_unstable();
        self.changed.dedup();
        let mut new_singletons = Vec::new();
        let mut split = BTreeMap::new();
        for &c in &self.changed {
            let v = coloring.elements[c as usize];
            let base_color = base.color_of(v);
            let base_len = base.class_size(base_color) as u32;
            if coloring.class_size(c) < base_len as usize {
                split.insert(base_color, base_len);
                if coloring.class_size(c) == 1 {
                    new_singletons.push(v);
                }
            }
        }
        self.changed.clear();
        // stamps start at 1, so 0 marks a report that cannot be restored
        let base_stamp = if self.tracking { base.stamp } else { 0 };
        self.tracking = false;
        RefinementReport {
            coloring,
            new_singletons,
            split,
            base_stamp,
            trail: core::mem::take(&mut self.trail),
        }
    }
}

fn largest_fragment(frags: &[(u32, u32)]) -> usize {
    let mut best = 0;
    for (i, f) in frags.iter().enumerate() {
        if f.1 > frags[best].1 {
            best = i;
        }
    }
    best
}

/// Initial ordered partition of a graph (classes by ascending color key).
pub fn initial_coloring(g: &ColoredGraph) -> Coloring {
    Coloring::from_keys(g.initial_coloring())
}

pub fn refine_stable(g: &ColoredGraph, pi: &Coloring) -> RefinementReport {
    Refiner::new().refine_stable(g, pi)
}

pub fn individualize_refine(g: &ColoredGraph, pi: &Coloring, v: u32) -> RefinementReport {
    Refiner::new().individualize_refine(g, pi, v)
}

/// Whether every vertex of a class has the same number of neighbors in every
/// other class.
pub fn is_equitable(g: &ColoredGraph, col: &Coloring) -> bool {
    let n = g.vertex_count();
    let mut counts: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for c in col.colors() {
        let members = col.class(c);
        let mut reference: Option<BTreeMap<u32, u32>> = None;
        for &v in members {
            let mut sig: BTreeMap<u32, u32> = BTreeMap::new();
            for &w in g.neighbors(v) {
                *sig.entry(col.color_of(w)).or_insert(0) += 1;
            }
            match &reference {
                None => reference = Some(sig),
                Some(r) if *r != sig => return false,
                _ => {}
            }
        }
        if let Some(r) = reference {
            for (d, k) in r {
                counts.insert((c, d), k);
            }
        }
    }
    debug_assert!(counts.len() <= n * n);
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cycle(n: u32) -> ColoredGraph {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        ColoredGraph::from_edges(n as usize, &edges, vec![0; n as usize])
    }

    fn classes(col: &Coloring) -> Vec<Vec<u32>> {
        col.colors()
            .map(|c| {
                let mut m = col.class(c).to_vec();
                m.sort_unstable();
                m
            })
            .collect()
    }

    #[test]
    fn five_cycle_is_already_equitable() {
        let g = cycle(5);
        let r = refine_stable(&g, &Coloring::uniform(5));
        assert_eq!(r.coloring.class_count(), 1);
        assert!(r.new_singletons().is_empty());
    }

    #[test]
    fn path_splits_by_degree() {
        let g = ColoredGraph::from_edges(3, &[(0, 1), (1, 2)], vec![0; 3]);
        let r = refine_stable(&g, &Coloring::uniform(3));
        assert_eq!(classes(&r.coloring), vec![vec![0, 2], vec![1]]);
        assert_eq!(r.new_singletons(), &[1]);
        assert_eq!(r.fragments_of(0).unwrap(), vec![0, 2]);
    }

    #[test]
    fn individualized_five_cycle_matches_first_refinement_step() {
        let g = cycle(5);
        let base = refine_stable(&g, &Coloring::uniform(5)).coloring;
        let r = individualize_refine(&g, &base, 0);
        // fragments by ascending neighbor count: far vertices, then neighbors
        assert_eq!(classes(&r.coloring), vec![vec![0], vec![2, 3], vec![1, 4]]);
        assert_eq!(r.coloring.color_of(0), 0);
        assert_eq!(r.new_singletons(), &[0]);
        assert_eq!(r.fragments_of(0).unwrap(), vec![0, 1, 3]);
        assert!(is_equitable(&g, &r.coloring));
    }

    #[test]
    fn discrete_coloring_is_a_fixed_point() {
        let g = ColoredGraph::from_edges(3, &[(0, 1), (1, 2)], vec![0, 1, 2]);
        let base = refine_stable(&g, &Coloring::from_keys(&[0, 1, 2])).coloring;
        assert!(base.is_discrete());
        let r = individualize_refine(&g, &base, 1);
        assert!(r.coloring.same_partition(&base));
        assert!(r.new_singletons().is_empty());
        assert_eq!(r.fragments_of(1).unwrap(), vec![1]);
    }

    #[test]
    fn unknown_fragment_color() {
        let g = cycle(5);
        let base = refine_stable(&g, &Coloring::uniform(5)).coloring;
        let r = individualize_refine(&g, &base, 0);
        assert_eq!(r.fragments_of(3), Err(UnknownColor(3)));
        assert_eq!(r.fragments_of(7), Err(UnknownColor(7)));
    }

    #[test]
    fn discretize_then_refine() {
        let g = cycle(6);
        let base = Coloring::uniform(6);
        let r = Refiner::new().discretize_refine(&g, &base, &[0, 1]);
        assert!(r.coloring.is_discrete());
        assert!(is_equitable(&g, &r.coloring));
    }

    #[test]
    fn group_by_color_orders_by_id() {
        let g = cycle(5);
        let base = refine_stable(&g, &Coloring::uniform(5)).coloring;
        let r = individualize_refine(&g, &base, 2);
        let groups = group_by_color(&r.coloring, &[0, 1, 2, 3, 4]);
        let sizes: Vec<usize> = groups.iter().map(|g| g.1.len()).collect();
        assert_eq!(sizes, vec![1, 2, 2]);
        assert_eq!(groups[0].1, vec![2]);
    }

    #[test]
    fn recycled_copy_matches_fresh_clone() {
        let g = cycle(7);
        let mut r = Refiner::new();
        let base = r.refine_stable(&g, &initial_coloring(&g)).coloring;
        for v in 0..7 {
            let fresh = Refiner::new().individualize_refine(&g, &base, v).coloring;
            let report = r.individualize_refine(&g, &base, v);
            assert_eq!(report.coloring.order(), fresh.order());
            assert!(report.coloring.same_partition(&fresh));
            r.recycle(report, &base);
        }
        let spare = r.spare.take().unwrap();
        assert_eq!(spare.order(), base.order());
        assert!(spare.same_partition(&base));
        assert_eq!(spare.class_count(), base.class_count());
    }
}
