//! Instance generators for benchmark families and brute-force oracles.
//!
//! Variable numbering:
//! - `php(n, m)`: `p(i, j)` is variable `(i - 1) * m + j`.
//! - `ramsey(k, s, n)`: edge `{u, v}` with `u < v` numbered in lexicographic
//!   order starting at 1.
//! - `cliquecolor(n, k, c)`: edges as in ramsey, then `q(i, v)` for slot `i`
//!   and vertex `v` (slot-major), then `x(v, j)` for vertex `v` and color `j`
//!   (vertex-major).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cnf::{Formula, Lit, LiteralPermutation};
use crate::graph::ColoredGraph;

/// A generated instance family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceSpec {
    Php { pigeons: u32, holes: u32 },
    Ramsey { k: u32, s: u32, n: u32 },
    CliqueColor { n: u32, k: u32, c: u32 },
}

impl InstanceSpec {
    pub fn generate(self) -> Formula {
        match self {
            InstanceSpec::Php { pigeons, holes } => gen_php(pigeons, holes),
            InstanceSpec::Ramsey { k, s, n } => gen_ramsey(k, s, n),
            InstanceSpec::CliqueColor { n, k, c } => gen_cliquecolor(n, k, c),
        }
    }
}

/// Pigeonhole formula: `n` pigeons into `m` holes.
pub fn gen_php(n: u32, m: u32) -> Formula {
    let p = |i: u32, j: u32| (i - 1) * m + j;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    for i in 1..=n {
        clauses.push((1..=m).map(|j| Lit::positive(p(i, j))).collect());
    }
    for j in 1..=m {
        for i in 1..=n {
            for k in i + 1..=n {
                clauses.push(vec![Lit::negative(p(i, j)), Lit::negative(p(k, j))]);
            }
        }
    }
    Formula::new(n * m, clauses).expect("php variables in range")
}

/// Variable of edge `{u, v}` (1-based vertices, `u != v`) on `n` vertices.
pub fn edge_var(n: u32, u: u32, v: u32) -> u32 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    // edges with smaller first endpoint come first
    let before: u32 = (1..a).map(|x| n - x).sum();
    before + (b - a)
}

/// All `k`-subsets of `1..=n` in lexicographic order.
pub fn subsets(n: u32, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::with_capacity(k as usize);
    fn rec(start: u32, n: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k as usize {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            rec(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(1, n, k, &mut cur, &mut out);
    out
}

/// Ramsey formula: 2-colorings of the edges of `K_n` with no red `K_k` and
/// no blue `K_s`.
pub fn gen_ramsey(k: u32, s: u32, n: u32) -> Formula {
    let vars = n * (n - 1) / 2;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    for set in subsets(n, k) {
        clauses.push(pairs_of(&set).map(|(u, v)| Lit::negative(edge_var(n, u, v))).collect());
    }
    for set in subsets(n, s) {
        clauses.push(pairs_of(&set).map(|(u, v)| Lit::positive(edge_var(n, u, v))).collect());
    }
    Formula::new(vars, clauses).expect("ramsey variables in range")
}

fn pairs_of(set: &[u32]) -> impl Iterator<Item = (u32, u32)> + '_ {
    (0..set.len()).flat_map(move |i| (i + 1..set.len()).map(move |j| (set[i], set[j])))
}

/// Clique-coloring formula: a graph on `n` vertices containing a `k`-clique
/// that is properly `c`-colorable.
pub fn gen_cliquecolor(n: u32, k: u32, c: u32) -> Formula {
    let edges = n * (n - 1) / 2;
    let q = |i: u32, v: u32| edges + (i - 1) * n + v;
    let x = |v: u32, j: u32| edges + k * n + (v - 1) * c + j;
    let e = |u: u32, v: u32| edge_var(n, u, v);
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    for i in 1..=k {
        clauses.push((1..=n).map(|v| Lit::positive(q(i, v))).collect());
    }
    for i in 1..=k {
        for u in 1..=n {
            for v in u + 1..=n {
                clauses.push(vec![Lit::negative(q(i, u)), Lit::negative(q(i, v))]);
            }
        }
    }
    for i in 1..=k {
        for i2 in i + 1..=k {
            for v in 1..=n {
                clauses.push(vec![Lit::negative(q(i, v)), Lit::negative(q(i2, v))]);
            }
            for u in 1..=n {
                for v in 1..=n {
                    if u != v {
                        clauses.push(vec![
                            Lit::negative(q(i, u)),
                            Lit::negative(q(i2, v)),
                            Lit::positive(e(u, v)),
                        ]);
                    }
                }
            }
        }
    }
    for v in 1..=n {
        clauses.push((1..=c).map(|j| Lit::positive(x(v, j))).collect());
    }
    for u in 1..=n {
        for v in u + 1..=n {
            for j in 1..=c {
                clauses.push(vec![
                    Lit::negative(e(u, v)),
                    Lit::negative(x(u, j)),
                    Lit::negative(x(v, j)),
                ]);
            }
        }
    }
    Formula::new(edges + k * n + n * c, clauses).expect("cliquecolor variables in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("instance size {size} exceeds the oracle cap {cap}")]
pub struct CapExceeded {
    pub size: usize,
    pub cap: usize,
}

/// Satisfiability by enumerating every assignment.
pub fn brute_force_sat(f: &Formula, var_cap: usize) -> Result<bool, CapExceeded> {
    let n = f.num_vars() as usize;
    if n > var_cap {
        return Err(CapExceeded { size: n, cap: var_cap });
    }
    let clauses: Vec<(u64, u64)> = f.clause_set().iter().map(|c| masks(c)).collect();
    Ok((0u64..1 << n).any(|theta| clauses.iter().all(|&(pos, neg)| theta & pos != 0 || !theta & neg != 0)))
}

fn masks(clause: &[Lit]) -> (u64, u64) {
    let mut pos = 0u64;
    let mut neg = 0u64;
    for l in clause {
        let bit = 1u64 << (l.var() - 1);
        if l.is_negative() {
            neg |= bit;
        } else {
            pos |= bit;
        }
    }
    (pos, neg)
}

/// Satisfiability of `f` where only the first `projected` variables are
/// enumerated and the rest are existentially quantified.
///
/// For every assignment of the projected variables that satisfies the clauses
/// over them alone, the residual formula over the remaining variables is
/// decided by [`dpll_count`].
pub fn brute_force_sat_projected(
    f: &Formula,
    projected: u32,
    var_cap: usize,
) -> Result<bool, CapExceeded> {
    let p = projected as usize;
    if p > var_cap {
        return Err(CapExceeded { size: p, cap: var_cap });
    }
    let (inner, outer): (Vec<&Vec<Lit>>, Vec<&Vec<Lit>>) =
        f.clause_set().iter().partition(|c| c.iter().all(|l| l.var() <= projected));
    let inner: Vec<(u64, u64)> = inner.iter().map(|c| masks(c)).collect();
    let extra = f.num_vars() - projected;
    for theta in 0u64..1 << p {
        if !inner.iter().all(|&(pos, neg)| theta & pos != 0 || !theta & neg != 0) {
            continue;
        }
        let value = |l: Lit| (theta >> (l.var() - 1)) & 1 == 1 && !l.is_negative()
            || (theta >> (l.var() - 1)) & 1 == 0 && l.is_negative();
        let mut residual: Vec<Vec<Lit>> = Vec::new();
        let mut dead = false;
        for c in &outer {
            if c.iter().any(|&l| l.var() <= projected && value(l)) {
                continue;
            }
            let rest: Vec<Lit> = c
                .iter()
                .filter(|l| l.var() > projected)
                .map(|l| {
                    let v = l.var() - projected;
                    if l.is_negative() {
                        Lit::negative(v)
                    } else {
                        Lit::positive(v)
                    }
                })
                .collect();
            if rest.is_empty() {
                dead = true;
                break;
            }
            residual.push(rest);
        }
        if dead {
            continue;
        }
        let g = Formula::new(extra, residual).expect("residual variables in range");
        if dpll_count(&g).sat {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Outcome of [`dpll_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpllOutcome {
    pub sat: bool,
    pub decisions: u64,
}

/// Plain DPLL with unit propagation, ascending variable order and positive
/// polarity first. Returns the number of branching decisions.
pub fn dpll_count(f: &Formula) -> DpllOutcome {
    dpll_count_interruptible(f, &mut |_| false).expect("never interrupted")
}

/// [`dpll_count`] that polls `stop` with the current decision count every
/// 1024 decisions and gives up (returning `None`) when it answers `true`.
pub fn dpll_count_interruptible(
    f: &Formula,
    stop: &mut dyn FnMut(u64) -> bool,
) -> Option<DpllOutcome> {
    Dpll::new(f).map_or(
        Some(DpllOutcome {
            sat: false,
            decisions: 0,
        }),
        |mut s| s.solve(stop),
    )
}

const UNASSIGNED: u8 = 2;

struct Dpll {
    n: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    value: Vec<u8>,
    trail: Vec<Lit>,
    head: usize,
    // (trail length before the decision, decided literal, already flipped)
    levels: Vec<(usize, Lit, bool)>,
    next_var: usize,
    units: Vec<Lit>,
}

impl Dpll {
    /// `None` when the formula contains the empty clause.
    fn new(f: &Formula) -> Option<Dpll> {
        let n = f.num_vars() as usize;
        let mut s = Dpll {
            n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![UNASSIGNED; n],
            trail: Vec::with_capacity(n),
            head: 0,
            levels: Vec::new(),
            next_var: 0,
            units: Vec::new(),
        };
        for c in f.clause_set() {
            match c.len() {
                0 => return None,
                1 => s.units.push(c[0]),
                _ => {
                    let id = s.clauses.len() as u32;
                    s.watches[c[0].index()].push(id);
                    s.watches[c[1].index()].push(id);
                    s.clauses.push(c.clone());
                }
            }
        }
        Some(s)
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> u8 {
        let v = self.value[(l.var() - 1) as usize];
        if v == UNASSIGNED {
            v
        } else {
            v ^ l.is_negative() as u8
        }
    }

    fn assign(&mut self, l: Lit) {
        self.value[(l.var() - 1) as usize] = !l.is_negative() as u8;
        self.trail.push(l);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let p = self.trail[self.head];
            self.head += 1;
            let falsified = !p;
            let mut list = core::mem::take(&mut self.watches[falsified.index()]);
            let mut i = 0;
            let mut conflict = false;
            while i < list.len() {
                let cid = list[i] as usize;
                let clause = &mut self.clauses[cid];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_value = {
                    let v = self.value[(other.var() - 1) as usize];
                    if v == UNASSIGNED {
                        v
                    } else {
                        v ^ other.is_negative() as u8
                    }
                };
                if other_value == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.value[(l.var() - 1) as usize];
                    if v == UNASSIGNED || v ^ l.is_negative() as u8 == 1 {
                        clause.swap(1, k);
                        self.watches[clause[1].index()].push(cid as u32);
                        list.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if other_value == 0 {
                    conflict = true;
                    break;
                }
                self.assign(other);
                i += 1;
            }
            // moved watches never land on a false literal, so the list was left empty
            self.watches[falsified.index()] = list;
            if conflict {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().expect("non-empty trail");
            let v = (l.var() - 1) as usize;
            self.value[v] = UNASSIGNED;
            if v < self.next_var {
                self.next_var = v;
            }
        }
        self.head = len;
    }

    fn solve(&mut self, stop: &mut dyn FnMut(u64) -> bool) -> Option<DpllOutcome> {
        let mut decisions = 0u64;
        let units = core::mem::take(&mut self.units);
        for l in units {
            match self.lit_value(l) {
                0 => {
                    return Some(DpllOutcome {
                        sat: false,
                        decisions,
                    })
                }
                1 => {}
                _ => self.assign(l),
            }
        }
        loop {
            if !self.propagate() {
                loop {
                    match self.levels.pop() {
                        None => {
                            return Some(DpllOutcome {
                                sat: false,
                                decisions,
                            })
                        }
                        Some((len, lit, flipped)) => {
                            if flipped {
                                continue;
                            }
                            self.undo_to(len);
                            self.levels.push((len, !lit, true));
                            self.assign(!lit);
                            break;
                        }
                    }
                }
                continue;
            }
            while self.next_var < self.n && self.value[self.next_var] != UNASSIGNED {
                self.next_var += 1;
            }
            if self.next_var == self.n {
                return Some(DpllOutcome {
                    sat: true,
                    decisions,
                });
            }
            decisions += 1;
            if decisions.is_multiple_of(1024) && stop(decisions) {
                return None;
            }
            let l = Lit::positive(self.next_var as u32 + 1);
            self.levels.push((self.trail.len(), l, false));
            self.assign(l);
        }
    }
}

/// All permutations of the vertices preserving the initial coloring and the
/// adjacency, as image arrays.
pub fn brute_force_automorphisms(
    g: &ColoredGraph,
    colors: &[u32],
    cap: usize,
) -> Result<Vec<Vec<u32>>, CapExceeded> {
    let n = g.vertex_count();
    if n > cap {
        return Err(CapExceeded { size: n, cap });
    }
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adj[u as usize][v as usize] = true;
        adj[v as usize][u as usize] = true;
    }
    let mut out = Vec::new();
    let mut image = vec![u32::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        v: usize,
        n: usize,
        colors: &[u32],
        adj: &[Vec<bool>],
        image: &mut Vec<u32>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if v == n {
            out.push(image.clone());
            return;
        }
        for w in 0..n {
            if used[w] || colors[w] != colors[v] {
                continue;
            }
            if (0..v).any(|u| adj[u][v] != adj[image[u] as usize][w]) {
                continue;
            }
            image[v] = w as u32;
            used[w] = true;
            rec(v + 1, n, colors, adj, image, used, out);
            used[w] = false;
        }
    }
    rec(0, n, colors, &adj, &mut image, &mut used, &mut out);
    Ok(out)
}

/// Whether applying `phi` to every clause of the clause set yields the clause
/// set again, compared as sorted multisets.
pub fn clause_image_check(f: &Formula, phi: &LiteralPermutation) -> bool {
    let mut original: Vec<Vec<Lit>> = f.clause_set().to_vec();
    let mut image: Vec<Vec<Lit>> = original
        .iter()
        .map(|c| {
            let mut d: Vec<Lit> = c.iter().map(|&l| phi.apply(l)).collect();
            d.sort_unstable();
            d
        })
        .collect();
    original.sort_unstable();
    image.sort_unstable();
    original == image
}

/// Random formula with `vars` variables and `clauses` clauses of length
/// `1..=max_len`.
pub fn random_formula<R: Rng>(rng: &mut R, vars: u32, clauses: usize, max_len: usize) -> Formula {
    let cs: Vec<Vec<Lit>> = (0..clauses)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| {
                    let v = rng.gen_range(1..=vars);
                    if rng.gen_bool(0.5) {
                        Lit::negative(v)
                    } else {
                        Lit::positive(v)
                    }
                })
                .collect()
        })
        .collect();
    Formula::new(vars, cs).expect("random variables in range")
}

/// Random simple graph on `n` vertices with edge probability `p` and
/// initial colors drawn from `0..colors`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64, colors: u32) -> ColoredGraph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let keys = (0..n).map(|_| rng.gen_range(0..colors.max(1))).collect();
    ColoredGraph::from_edges(n, &edges, keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::transpose;
    use crate::graph::build_model_graph;

    #[test]
    fn php_sizes_and_ground_truth() {
        let f = gen_php(5, 4);
        assert_eq!((f.num_vars(), f.clauses().len()), (20, 45));
        let tiny = gen_php(2, 1);
        assert_eq!(tiny.clauses().len(), 3);
        assert_eq!(brute_force_sat(&tiny, 20), Ok(false));
        for n in 2..=4 {
            assert_eq!(brute_force_sat(&gen_php(n, n), 20), Ok(true));
            assert_eq!(brute_force_sat(&gen_php(n + 1, n), 20), Ok(false));
        }
    }

    #[test]
    fn ramsey_sizes_and_ground_truth() {
        let f = gen_ramsey(3, 3, 6);
        assert_eq!((f.num_vars(), f.clauses().len()), (15, 40));
        assert_eq!(brute_force_sat(&f, 20), Ok(false));
        assert_eq!(brute_force_sat(&gen_ramsey(3, 3, 5), 20), Ok(true));
        assert_eq!(gen_ramsey(3, 3, 8).num_vars(), 28);
    }

    #[test]
    fn edge_numbering_is_lexicographic() {
        let mut expected = 1;
        for u in 1..=6 {
            for v in u + 1..=6 {
                assert_eq!(edge_var(6, u, v), expected);
                assert_eq!(edge_var(6, v, u), expected);
                expected += 1;
            }
        }
    }

    #[test]
    fn cliquecolor_ground_truth() {
        assert_eq!(brute_force_sat(&gen_cliquecolor(3, 3, 2), 20), Ok(false));
        let f = gen_cliquecolor(3, 3, 3);
        assert_eq!(dpll_count(&f).sat, true);
        assert_eq!(gen_cliquecolor(10, 3, 2).num_vars(), 45 + 30 + 20);
    }

    #[test]
    fn brute_force_basics() {
        let contradiction = Formula::new(1, [vec![Lit::positive(1)], vec![Lit::negative(1)]]).unwrap();
        assert_eq!(brute_force_sat(&contradiction, 20), Ok(false));
        let empty = Formula::new(0, Vec::<Vec<Lit>>::new()).unwrap();
        assert_eq!(brute_force_sat(&empty, 20), Ok(true));
        assert_eq!(brute_force_sat(&gen_php(4, 3), 20), Ok(false));
        assert!(brute_force_sat(&gen_php(5, 5), 20).is_err());
    }

    #[test]
    fn dpll_basics() {
        let unit = Formula::new(1, [vec![Lit::positive(1)]]).unwrap();
        assert_eq!(dpll_count(&unit), DpllOutcome { sat: true, decisions: 0 });
        let empty = Formula::new(0, Vec::<Vec<Lit>>::new()).unwrap();
        assert_eq!(dpll_count(&empty), DpllOutcome { sat: true, decisions: 0 });
        assert!(!dpll_count(&gen_php(5, 4)).sat);
        assert!(dpll_count(&gen_php(4, 4)).sat);
    }

    #[test]
    fn dpll_agrees_with_enumeration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let f = random_formula(&mut rng, 8, 30, 3);
            assert_eq!(dpll_count(&f).sat, brute_force_sat(&f, 20).unwrap());
        }
    }

    #[test]
    fn projected_sat_matches_plain() {
        let f = Formula::new(3, [vec![Lit::positive(1), Lit::positive(3)], vec![Lit::negative(3)]]).unwrap();
        assert_eq!(brute_force_sat_projected(&f, 2, 20), Ok(true));
        let g = Formula::new(
            3,
            [
                vec![Lit::positive(1), Lit::positive(3)],
                vec![Lit::negative(3)],
                vec![Lit::negative(1)],
            ],
        )
        .unwrap();
        assert_eq!(brute_force_sat_projected(&g, 2, 20), Ok(false));
    }

    #[test]
    fn automorphism_enumeration() {
        let cycle: Vec<(u32, u32)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let g = ColoredGraph::from_edges(5, &cycle, vec![0; 5]);
        assert_eq!(brute_force_automorphisms(&g, &[0; 5], 8).unwrap().len(), 10);
        assert_eq!(brute_force_automorphisms(&g, &[0, 1, 2, 3, 4], 8).unwrap().len(), 1);
        let pair = ColoredGraph::from_edges(2, &[], vec![0; 2]);
        assert_eq!(brute_force_automorphisms(&pair, &[0, 0], 8).unwrap().len(), 2);
    }

    #[test]
    fn php4_row_transposition_passes_full_image_check() {
        let f = gen_php(4, 3);
        let row = |i: u32| -> Vec<Lit> {
            (1..=3)
                .flat_map(|j| [Lit::positive((i - 1) * 3 + j), Lit::negative((i - 1) * 3 + j)])
                .collect()
        };
        let phi = transpose(&row(1), &row(2)).unwrap();
        assert!(f.is_automorphism(&phi));
        assert!(clause_image_check(&f, &phi));
        let _ = build_model_graph(&f);
    }
}
