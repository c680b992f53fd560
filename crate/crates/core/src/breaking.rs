//! Symmetry-breaking clauses.
//!
//! All constraints enforce `theta^phi <=_lex theta` under one global variable
//! order, where `theta^phi(x) = theta(phi(x))`: every kept assignment is the
//! lexicographic maximum of its orbit restricted to the encoded prefix.

use alloc::vec;
use alloc::vec::Vec;

use crate::cnf::{Lit, LiteralPermutation};
use crate::detect::DetectedStructure;

/// A total order of the variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableOrder {
    order: Vec<u32>,
    rank: Vec<u32>,
    /// Length of the prefix owned by detected structures.
    structured: usize,
}

impl VariableOrder {
    /// `prefix` (duplicates ignored) followed by the remaining variables in
    /// ascending order.
    pub fn from_prefix<I: IntoIterator<Item = u32>>(prefix: I, num_vars: u32) -> VariableOrder {
        let mut rank = vec![u32::MAX; num_vars as usize];
        let mut order = Vec::with_capacity(num_vars as usize);
        for v in prefix {
            let r = &mut rank[(v - 1) as usize];
            if *r == u32::MAX {
                *r = order.len() as u32;
                order.push(v);
            }
        }
        let structured = order.len();
        for v in 1..=num_vars {
            if rank[(v - 1) as usize] == u32::MAX {
                rank[(v - 1) as usize] = order.len() as u32;
                order.push(v);
            }
        }
        VariableOrder {
            order,
            rank,
            structured,
        }
    }

    pub fn identity(num_vars: u32) -> VariableOrder {
        VariableOrder::from_prefix(core::iter::empty(), num_vars)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.order
    }

    pub fn rank(&self, var: u32) -> u32 {
        self.rank[(var - 1) as usize]
    }

    pub fn structured_len(&self) -> usize {
        self.structured
    }

    /// Moves `stabilized` variables (in that order) right behind the
    /// structure-owned prefix.
    pub fn with_stabilized(&self, stabilized: &[u32]) -> VariableOrder {
        let prefix: Vec<u32> = self.order[..self.structured]
            .iter()
            .copied()
            .chain(stabilized.iter().copied())
            .collect();
        let mut out = VariableOrder::from_prefix(prefix, self.order.len() as u32);
        out.structured = self.structured;
        out
    }
}

/// Variables of the structures in detection order: matrices row by row,
/// Johnson labels in lexicographic order of their pairs followed by the
/// attached blocks label by label.
pub fn build_order(structures: &[DetectedStructure], num_vars: u32) -> VariableOrder {
    let mut prefix: Vec<u32> = Vec::new();
    for s in structures {
        match s {
            DetectedStructure::Row(r) => prefix.extend(r.rows.iter().flatten().map(|l| l.var())),
            DetectedStructure::RowColumn(rc) => {
                prefix.extend(rc.matrix.iter().flatten().map(|l| l.var()))
            }
            DetectedStructure::Johnson(j) => {
                prefix.extend(j.labels.iter().map(|(l, _)| l.var()));
                for a in &j.attachments {
                    prefix.extend(a.blocks.iter().flatten().map(|l| l.var()));
                }
            }
        }
    }
    VariableOrder::from_prefix(prefix, num_vars)
}

/// Where a breaking clause came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Generator `generator` of structure `structure`.
    Structure { structure: usize, generator: usize },
    Remainder(usize),
    Binary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BreakingClauses {
    pub clauses: Vec<Vec<Lit>>,
    pub aux_count: u32,
    /// Source of each clause.
    pub sources: Vec<Source>,
}

impl BreakingClauses {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    fn push(&mut self, clause: Vec<Lit>, source: Source) {
        self.clauses.push(clause);
        self.sources.push(source);
    }

    pub fn extend(&mut self, other: BreakingClauses) {
        self.clauses.extend(other.clauses);
        self.sources.extend(other.sources);
        self.aux_count += other.aux_count;
    }
}

/// Lex-leader chain for `phi` over the first `max_len` of its support
/// variables. Auxiliary variables are numbered from `next_aux`.
pub fn lex_leader_encode(
    phi: &LiteralPermutation,
    order: &VariableOrder,
    next_aux: u32,
    max_len: usize,
    source: Source,
) -> BreakingClauses {
    let mut vars = phi.support_vars();
    vars.sort_by_key(|&v| order.rank(v));
    let positions: Vec<(Lit, Lit)> = vars
        .into_iter()
        .map(|v| (Lit::positive(v), phi.apply(Lit::positive(v))))
        .filter(|&(x, p)| x != p)
        .take(max_len)
        .collect();
    let mut out = BreakingClauses::default();
    let mut prev: Option<Lit> = None;
    let with_prev = |prev: Option<Lit>, rest: &[Lit]| -> Vec<Lit> {
        prev.map(|a| !a).into_iter().chain(rest.iter().copied()).collect()
    };
    for (i, &(x, p)) in positions.iter().enumerate() {
        if p == !x {
            out.push(with_prev(prev, &[x]), source);
            break;
        }
        out.push(with_prev(prev, &[!p, x]), source);
        if i + 1 == positions.len() {
            break;
        }
        let a = Lit::positive(next_aux + out.aux_count);
        out.aux_count += 1;
        out.push(with_prev(prev, &[x, a]), source);
        out.push(with_prev(prev, &[!p, a]), source);
        prev = Some(a);
    }
    out
}

/// Binary clauses along an approximate stabilizer chain of the group
/// generated by `gens`. Returns the clauses and the stabilized variables in
/// stabilization order.
pub fn binary_clause_heuristic(
    gens: &[LiteralPermutation],
    order: &VariableOrder,
) -> (BreakingClauses, Vec<u32>) {
    let num_vars = order.as_slice().len();
    let mut active: Vec<&LiteralPermutation> = gens.iter().filter(|g| !g.is_identity()).collect();
    let mut out = BreakingClauses::default();
    let mut stabilized = Vec::new();
    let mut parent: Vec<u32> = Vec::new();
    while !active.is_empty() {
        parent.clear();
        parent.extend(0..2 * num_vars as u32);
        for g in &active {
            for &(l, img) in g.pairs() {
                union(&mut parent, l.code(), img.code());
            }
        }
        let mut size = vec![0u32; 2 * num_vars];
        for c in 0..2 * num_vars as u32 {
            size[find(&mut parent, c) as usize] += 1;
        }
        let Some(&x) = order
            .as_slice()
            .iter()
            .find(|&&v| size[find(&mut parent, Lit::positive(v).code()) as usize] > 1)
        else {
            break;
        };
        let px = Lit::positive(x);
        let root = find(&mut parent, px.code());
        for c in 0..2 * num_vars as u32 {
            if c != px.code() && find(&mut parent, c) == root {
                let y = Lit::from_code(c);
                let clause = if y == !px { vec![px] } else { vec![px, !y] };
                out.push(clause, Source::Binary);
            }
        }
        stabilized.push(x);
        active.retain(|g| g.apply(px) == px);
    }
    (out, stabilized)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb) as usize] = ra.min(rb);
    }
}

/// The generators used for breaking a structure.
pub fn structure_generators(s: &DetectedStructure) -> &[LiteralPermutation] {
    s.generators()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{fix, transpose};

    fn swap12() -> LiteralPermutation {
        fix(&transpose(&[Lit::positive(1)], &[Lit::positive(2)]).unwrap()).unwrap()
    }

    fn lits(v: &[i64]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
    }

    #[test]
    fn order_fallback_and_prefix() {
        assert_eq!(VariableOrder::identity(3).as_slice(), &[1, 2, 3]);
        let o = VariableOrder::from_prefix([3, 1, 4, 2], 5);
        assert_eq!(o.as_slice(), &[3, 1, 4, 2, 5]);
        assert_eq!(o.rank(4), 2);
        assert_eq!(o.structured_len(), 4);
    }

    #[test]
    fn identity_needs_no_clauses() {
        let out = lex_leader_encode(&LiteralPermutation::identity(), &VariableOrder::identity(2), 3, 64, Source::Binary);
        assert!(out.is_empty());
        assert_eq!(out.aux_count, 0);
    }

    #[test]
    fn swap_chain_shape() {
        let out = lex_leader_encode(&swap12(), &VariableOrder::identity(2), 3, 64, Source::Remainder(0));
        assert_eq!(out.aux_count, 1);
        assert_eq!(
            out.clauses,
            vec![lits(&[-2, 1]), lits(&[1, 3]), lits(&[-2, 3]), lits(&[-3, -1, 2])]
        );
    }

    #[test]
    fn phase_flip_is_a_unit() {
        let flip = LiteralPermutation::from_pairs([
            (Lit::positive(1), Lit::negative(1)),
            (Lit::negative(1), Lit::positive(1)),
        ])
        .unwrap();
        let out = lex_leader_encode(&flip, &VariableOrder::identity(1), 2, 64, Source::Binary);
        assert_eq!(out.clauses, vec![lits(&[1])]);
        let (bin, stab) = binary_clause_heuristic(&[flip], &VariableOrder::identity(1));
        assert_eq!(bin.clauses, vec![lits(&[1])]);
        assert_eq!(stab, vec![1]);
    }

    #[test]
    fn three_cycle_binary_clauses() {
        let cycle = LiteralPermutation::from_pairs(
            [(1, 2), (2, 3), (3, 1)]
                .into_iter()
                .flat_map(|(a, b)| [(Lit::positive(a), Lit::positive(b)), (Lit::negative(a), Lit::negative(b))]),
        )
        .unwrap();
        let (bin, stab) = binary_clause_heuristic(&[cycle], &VariableOrder::identity(3));
        assert_eq!(bin.clauses, vec![lits(&[1, -2]), lits(&[1, -3])]);
        assert_eq!(stab, vec![1]);
        let (none, _) = binary_clause_heuristic(&[], &VariableOrder::identity(3));
        assert!(none.is_empty());
    }

    #[test]
    fn truncation_caps_positions() {
        let phi = fix(&transpose(&lits(&[1, 2, 3]), &lits(&[4, 5, 6])).unwrap()).unwrap();
        let out = lex_leader_encode(&phi, &VariableOrder::identity(6), 7, 2, Source::Binary);
        // two positions: order, two aux clauses, order
        assert_eq!(out.clauses.len(), 4);
        assert_eq!(out.aux_count, 1);
    }

    #[test]
    fn stabilized_move_behind_prefix() {
        let o = VariableOrder::from_prefix([5], 6).with_stabilized(&[3, 1]);
        assert_eq!(o.as_slice(), &[5, 3, 1, 2, 4, 6]);
        assert_eq!(o.structured_len(), 1);
    }
}
