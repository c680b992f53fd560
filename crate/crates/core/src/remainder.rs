//! Budgeted automorphism search on the remainder coloring.
//!
//! Pairs of random individualization-refinement dives are run down to
//! discrete colorings; pairing the two leaves position by position gives a
//! candidate permutation, which is kept only if it is an automorphism of the
//! formula.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnf::{fix, Formula, Lit, LiteralPermutation};
use crate::graph::ColoredGraph;
use crate::refine::{Coloring, Refiner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub dive_pairs: u32,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            dive_pairs: 32,
            seed: 0,
        }
    }
}

/// Verified, nontrivial and pairwise distinct permutations found by random
/// dive pairs. `pi_rem` must be equitable.
pub fn find_remainder_generators(
    f: &Formula,
    g: &ColoredGraph,
    pi_rem: &Coloring,
    budget: SearchBudget,
) -> Vec<LiteralPermutation> {
    let mut out = Vec::new();
    if budget.dive_pairs == 0 || pi_rem.is_discrete() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut refiner = Refiner::new();
    let mut seen: BTreeSet<Vec<(Lit, Lit)>> = BTreeSet::new();
    for _ in 0..budget.dive_pairs {
        let a = dive(g, pi_rem, &mut refiner, &mut rng);
        let b = dive(g, pi_rem, &mut refiner, &mut rng);
        let Some(phi) = leaf_permutation(g, &a, &b) else {
            continue;
        };
        if phi.is_identity() || seen.contains(phi.pairs()) || !f.is_automorphism(&phi) {
            continue;
        }
        seen.insert(phi.pairs().to_vec());
        out.push(phi);
    }
    out
}

fn dive(g: &ColoredGraph, start: &Coloring, refiner: &mut Refiner, rng: &mut ChaCha8Rng) -> Coloring {
    let mut col = start.clone();
    while let Some(c) = col.first_nonsingleton() {
        let v = *col.class(c).choose(rng).expect("non-empty class");
        refiner.individualize_in_place(g, &mut col, v);
    }
    col
}

/// Maps the vertex at each position of `a` to the vertex at the same
/// position of `b`, restricted to literals.
fn leaf_permutation(g: &ColoredGraph, a: &Coloring, b: &Coloring) -> Option<LiteralPermutation> {
    let mut pairs = Vec::new();
    for (&x, &y) in a.order().iter().zip(b.order()) {
        if g.is_literal(x) != g.is_literal(y) {
            return None;
        }
        if g.is_literal(x) && x != y {
            pairs.push((Lit::from_code(x), Lit::from_code(y)));
        }
    }
    let phi = LiteralPermutation::from_pairs(pairs).ok()?;
    fix(&phi).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_model_graph;
    use crate::refine::{initial_coloring, refine_stable};
    use alloc::vec;

    fn search(f: &Formula, pairs: u32) -> Vec<LiteralPermutation> {
        let g = build_model_graph(f);
        let pi = refine_stable(&g, &initial_coloring(&g)).coloring;
        find_remainder_generators(f, &g, &pi, SearchBudget { dive_pairs: pairs, seed: 1 })
    }

    #[test]
    fn finds_a_variable_swap() {
        // only symmetry: swapping x1 and x2
        let f = Formula::new(
            3,
            [
                vec![Lit::positive(1), Lit::positive(2)],
                vec![Lit::negative(1), Lit::negative(2), Lit::positive(3)],
                vec![Lit::negative(3)],
            ],
        )
        .unwrap();
        let gens = search(&f, 8);
        assert!(!gens.is_empty());
        assert!(gens.iter().all(|p| f.is_automorphism(p)));
        assert_eq!(gens[0].support_vars(), vec![1, 2]);
    }

    #[test]
    fn zero_budget_is_empty() {
        let f = Formula::new(2, [vec![Lit::positive(1), Lit::positive(2)]]).unwrap();
        assert!(search(&f, 0).is_empty());
    }

    #[test]
    fn asymmetric_is_empty() {
        let f = Formula::new(
            3,
            [
                vec![Lit::positive(1)],
                vec![Lit::positive(1), Lit::positive(2)],
                vec![Lit::negative(2), Lit::positive(3), Lit::positive(1)],
            ],
        )
        .unwrap();
        assert!(search(&f, 16).is_empty());
    }
}
