use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use symbreak_core::refine::{initial_coloring, is_equitable, Coloring, Refiner};
use symbreak_core::testkit::{brute_force_automorphisms, random_graph};
use symbreak_core::ColoredGraph;

fn graph(seed: u64, n: usize, p: f64, colors: u32) -> ColoredGraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, p, colors)
}

/// The same graph with vertex `v` renamed to `perm[v]`.
fn relabel(g: &ColoredGraph, perm: &[u32]) -> ColoredGraph {
    let edges: Vec<(u32, u32)> = g.edges().map(|(u, v)| (perm[u as usize], perm[v as usize])).collect();
    let mut colors = vec![0; g.vertex_count()];
    for v in 0..g.vertex_count() {
        colors[perm[v] as usize] = g.initial_coloring()[v];
    }
    ColoredGraph::from_edges(g.vertex_count(), &edges, colors)
}

fn shuffled(n: usize, seed: u64) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

fn within(fine: &Coloring, coarse: &Coloring) -> bool {
    (0..fine.vertex_count() as u32).all(|v| {
        let c = coarse.color_of(v);
        let f = fine.color_of(v);
        f >= c && (f as usize) < c as usize + coarse.class_size(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stable_coloring_is_equitable_and_finer(seed in any::<u64>(), n in 1usize..40, p in 0.05f64..0.6, k in 1u32..4) {
        let g = graph(seed, n, p, k);
        let pi = initial_coloring(&g);
        let out = Refiner::new().refine_stable(&g, &pi).coloring;
        prop_assert!(is_equitable(&g, &out));
        prop_assert!(within(&out, &pi));
    }

    #[test]
    fn refinement_commutes_with_relabeling(seed in any::<u64>(), n in 2usize..30, p in 0.05f64..0.6, k in 1u32..3) {
        let g = graph(seed, n, p, k);
        let perm = shuffled(n, seed ^ 0x9e37);
        let h = relabel(&g, &perm);
        let mut r = Refiner::new();
        let a = r.refine_stable(&g, &initial_coloring(&g)).coloring;
        let b = r.refine_stable(&h, &initial_coloring(&h)).coloring;
        for v in 0..n {
            prop_assert_eq!(a.color_of(v as u32), b.color_of(perm[v]));
        }
        let v = (seed % n as u64) as u32;
        let ia = r.individualize_refine(&g, &a, v).coloring;
        let ib = r.individualize_refine(&h, &b, perm[v as usize]).coloring;
        for u in 0..n {
            prop_assert_eq!(ia.color_of(u as u32), ib.color_of(perm[u]));
        }
    }

    #[test]
    fn individualization_refines_and_isolates(seed in any::<u64>(), n in 2usize..40, p in 0.05f64..0.6) {
        let g = graph(seed, n, p, 2);
        let mut r = Refiner::new();
        let base = r.refine_stable(&g, &initial_coloring(&g)).coloring;
        let v = (seed % n as u64) as u32;
        let report = r.individualize_refine(&g, &base, v);
        let col = &report.coloring;
        prop_assert_eq!(col.class_size(col.color_of(v)), 1);
        prop_assert!(is_equitable(&g, col));
        prop_assert!(within(col, &base));
        for &s in report.new_singletons() {
            prop_assert_eq!(col.class_size(col.color_of(s)), 1);
            prop_assert!(base.class_size(base.color_of(s)) > 1);
        }
    }

    #[test]
    fn recycled_scratch_matches_fresh_results(seed in any::<u64>(), n in 2usize..40, p in 0.05f64..0.6) {
        let g = graph(seed, n, p, 2);
        let mut r = Refiner::new();
        let base = r.refine_stable(&g, &initial_coloring(&g)).coloring;
        for v in shuffled(n, seed).into_iter().take(8) {
            let fresh = Refiner::new().individualize_refine(&g, &base, v).coloring;
            let report = r.individualize_refine(&g, &base, v);
            prop_assert_eq!(report.coloring.order(), fresh.order());
            prop_assert!(report.coloring.same_partition(&fresh));
            r.recycle(report, &base);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // refinement never splits an orbit
    #[test]
    fn stable_colors_are_unions_of_orbits(seed in any::<u64>(), n in 1usize..8, p in 0.1f64..0.7, k in 1u32..3) {
        let g = graph(seed, n, p, k);
        let col = Refiner::new().refine_stable(&g, &initial_coloring(&g)).coloring;
        let autos = brute_force_automorphisms(&g, g.initial_coloring(), 8).unwrap();
        prop_assert!(!autos.is_empty());
        for a in &autos {
            for v in 0..n {
                prop_assert_eq!(col.color_of(v as u32), col.color_of(a[v]));
            }
        }
    }
}

#[test]
fn vertex_transitive_graph_stays_uniform() {
    // the 3-cube: every vertex looks the same, so nothing splits
    let edges: Vec<(u32, u32)> = (0..8u32)
        .flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b))))
        .filter(|&(u, v)| u < v)
        .collect();
    let g = ColoredGraph::from_edges(8, &edges, vec![0; 8]);
    let col = Refiner::new().refine_stable(&g, &initial_coloring(&g)).coloring;
    assert_eq!(col.class_count(), 1);
    let ir = Refiner::new().individualize_refine(&g, &col, 0).coloring;
    // distance classes from vertex 0: sizes 1, 3, 3, 1
    let mut sizes: Vec<usize> = ir.colors().map(|c| ir.class_size(c)).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 1, 3, 3]);
}
