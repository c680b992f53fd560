use std::collections::BTreeSet;

use symbreak_core::detect::{DetectFailure, DetectedStructure, Detector};
use symbreak_core::pipeline::{detect_all, Config};
use symbreak_core::refine::{initial_coloring, refine_stable, Coloring};
use symbreak_core::testkit::{clause_image_check, gen_cliquecolor, gen_php, gen_ramsey};
use symbreak_core::{build_model_graph, ColoredGraph, Formula, Lit, LiteralPermutation};

fn formula(num_vars: u32, clauses: &[&[i64]]) -> Formula {
    let clauses = clauses
        .iter()
        .map(|c| c.iter().map(|&d| Lit::from_dimacs(d).unwrap()).collect::<Vec<_>>());
    Formula::new(num_vars, clauses).unwrap()
}

fn setup(f: &Formula) -> (ColoredGraph, Coloring) {
    let g = build_model_graph(f);
    let pi = refine_stable(&g, &initial_coloring(&g)).coloring;
    (g, pi)
}

fn class_of(pi: &Coloring, l: Lit) -> Vec<u32> {
    pi.class(pi.color_of(l.code())).to_vec()
}

/// Every generator maps the clause multiset onto itself.
fn all_symmetries(f: &Formula, s: &DetectedStructure) -> bool {
    s.generators().iter().all(|g| f.is_automorphism(g) && clause_image_check(f, g))
}

/// The orbit of `start` under the group generated by `gens`.
fn orbit(gens: &[LiteralPermutation], start: Lit) -> BTreeSet<Lit> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(l) = stack.pop() {
        for g in gens {
            let img = g.apply(l);
            if seen.insert(img) {
                stack.push(img);
            }
        }
    }
    seen
}

/// Four interchangeable rows, each a rigid chain over five variables.
/// Variable `5 * i + j + 1` is column `j` of row `i`.
fn row_instance(rows: u32) -> Formula {
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for i in 0..rows as i64 {
        let x = |j: i64| 5 * i + j + 1;
        clauses.push(vec![x(0), x(1)]);
        clauses.push(vec![-x(1), x(2)]);
        clauses.push(vec![-x(2), x(3)]);
        clauses.push(vec![-x(3), x(4)]);
        clauses.push(vec![x(0), x(1), x(2), x(3), x(4)]);
    }
    let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
    formula(5 * rows, &refs)
}

/// Four rows `x_i` each owning an unordered pair `y_i0, y_i1`.
fn block_instance() -> Formula {
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for i in 0..4i64 {
        let (x, y0, y1) = (3 * i + 1, 3 * i + 2, 3 * i + 3);
        clauses.push(vec![x, y0]);
        clauses.push(vec![x, y1]);
        clauses.push(vec![-y0, -y1]);
    }
    let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
    formula(12, &refs)
}

#[test]
fn pure_row_symmetry_gives_a_full_matrix() {
    let f = row_instance(4);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 4);
    let s = Detector::new(&f, &g, &pi).detect_row(&pi, &sigma).unwrap();
    let DetectedStructure::Row(row) = &s else { panic!("expected rows, got {}", s.kind()) };
    assert_eq!(row.rows.len(), 4);
    // each row holds its five variables in both polarities
    for (i, r) in row.rows.iter().enumerate() {
        let vars: BTreeSet<u32> = r.iter().map(|l| l.var()).collect();
        assert_eq!(vars, (5 * i as u32 + 1..=5 * i as u32 + 5).collect());
        assert_eq!(r.len(), 10);
    }
    assert_eq!(s.generators().len(), 3);
    assert!(all_symmetries(&f, &s));
    let expected: BTreeSet<Lit> = (0..4).map(|i| Lit::positive(5 * i + 1)).collect();
    assert_eq!(orbit(s.generators(), Lit::positive(1)), expected);
}

#[test]
fn row_detection_needs_three_members() {
    let f = row_instance(2);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 2);
    let mut det = Detector::new(&f, &g, &pi);
    assert_eq!(det.detect_row(&pi, &sigma).unwrap_err(), DetectFailure::SizeGate);
    assert_eq!(det.detect_row_blocks(&pi, &sigma).unwrap_err(), DetectFailure::SizeGate);
}

/// Checks that no signed variable permutation other than the identity is a
/// symmetry, by enumeration.
fn has_trivial_group(f: &Formula) -> bool {
    let n = f.num_vars() as usize;
    let mut perm: Vec<u32> = (1..=n as u32).collect();
    let mut count = 0;
    loop {
        for signs in 0u32..1 << n {
            let pairs = (1..=n as u32).flat_map(|v| {
                let w = perm[v as usize - 1];
                let img = if signs >> (v - 1) & 1 == 1 { Lit::negative(w) } else { Lit::positive(w) };
                [(Lit::positive(v), img), (Lit::negative(v), !img)]
            });
            let phi = LiteralPermutation::from_pairs(pairs.filter(|(a, b)| a != b)).unwrap();
            if clause_image_check(f, &phi) {
                count += 1;
            }
        }
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    count == 1
}

#[test]
fn asymmetric_formula_fails_verification() {
    let f = formula(5, &[&[1, 2], &[-2, 3], &[-3, 4, 5], &[1, -5], &[2, 4], &[-1, -4, 5]]);
    assert!(has_trivial_group(&f));
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = [1, 2, 3].map(|v| Lit::positive(v).code()).to_vec();
    let mut det = Detector::new(&f, &g, &pi);
    assert_eq!(det.detect_row(&pi, &sigma).unwrap_err(), DetectFailure::Verification);
}

#[test]
fn blocks_travel_with_their_rows() {
    let f = block_instance();
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 4);
    assert_eq!(class_of(&pi, Lit::positive(2)).len(), 8);
    let mut det = Detector::new(&f, &g, &pi);
    // without blocks the pairs stay behind and the swaps are not symmetries
    assert_eq!(det.detect_row(&pi, &sigma).unwrap_err(), DetectFailure::Verification);
    let s = det.detect_row_blocks(&pi, &sigma).unwrap();
    let DetectedStructure::Row(row) = &s else { panic!() };
    assert_eq!(row.rows.len(), 4);
    for (i, r) in row.rows.iter().enumerate() {
        let vars: BTreeSet<u32> = r.iter().map(|l| l.var()).collect();
        assert_eq!(vars, BTreeSet::from([3 * i as u32 + 1, 3 * i as u32 + 2, 3 * i as u32 + 3]));
    }
    assert_eq!(s.generators().len(), 3);
    assert!(all_symmetries(&f, &s));
}

#[test]
fn block_detection_without_blocks_matches_plain_rows() {
    let f = row_instance(4);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    let mut det = Detector::new(&f, &g, &pi);
    let plain = det.detect_row(&pi, &sigma).unwrap();
    let blocks = det.detect_row_blocks(&pi, &sigma).unwrap();
    assert_eq!(plain.generators(), blocks.generators());
}

#[test]
fn stabilizer_recursion_finds_rows_in_the_large_fragment() {
    // two holes, four pigeons: one column is distinguished by the pivot and
    // the remaining three columns are interchangeable rows of length two
    let f = gen_php(4, 2);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 8);
    let mut det = Detector::new(&f, &g, &pi);
    assert!(det.detect_row(&pi, &sigma).is_err());
    let s = det
        .stabilizer_recursion(&pi, &sigma, |d, b, s| d.detect_row(b, s))
        .unwrap();
    assert_eq!(s.generators().len(), 2);
    assert!(all_symmetries(&f, &s));
    let moved: BTreeSet<u32> = s.generators().iter().flat_map(|g| g.support_vars()).collect();
    assert_eq!(moved.len(), 6);
}

#[test]
fn stabilizer_recursion_gives_up_on_singleton_fragments() {
    // the triangle: individualizing one edge leaves fragments of size one
    let f = gen_ramsey(3, 3, 3);
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = class_of(&pi, Lit::positive(1)).into_iter().filter(|v| v & 1 == 0).collect();
    assert_eq!(sigma.len(), 3);
    let mut det = Detector::new(&f, &g, &pi);
    let err = det
        .stabilizer_recursion(&pi, &sigma, |d, b, s| d.detect_row(b, s))
        .unwrap_err();
    assert_eq!(err, DetectFailure::SizeGate);
}

#[test]
fn row_column_on_php5() {
    let f = gen_php(5, 4);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 20);
    let s = Detector::new(&f, &g, &pi).detect_row_column(&pi, &sigma).unwrap();
    let dims: BTreeSet<usize> = s.dims().into_iter().collect();
    assert_eq!(dims, BTreeSet::from([5, 4]));
    assert_eq!(s.generators().len(), 7);
    assert!(all_symmetries(&f, &s));
    let DetectedStructure::RowColumn(rc) = &s else { panic!() };
    let cells: BTreeSet<Lit> = rc.matrix.iter().flatten().copied().collect();
    assert_eq!(cells.len(), 20);
    assert_eq!(orbit(s.generators(), Lit::positive(1)), cells);
}

#[test]
fn row_column_needs_three_rows() {
    let f = gen_php(3, 2);
    let (g, pi) = setup(&f);
    let sigma = class_of(&pi, Lit::positive(1));
    assert_eq!(sigma.len(), 6);
    assert!(Detector::new(&f, &g, &pi).detect_row_column(&pi, &sigma).is_err());
}

#[test]
fn johnson_on_ramsey8() {
    let f = gen_ramsey(3, 3, 8);
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = class_of(&pi, Lit::positive(1)).into_iter().filter(|v| v & 1 == 0).collect();
    assert_eq!(sigma.len(), 28);
    let s = Detector::new(&f, &g, &pi).detect_johnson(&pi, &sigma).unwrap();
    assert_eq!(s.dims(), vec![8]);
    assert_eq!(s.generators().len(), 7);
    assert!(all_symmetries(&f, &s));
    let DetectedStructure::Johnson(j) = &s else { panic!() };
    let pairs: BTreeSet<[u32; 2]> = j.labels.iter().map(|&(_, p)| p).collect();
    assert_eq!(pairs.len(), 28);
    assert!(pairs.iter().all(|&[a, b]| 1 <= a && a < b && b <= 8));
}

#[test]
fn johnson_size_gates() {
    let f = gen_ramsey(3, 3, 5);
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = class_of(&pi, Lit::positive(1)).into_iter().filter(|v| v & 1 == 0).collect();
    assert_eq!(sigma.len(), 10);
    let mut det = Detector::new(&f, &g, &pi);
    assert_eq!(det.detect_johnson(&pi, &sigma).unwrap_err(), DetectFailure::SizeGate);
    assert_eq!(det.detect_johnson(&pi, &sigma[..9]).unwrap_err(), DetectFailure::SizeGate);

    let f = gen_ramsey(3, 3, 9);
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = class_of(&pi, Lit::positive(1)).into_iter().filter(|v| v & 1 == 0).collect();
    let mut det = Detector::new(&f, &g, &pi);
    // 29 is not of the form C(n, 2)
    assert_eq!(det.detect_johnson(&pi, &sigma[..29]).unwrap_err(), DetectFailure::SizeGate);
}

#[test]
fn johnson_attaches_vertex_colors_on_cliquecolor() {
    let f = gen_cliquecolor(8, 3, 2);
    let (g, pi) = setup(&f);
    let found = detect_all(&f, &g, &pi, &Config::default());
    let johnson = found
        .iter()
        .find_map(|s| match s {
            DetectedStructure::Johnson(j) => Some(j),
            _ => None,
        })
        .expect("a Johnson structure");
    assert_eq!(johnson.n, 8);
    assert!(!johnson.attachments.is_empty());
    for a in &johnson.attachments {
        assert_eq!(a.blocks.len(), 8);
        assert!(a.blocks.iter().all(|b| b.len() == a.blocks[0].len()));
    }
    for s in &found {
        assert!(all_symmetries(&f, s));
    }
}
