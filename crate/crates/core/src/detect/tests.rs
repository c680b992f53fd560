use super::*;
use crate::graph::build_model_graph;
use crate::refine::{initial_coloring, refine_stable};
use crate::testkit::{gen_php, gen_ramsey};

fn setup(f: &Formula) -> (ColoredGraph, Coloring) {
    let g = build_model_graph(f);
    let pi = refine_stable(&g, &initial_coloring(&g)).coloring;
    (g, pi)
}

fn positive_class(pi: &Coloring, var: u32) -> Vec<u32> {
    pi.class(pi.color_of(Lit::positive(var).code())).to_vec()
}

#[test]
fn php5_row_column() {
    let f = gen_php(5, 4);
    let (g, pi) = setup(&f);
    let sigma = positive_class(&pi, 1);
    assert_eq!(sigma.len(), 20);
    let mut det = Detector::new(&f, &g, &pi);
    let s = det.detect_row_column(&pi, &sigma).unwrap();
    assert_eq!(s.dims(), alloc::vec![5, 4]);
    assert_eq!(s.generators().len(), 7);
    assert!(s.generators().iter().all(|p| f.is_automorphism(p)));
}

#[test]
fn ramsey8_johnson() {
    let f = gen_ramsey(3, 3, 8);
    let (g, pi) = setup(&f);
    let sigma: Vec<u32> = positive_class(&pi, 1).into_iter().filter(|v| v & 1 == 0).collect();
    assert_eq!(sigma.len(), 28);
    let mut det = Detector::new(&f, &g, &pi);
    let s = det.detect_johnson(&pi, &sigma).unwrap();
    assert_eq!(s.dims(), alloc::vec![8]);
    assert_eq!(s.generators().len(), 7);
}
