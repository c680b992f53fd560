//! The model graph of a formula.
//!
//! Vertices `0..2n` are the literal codes, followed by one vertex per distinct
//! clause. Literals of the same variable are joined by an edge, and each clause
//! is joined to its literals. Restricted to the literal vertices, the
//! automorphisms of this colored graph are exactly the formula's symmetries.

use alloc::vec::Vec;

use crate::cnf::Formula;

/// Color key of literal vertices in the initial coloring.
pub const LITERAL_COLOR: u32 = 0;

/// An undirected vertex-colored graph in compressed adjacency form.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    initial_coloring: Vec<u32>,
    literal_vertices: u32,
}

impl ColoredGraph {
    /// Builds a graph from an edge list. Duplicate edges are collapsed;
    /// self-loops are rejected with a panic.
    pub fn from_edges(vertex_count: usize, edges: &[(u32, u32)], colors: Vec<u32>) -> ColoredGraph {
        assert_eq!(colors.len(), vertex_count);
        let mut degree = alloc::vec![0u32; vertex_count + 1];
        for &(u, v) in edges {
            assert_ne!(u, v, "self-loop");
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut acc = 0u32;
        for d in &degree[..vertex_count] {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut fill = offsets.clone();
        let mut neighbors = alloc::vec![0u32; acc as usize];
        for &(u, v) in edges {
            neighbors[fill[u as usize] as usize] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize] as usize] = u;
            fill[v as usize] += 1;
        }
        // sort and dedup each list, compacting in place
        let mut write = 0usize;
        let mut new_offsets = Vec::with_capacity(vertex_count + 1);
        for v in 0..vertex_count {
            let (lo, hi) = (offsets[v] as usize, offsets[v + 1] as usize);
            neighbors[lo..hi].sort_unstable();
            new_offsets.push(write as u32);
            let mut last = None;
            for i in lo..hi {
                let w = neighbors[i];
                if last != Some(w) {
                    neighbors[write] = w;
                    write += 1;
                    last = Some(w);
                }
            }
        }
        new_offsets.push(write as u32);
        neighbors.truncate(write);
        ColoredGraph {
            offsets: new_offsets,
            neighbors,
            initial_coloring: colors,
            literal_vertices: 0,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Color key of every vertex before refinement.
    pub fn initial_coloring(&self) -> &[u32] {
        &self.initial_coloring
    }

    /// Number of literal vertices; these are the ids `0..literal_vertices`.
    pub fn literal_vertices(&self) -> u32 {
        self.literal_vertices
    }

    #[inline]
    pub fn is_literal(&self, v: u32) -> bool {
        v < self.literal_vertices
    }

    /// All edges `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.vertex_count() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&w| u < w)
                .map(move |&w| (u, w))
        })
    }
}

/// Builds the model graph. Clause vertices are colored by clause length
/// (`1 + len`), literal vertices with [`LITERAL_COLOR`].
pub fn build_model_graph(formula: &Formula) -> ColoredGraph {
    let lits = formula.num_literals();
    let clauses = formula.clause_set();
    let n = lits + clauses.len();
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(
        formula.num_vars() as usize + clauses.iter().map(Vec::len).sum::<usize>(),
    );
    for var in 0..formula.num_vars() {
        edges.push((2 * var, 2 * var + 1));
    }
    let mut colors = alloc::vec![LITERAL_COLOR; n];
    for (i, clause) in clauses.iter().enumerate() {
        let cv = (lits + i) as u32;
        colors[cv as usize] = 1 + clause.len() as u32;
        for l in clause {
            edges.push((l.code(), cv));
        }
    }
    let mut g = ColoredGraph::from_edges(n, &edges, colors);
    g.literal_vertices = lits as u32;
    g
}
