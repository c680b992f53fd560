//! Structure detection on the model graph.
//!
//! Every detector works on a set `sigma` of literal vertices that is assumed
//! to be an orbit, individualizes members of it, reads off the resulting
//! fragments, and builds candidate permutations. A structure is returned only
//! if all of its generators are automorphisms of the formula.

mod johnson;
mod row;
mod row_column;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::cnf::{fix, Formula, Lit, LiteralPermutation};
use crate::graph::ColoredGraph;
use crate::refine::{group_by_color, Coloring, RefinementReport, Refiner};

pub use johnson::JohnsonAttachment;

/// Rows of literals that are freely interchangeable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowStructure {
    pub rows: Vec<Vec<Lit>>,
    /// Transpositions of consecutive rows.
    pub generators: Vec<LiteralPermutation>,
    pub covered_colors: Vec<u32>,
}

/// A matrix on which rows and columns can be permuted independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowColumnStructure {
    /// `matrix[r][c]`; the pivot sits in the last row and the first column.
    pub matrix: Vec<Vec<Lit>>,
    /// Column transpositions against column 0, then row transpositions
    /// against row 0.
    pub generators: Vec<LiteralPermutation>,
    pub covered_colors: Vec<u32>,
}

/// Literals labeled by 2-subsets of `1..=n`, acted on by `Sym(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JohnsonStructure {
    pub n: u32,
    /// `(literal, {i, j})` with `i < j`, sorted by label.
    pub labels: Vec<(Lit, [u32; 2])>,
    /// Literal blocks that move along with the labels.
    pub attachments: Vec<JohnsonAttachment>,
    /// Permutations induced by the label transpositions `(i, i + 1)`.
    pub generators: Vec<LiteralPermutation>,
    pub covered_colors: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectedStructure {
    Row(RowStructure),
    RowColumn(RowColumnStructure),
    Johnson(JohnsonStructure),
}

impl DetectedStructure {
    pub fn kind(&self) -> &'static str {
        match self {
            DetectedStructure::Row(_) => "row",
            DetectedStructure::RowColumn(_) => "row-column",
            DetectedStructure::Johnson(_) => "johnson",
        }
    }

    /// Rows and columns for matrices, the base-set size for Johnson groups.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            DetectedStructure::Row(s) => alloc::vec![s.rows.len(), s.rows.first().map_or(0, Vec::len)],
            DetectedStructure::RowColumn(s) => {
                alloc::vec![s.matrix.len(), s.matrix.first().map_or(0, Vec::len)]
            }
            DetectedStructure::Johnson(s) => alloc::vec![s.n as usize],
        }
    }

    pub fn generators(&self) -> &[LiteralPermutation] {
        match self {
            DetectedStructure::Row(s) => &s.generators,
            DetectedStructure::RowColumn(s) => &s.generators,
            DetectedStructure::Johnson(s) => &s.generators,
        }
    }

    pub fn covered_colors(&self) -> &[u32] {
        match self {
            DetectedStructure::Row(s) => &s.covered_colors,
            DetectedStructure::RowColumn(s) => &s.covered_colors,
            DetectedStructure::Johnson(s) => &s.covered_colors,
        }
    }

    fn covered_colors_mut(&mut self) -> &mut Vec<u32> {
        match self {
            DetectedStructure::Row(s) => &mut s.covered_colors,
            DetectedStructure::RowColumn(s) => &mut s.covered_colors,
            DetectedStructure::Johnson(s) => &mut s.covered_colors,
        }
    }

    /// All literals moved by some generator, ascending.
    pub fn support(&self) -> Vec<Lit> {
        let set: BTreeSet<Lit> = self
            .generators()
            .iter()
            .flat_map(|g| g.support())
            .collect();
        set.into_iter().collect()
    }
}

/// Why a detector gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DetectFailure {
    #[error("orbit too small or of the wrong size")]
    SizeGate,
    #[error("unexpected number of fragments")]
    FragmentCount,
    #[error("candidate rows overlap")]
    OverlappingRows,
    #[error("candidate rows differ in length")]
    UnequalRows,
    #[error("no fragment of the expected size")]
    MissingFragment,
    #[error("inconsistent matrix coordinates")]
    MalformedMatrix,
    #[error("no unique third singleton")]
    MissingSingleton,
    #[error("no fresh labels in an iteration")]
    NoFreshLabels,
    #[error("labels are not a bijection to 2-subsets")]
    NotBijective,
    #[error("a candidate permutation is not an automorphism")]
    Verification,
}

/// Detection context: formula, model graph and its stable coloring.
pub struct Detector<'a> {
    pub formula: &'a Formula,
    pub graph: &'a ColoredGraph,
    /// The stable coloring `covered_colors` refer to.
    pub stable: &'a Coloring,
    refiner: Refiner,
}

impl<'a> Detector<'a> {
    pub fn new(formula: &'a Formula, graph: &'a ColoredGraph, stable: &'a Coloring) -> Detector<'a> {
        Detector {
            formula,
            graph,
            stable,
            refiner: Refiner::new(),
        }
    }

    pub(crate) fn ir(&mut self, base: &Coloring, v: u32) -> RefinementReport {
        self.refiner.individualize_refine(self.graph, base, v)
    }

    /// Returns a spent report of `base` for reuse.
    pub(crate) fn release(&mut self, report: RefinementReport, base: &Coloring) {
        self.refiner.recycle(report, base);
    }

    pub(crate) fn ir_sequence(&mut self, base: &Coloring, vs: &[u32]) -> RefinementReport {
        self.refiner.individualize_sequence(self.graph, base, vs)
    }

    /// Applies `fix` and checks the result against the formula.
    pub(crate) fn verified(&self, phi: LiteralPermutation) -> Result<LiteralPermutation, DetectFailure> {
        let fixed = fix(&phi).map_err(|_| DetectFailure::Verification)?;
        if fixed.is_identity() || !self.formula.is_automorphism(&fixed) {
            return Err(DetectFailure::Verification);
        }
        Ok(fixed)
    }

    /// Stable colors of every literal moved by `structure` and of its negation.
    pub(crate) fn cover(&self, mut structure: DetectedStructure) -> DetectedStructure {
        let mut colors = BTreeSet::new();
        for l in structure.support() {
            colors.insert(self.stable.color_of(l.code()));
            colors.insert(self.stable.color_of((!l).code()));
        }
        *structure.covered_colors_mut() = colors.into_iter().collect();
        structure
    }

    /// The largest fragment of `sigma` after individualizing its first
    /// member, with the coloring it lives in. Ties go to the lower color id.
    pub fn largest_fragment(&mut self, base: &Coloring, sigma: &[u32]) -> Option<(Vec<u32>, Coloring)> {
        let &v = sigma.first()?;
        let report = self.ir(base, v);
        let groups = group_by_color(&report.coloring, sigma);
        let mut best: Option<Vec<u32>> = None;
        for (_, g) in groups {
            if best.as_ref().is_none_or(|b| g.len() > b.len()) {
                best = Some(g);
            }
        }
        let best = best?;
        if best.len() <= 1 {
            return None;
        }
        Some((best, report.coloring))
    }

    /// Reruns `detect` once on the largest fragment of `sigma` in the
    /// stabilizer of its first member.
    pub fn stabilizer_recursion<F>(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
        mut detect: F,
    ) -> Result<DetectedStructure, DetectFailure>
    where
        F: FnMut(&mut Self, &Coloring, &[u32]) -> Result<DetectedStructure, DetectFailure>,
    {
        let (fragment, coloring) = self
            .largest_fragment(base, sigma)
            .ok_or(DetectFailure::SizeGate)?;
        detect(self, &coloring, &fragment)
    }
}

pub(crate) fn lit(v: u32) -> Lit {
    Lit::from_code(v)
}

#[cfg(test)]
mod tests;
