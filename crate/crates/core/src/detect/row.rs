use alloc::vec;
use alloc::vec::Vec;

use super::{lit, DetectFailure, DetectedStructure, Detector, RowStructure};
use crate::cnf::{transpose, Lit};
use crate::refine::{Coloring, RefinementReport};

impl<'a> Detector<'a> {
    /// Row interchangeability: the row of `v` is everything fixed by
    /// individualizing `v`.
    pub fn detect_row(&mut self, base: &Coloring, sigma: &[u32]) -> Result<DetectedStructure, DetectFailure> {
        self.row_impl(base, sigma, false)
    }

    /// Like [`Detector::detect_row`], but rows also collect blocks: fragments
    /// `c'` of a class `c` with `|c'| * |sigma| = |c|`.
    pub fn detect_row_blocks(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
    ) -> Result<DetectedStructure, DetectFailure> {
        self.row_impl(base, sigma, true)
    }

    fn row_impl(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
        blocks: bool,
    ) -> Result<DetectedStructure, DetectFailure> {
        if sigma.len() < 3 {
            return Err(DetectFailure::SizeGate);
        }
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(sigma.len());
        for &v in sigma {
            let report = self.ir(base, v);
            rows.push(self.candidate_row(base, &report, sigma.len(), blocks));
            self.release(report, base);
        }
        let len = rows[0].len();
        if rows.iter().any(|r| r.len() != len) {
            return Err(DetectFailure::UnequalRows);
        }
        let mut seen = vec![false; self.graph.literal_vertices() as usize];
        for &x in rows.iter().flatten() {
            if core::mem::replace(&mut seen[x as usize], true) {
                return Err(DetectFailure::OverlappingRows);
            }
        }
        let rows: Vec<Vec<Lit>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(lit).collect())
            .collect();
        let mut generators = Vec::with_capacity(rows.len() - 1);
        for pair in rows.windows(2) {
            let phi = transpose(&pair[0], &pair[1]).map_err(|_| DetectFailure::OverlappingRows)?;
            generators.push(self.verified(phi)?);
        }
        Ok(self.cover(DetectedStructure::Row(RowStructure {
            rows,
            generators,
            covered_colors: Vec::new(),
        })))
    }

    fn candidate_row(
        &mut self,
        base: &Coloring,
        report: &RefinementReport,
        sigma_len: usize,
        blocks: bool,
    ) -> Vec<u32> {
        let col = &report.coloring;
        let mut items: Vec<(u32, Vec<u32>)> = report
            .new_singletons()
            .iter()
            .filter(|&&s| self.graph.is_literal(s))
            .map(|&s| (col.color_of(s), vec![s]))
            .collect();
        if blocks {
            let split: Vec<u32> = report.split_colors().collect();
            for c in split {
                let size = base.class_size(c);
                if !self.graph.is_literal(base.class(c)[0]) || !size.is_multiple_of(sigma_len) {
                    continue;
                }
                let block = size / sigma_len;
                if block < 2 {
                    continue;
                }
                for f in report.fragments_of(c).unwrap_or_default() {
                    if col.class_size(f) == block {
                        items.push((f, col.class(f).to_vec()));
                    }
                }
            }
            items.sort_by_key(|item| item.0);
            // order block members; a block holding the negations of an
            // earlier block mirrors its order
            for i in 0..items.len() {
                if items[i].1.len() < 2 {
                    continue;
                }
                let mut negated: Vec<u32> = items[i].1.iter().map(|&x| x ^ 1).collect();
                negated.sort_unstable();
                let mirror = items[..i].iter().find(|(_, m)| {
                    let mut s = m.clone();
                    s.sort_unstable();
                    s == negated
                });
                let ordered = match mirror {
                    Some((_, m)) => m.iter().map(|&x| x ^ 1).collect(),
                    None => self.order_block(col, &items[i].1),
                };
                items[i].1 = ordered;
            }
        }
        items.sort_by_key(|item| item.0);
        items.into_iter().flat_map(|(_, m)| m).collect()
    }

    /// Orders a block by the colors it gets when its first member is
    /// individualized.
    fn order_block(&mut self, col: &Coloring, members: &[u32]) -> Vec<u32> {
        let report = self.ir(col, members[0]);
        let mut out = members.to_vec();
        out.sort_by_key(|&m| (report.coloring.color_of(m), col.position(m)));
        self.release(report, col);
        out
    }
}
