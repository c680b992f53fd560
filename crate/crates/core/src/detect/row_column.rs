use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{lit, DetectFailure, DetectedStructure, Detector, RowColumnStructure};
use crate::cnf::{transpose, Lit};
use crate::refine::{group_by_color, Coloring};

impl<'a> Detector<'a> {
    /// Row-column symmetry. Individualizing the pivot `v` splits `sigma` into
    /// `{v}`, the rest of its row, the rest of its column and everything
    /// else; individualizing the members of the row and column of `v` then
    /// gives every literal its coordinates.
    pub fn detect_row_column(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
    ) -> Result<DetectedStructure, DetectFailure> {
        let &v = sigma.first().ok_or(DetectFailure::SizeGate)?;
        let pivot = self.ir(base, v);
        let mut groups: Vec<(u32, Vec<u32>)> = group_by_color(&pivot.coloring, sigma);
        self.release(pivot, base);
        if groups.len() != 4 {
            return Err(DetectFailure::FragmentCount);
        }
        groups.retain(|(_, g)| g[0] != v || g.len() != 1);
        if groups.len() != 3 {
            return Err(DetectFailure::FragmentCount);
        }
        groups.sort_by_key(|(c, g)| (g.len(), *c));
        let sigma1 = groups[0].1.clone();
        let sigma2 = groups[1].1.clone();

        // coordinates: row label and column label per literal
        let mut row: BTreeMap<u32, u32> = BTreeMap::new();
        let mut col: BTreeMap<u32, u32> = BTreeMap::new();
        let assign = |map: &mut BTreeMap<u32, u32>, x: u32, label: u32| -> Result<(), DetectFailure> {
            match map.insert(x, label) {
                Some(old) if old != label => Err(DetectFailure::MalformedMatrix),
                _ => Ok(()),
            }
        };
        assign(&mut row, v, v)?;
        assign(&mut col, v, v)?;
        for &r in &sigma1 {
            assign(&mut row, r, v)?;
            assign(&mut col, r, r)?;
            for t in self.coordinate_fragment(base, sigma, r, v, sigma2.len())? {
                assign(&mut col, t, r)?;
            }
        }
        for &c in &sigma2 {
            assign(&mut col, c, v)?;
            assign(&mut row, c, c)?;
            for t in self.coordinate_fragment(base, sigma, c, v, sigma1.len())? {
                assign(&mut row, t, c)?;
            }
        }

        // The pivot row goes last. Rows are then compared against a
        // lex-minimal pivot row and columns against a lex-maximal pivot
        // column, which prunes far more than pivot-first on both axes.
        let row_keys: Vec<u32> = sigma2.iter().copied().chain(core::iter::once(v)).collect();
        let col_keys: Vec<u32> = core::iter::once(v).chain(sigma1.iter().copied()).collect();
        let row_index: BTreeMap<u32, usize> = row_keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let col_index: BTreeMap<u32, usize> = col_keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut matrix: Vec<Vec<Option<Lit>>> = alloc::vec![alloc::vec![None; col_keys.len()]; row_keys.len()];
        for &x in sigma {
            let (Some(r), Some(c)) = (row.get(&x), col.get(&x)) else {
                return Err(DetectFailure::MalformedMatrix);
            };
            let cell = &mut matrix[row_index[r]][col_index[c]];
            if cell.replace(lit(x)).is_some() {
                return Err(DetectFailure::MalformedMatrix);
            }
        }
        if row_keys.len() * col_keys.len() != sigma.len() {
            return Err(DetectFailure::MalformedMatrix);
        }
        let matrix: Vec<Vec<Lit>> = matrix
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.expect("full matrix")).collect())
            .collect();

        let column = |j: usize| -> Vec<Lit> { matrix.iter().map(|r| r[j]).collect() };
        let pivot_row = row_keys.len() - 1;
        let mut generators = Vec::with_capacity(row_keys.len() + col_keys.len() - 2);
        for j in 1..col_keys.len() {
            let phi = transpose(&column(j), &column(0)).map_err(|_| DetectFailure::MalformedMatrix)?;
            generators.push(self.verified(phi)?);
        }
        for i in 0..pivot_row {
            let phi = transpose(&matrix[i], &matrix[pivot_row]).map_err(|_| DetectFailure::MalformedMatrix)?;
            generators.push(self.verified(phi)?);
        }
        Ok(self.cover(DetectedStructure::RowColumn(RowColumnStructure {
            matrix,
            generators,
            covered_colors: Vec::new(),
        })))
    }

    /// The first fragment of `sigma` (by color) of size `size` not
    /// containing `pivot`, after individualizing `x`.
    fn coordinate_fragment(
        &mut self,
        base: &Coloring,
        sigma: &[u32],
        x: u32,
        pivot: u32,
        size: usize,
    ) -> Result<Vec<u32>, DetectFailure> {
        let report = self.ir(base, x);
        let groups = group_by_color(&report.coloring, sigma);
        self.release(report, base);
        groups
            .into_iter()
            .map(|(_, g)| g)
            .find(|g| g.len() == size && !g.contains(&pivot))
            .ok_or(DetectFailure::MissingFragment)
    }
}
